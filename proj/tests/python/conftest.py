import os
import sys

module_dir = os.environ.get("BUCMRL_MODULE_DIR")
if module_dir:
    sys.path.insert(0, module_dir)
else:
    # Fall back to the local cmake build tree.
    here = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    sys.path.insert(0, os.path.join(here, "build"))
