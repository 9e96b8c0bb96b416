"""Python surface of the bucmrl C++ core."""

import os
import sys

_module_dir = os.environ.get("BUCMRL_MODULE_DIR")
if _module_dir and _module_dir not in sys.path:
    # Development builds: point at the cmake build tree instead of an
    # installed wheel.
    sys.path.insert(0, _module_dir)
    from _bucmrl import *  # noqa: F401,F403
    from _bucmrl import __version__  # noqa: F401
else:
    from ._bucmrl import *  # noqa: F401,F403
    from ._bucmrl import __version__  # noqa: F401
