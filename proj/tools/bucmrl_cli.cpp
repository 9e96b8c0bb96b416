#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bucmrl/experiment.hpp"

namespace fs = std::filesystem;

namespace {

#ifndef BUCMRL_PRESET_DIR
#define BUCMRL_PRESET_DIR ""
#endif

fs::path preset_dir(const std::string& override_dir) {
    if (!override_dir.empty()) return override_dir;
    if (const char* env = std::getenv("BUCMRL_PRESET_DIR")) return env;
    return BUCMRL_PRESET_DIR;
}

fs::path resolve_config(const std::string& arg, const std::string& presets) {
    if (fs::exists(arg)) return arg;
    const fs::path candidate = preset_dir(presets) / (arg + ".cfg");
    if (fs::exists(candidate)) return candidate;
    throw bucmrl::ConfigError("config not found: '" + arg + "' (not a file, not a preset)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BUC-MatrixRL experiment harness"};
    app.require_subcommand(1);

    std::string config_arg;
    std::string out_dir;
    std::string presets_dir;
    int workers = 1;
    std::uint64_t master_seed = 0;
    bool master_seed_set = false;

    auto* run = app.add_subcommand("run", "execute a scenario config or preset");
    run->add_option("config", config_arg, "config file path or preset name")->required();
    run->add_option("--out", out_dir, "output directory (overrides run.out)");
    run->add_option("--workers", workers, "worker pool size")->check(CLI::PositiveNumber);
    run->add_option("--master-seed", master_seed, "replace the config seed list with one seed")
        ->each([&](const std::string&) { master_seed_set = true; });
    run->add_option("--presets-dir", presets_dir, "preset search directory");

    std::vector<std::string> compare_dirs;
    auto* compare = app.add_subcommand("compare", "paired-by-seed comparison of run directories");
    compare->add_option("dirs", compare_dirs, "run directories")->required()->expected(2, -1);

    auto* validate = app.add_subcommand("validate", "parse and validate a config");
    validate->add_option("config", config_arg, "config file path or preset name")->required();
    validate->add_option("--presets-dir", presets_dir, "preset search directory");

    auto* presets = app.add_subcommand("presets", "preset management");
    auto* presets_list = presets->add_subcommand("list", "list shipped presets");
    presets_list->add_option("--presets-dir", presets_dir, "preset search directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            auto config = bucmrl::ExperimentConfig::load(resolve_config(config_arg, presets_dir));
            if (!out_dir.empty()) config.out_dir = out_dir;
            if (master_seed_set) config.seeds = {master_seed};
            bucmrl::run_scenario(config, workers);
            std::cout << "run complete: " << config.out_dir << "\n";
        } else if (compare->parsed()) {
            std::vector<fs::path> dirs(compare_dirs.begin(), compare_dirs.end());
            const auto table = bucmrl::compare_runs(dirs);
            std::cout << table.to_text();
            std::ofstream csv(dirs.front().parent_path() / "comparison.csv");
            csv << table.to_csv();
        } else if (validate->parsed()) {
            bucmrl::ExperimentConfig::load(resolve_config(config_arg, presets_dir));
            std::cout << "config ok\n";
        } else if (presets_list->parsed()) {
            const fs::path dir = preset_dir(presets_dir);
            if (fs::exists(dir))
                for (const auto& entry : fs::directory_iterator(dir))
                    if (entry.path().extension() == ".cfg")
                        std::cout << entry.path().stem().string() << "\n";
        }
    } catch (const bucmrl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
