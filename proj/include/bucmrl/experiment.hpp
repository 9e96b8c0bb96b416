#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bucmrl/meta_learner.hpp"

namespace bucmrl {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kCsvSchemaVersion = "1";

enum class FamilyConfigKind { AnchorDirichlet, FinitePointMass, Orthogonal };

struct ExperimentConfig {
    // [family]
    FamilyConfigKind family_kind = FamilyConfigKind::AnchorDirichlet;
    int d = 4;
    int num_states = 4;
    int num_actions = 2;
    int horizon = 3;
    double kappa = 100.0;
    std::uint64_t mean_core_seed = 7;
    double mean_sharpness = 0.85;

    // [algorithm]
    std::vector<EstimatorKind> estimators;
    bool lambda_schedule = true;
    double lambda = 1.0;
    double delta = 0.0;  // 0 selects 1/(NH)
    bool continual = false;

    // [run]
    int g_train = 0;
    int g_test = 1;
    int episodes = 1;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;

    void validate() const;
    std::string to_text() const;  // resolved, round-trips losslessly
    static ExperimentConfig parse_text(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
};

std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

/// Deterministic instance built from the family section: psi one-hot, phi
/// rows on the d-simplex, mean-core rows sharpened probability vectors, all
/// derived from mean_core_seed.
TaskFamily build_family(const ExperimentConfig& config);

/// Executes every (estimator, seed) cell, writes episode CSVs, bounds.csv,
/// lemmas.csv, summary.json and the resolved config into out_dir. Re-running
/// the same config reproduces byte-identical numeric CSV content.
void run_scenario(const ExperimentConfig& config, int workers = 1);

struct ComparisonRow {
    std::uint64_t seed = 0;
    std::vector<double> transfer_regret;  // one per (dir, estimator) column
};

struct ComparisonTable {
    std::vector<std::string> columns;
    std::vector<ComparisonRow> rows;
    std::vector<double> mean_difference_vs_first;    // per non-first column
    std::vector<double> stderr_difference_vs_first;  // paired by seed

    std::string to_csv() const;
    std::string to_text() const;
};

ComparisonTable compare_runs(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace bucmrl
