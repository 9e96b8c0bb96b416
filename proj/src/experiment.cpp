#include "bucmrl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bucmrl/evaluation.hpp"

namespace bucmrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    for (char c : value) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Zero: return "zero";
        case EstimatorKind::Oracle: return "oracle";
        case EstimatorKind::LowBiasAverage: return "lowbias";
        case EstimatorKind::GlobalRidge: return "globalridge";
    }
    return "zero";
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "zero") return EstimatorKind::Zero;
    if (name == "oracle") return EstimatorKind::Oracle;
    if (name == "lowbias") return EstimatorKind::LowBiasAverage;
    if (name == "globalridge") return EstimatorKind::GlobalRidge;
    throw ConfigError("unknown estimator '" + name +
                      "' (expected zero|oracle|lowbias|globalridge)");
}

void ExperimentConfig::validate() const {
    if (d < 1) throw ConfigError("family.d must be positive");
    if (num_states < 1) throw ConfigError("family.num_states must be positive");
    if (num_actions < 1) throw ConfigError("family.num_actions must be positive");
    if (horizon < 1) throw ConfigError("family.horizon must be positive");
    if (kappa <= 0.0) throw ConfigError("family.kappa must be positive");
    if (mean_sharpness <= 0.0 || mean_sharpness >= 1.0)
        throw ConfigError("family.mean_sharpness must lie in (0,1)");
    if (estimators.empty()) throw ConfigError("algorithm.estimators must not be empty");
    if (lambda <= 0.0) throw ConfigError("algorithm.lambda must be positive");
    if (delta < 0.0 || delta >= 1.0) throw ConfigError("algorithm.delta must lie in [0,1)");
    if (g_train < 0) throw ConfigError("run.g_train must be nonnegative");
    if (g_test < 1) throw ConfigError("run.g_test must be positive");
    if (episodes < 1) throw ConfigError("run.episodes must be positive");
    if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("run.seeds must be distinct");
    if (family_kind == FamilyConfigKind::Orthogonal && d < 2)
        throw ConfigError("orthogonal family requires d >= 2");
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    out << "[family]\n";
    out << "kind = "
        << (family_kind == FamilyConfigKind::AnchorDirichlet ? "anchor_dirichlet"
            : family_kind == FamilyConfigKind::FinitePointMass ? "finite_point_mass"
                                                               : "orthogonal")
        << "\n";
    out << "d = " << d << "\n";
    out << "num_states = " << num_states << "\n";
    out << "num_actions = " << num_actions << "\n";
    out << "horizon = " << horizon << "\n";
    out << "kappa = " << format_double(kappa) << "\n";
    out << "mean_core_seed = " << mean_core_seed << "\n";
    out << "mean_sharpness = " << format_double(mean_sharpness) << "\n";
    out << "\n[algorithm]\n";
    out << "estimators =";
    for (std::size_t i = 0; i < estimators.size(); ++i)
        out << (i == 0 ? " " : ", ") << estimator_name(estimators[i]);
    out << "\n";
    out << "lambda_mode = " << (lambda_schedule ? "schedule" : "fixed") << "\n";
    out << "lambda = " << format_double(lambda) << "\n";
    out << "delta = " << format_double(delta) << "\n";
    out << "continual = " << (continual ? "true" : "false") << "\n";
    out << "\n[run]\n";
    out << "g_train = " << g_train << "\n";
    out << "g_test = " << g_test << "\n";
    out << "episodes = " << episodes << "\n";
    out << "seeds =";
    for (std::size_t i = 0; i < seeds.size(); ++i) out << (i == 0 ? " " : ", ") << seeds[i];
    out << "\n";
    out << "out = " << out_dir << "\n";
    return out.str();
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    ExperimentConfig config;
    config.estimators.clear();
    config.seeds.clear();

    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = section + "." + key;
        try {
            if (full == "family.kind") {
                if (value == "anchor_dirichlet") config.family_kind = FamilyConfigKind::AnchorDirichlet;
                else if (value == "finite_point_mass") config.family_kind = FamilyConfigKind::FinitePointMass;
                else if (value == "orthogonal") config.family_kind = FamilyConfigKind::Orthogonal;
                else throw ConfigError("unknown family kind '" + value + "'");
            } else if (full == "family.d") config.d = std::stoi(value);
            else if (full == "family.num_states") config.num_states = std::stoi(value);
            else if (full == "family.num_actions") config.num_actions = std::stoi(value);
            else if (full == "family.horizon") config.horizon = std::stoi(value);
            else if (full == "family.kappa") config.kappa = std::stod(value);
            else if (full == "family.mean_core_seed") config.mean_core_seed = std::stoull(value);
            else if (full == "family.mean_sharpness") config.mean_sharpness = std::stod(value);
            else if (full == "algorithm.estimators") {
                for (const auto& name : split_list(value))
                    config.estimators.push_back(estimator_from_name(name));
            } else if (full == "algorithm.lambda_mode") {
                if (value == "schedule") config.lambda_schedule = true;
                else if (value == "fixed") config.lambda_schedule = false;
                else throw ConfigError("lambda_mode must be fixed|schedule");
            } else if (full == "algorithm.lambda") config.lambda = std::stod(value);
            else if (full == "algorithm.delta") config.delta = std::stod(value);
            else if (full == "algorithm.continual") config.continual = value == "true" || value == "1";
            else if (full == "run.g_train") config.g_train = std::stoi(value);
            else if (full == "run.g_test") config.g_test = std::stoi(value);
            else if (full == "run.episodes") config.episodes = std::stoi(value);
            else if (full == "run.seeds") {
                for (const auto& s : split_list(value)) config.seeds.push_back(std::stoull(s));
            } else if (full == "run.out") config.out_dir = value;
            else throw ConfigError("unknown key '" + full + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(line_no) + " (" + full +
                              "): " + e.what());
        }
    }
    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

TaskFamily build_family(const ExperimentConfig& config) {
    if (config.family_kind == FamilyConfigKind::Orthogonal) return orthogonal_family(config.d);

    const int S = config.num_states;
    const int A = config.num_actions;
    const int d = config.d;
    Rng rng(derive_seed(config.mean_core_seed, 0xfa111e5));

    // psi one-hot; phi rows on the d-simplex; mean-core rows sharpened
    // probability vectors. P = Phi * M is then row-stochastic by construction.
    Matrix psi = Matrix::Identity(S, S);
    Matrix phi(S * A, d);
    for (int i = 0; i < S * A; ++i)
        phi.row(i) = rng.dirichlet(Vector::Constant(d, 0.4)).transpose();

    Matrix mean(d, S);
    for (int k = 0; k < d; ++k) {
        const int target = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(S));
        for (int s = 0; s < S; ++s)
            mean(k, s) = (1.0 - config.mean_sharpness) / static_cast<double>(S);
        mean(k, target) += config.mean_sharpness;
    }

    // One goal state carries the reward; planning through the transitions is
    // what separates good and bad policies.
    const int goal = S - 1;
    std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
    for (int a = 0; a < A; ++a) reward[static_cast<std::size_t>(goal) * A + a] = 1.0;

    Features features(std::move(phi), std::move(psi), S, A);
    if (config.family_kind == FamilyConfigKind::FinitePointMass) {
        return TaskFamily::finite_set(std::move(features), std::move(reward), config.horizon, 0,
                                      {TransitionCore(mean)}, {});
    }
    return TaskFamily::anchor_dirichlet(std::move(features), std::move(reward), config.horizon, 0,
                                        TransitionCore(std::move(mean)), config.kappa);
}

namespace {

struct CellResult {
    EstimatorKind kind;
    std::uint64_t seed;
    MetaRunRecord record;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

}  // namespace

void run_scenario(const ExperimentConfig& config, int workers) {
    config.validate();
    if (config.out_dir.empty()) throw ConfigError("run.out (or --out) is required");
    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir);

    const TaskFamily family = build_family(config);
    const auto mean_core = family.mean_core();
    const auto constants =
        compute_regularity_constants(family.features(), mean_core);

    MetaOptions meta_opts;
    meta_opts.g_train = config.g_train;
    meta_opts.g_test = config.g_test;
    meta_opts.episodes = config.episodes;
    meta_opts.delta = config.delta;
    meta_opts.lambda = config.lambda;
    meta_opts.use_lambda_schedule = config.lambda_schedule;
    meta_opts.continual = config.continual;

    // Fan out over (estimator, seed) cells; results land in indexed slots and
    // all writes happen afterwards in a fixed order, so output stays
    // deterministic regardless of scheduling.
    std::vector<CellResult> cells;
    for (auto kind : config.estimators)
        for (auto seed : config.seeds) cells.push_back({kind, seed, {}});

    const int n_workers = std::max(1, workers);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(cells.size());
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                cells[i].record = meta_train(family, cells[i].kind, meta_opts, cells[i].seed);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);

    write_file(out_dir / "config.resolved.cfg", config.to_text());

    std::ostringstream bounds;
    bounds << "schema,estimator,seed,task,empirical_regret,bound,slack_ratio\n";
    std::ostringstream lemmas;
    lemmas << "schema,estimator,seed,task,lemma,lhs,rhs,holds\n";

    json summary;
    summary["artifact_version"] = kArtifactVersion;
    summary["csv_schema_version"] = kCsvSchemaVersion;
    summary["config_hash"] = hex64(fnv1a(config.to_text()));
    summary["estimators"] = json::object();

    for (auto kind : config.estimators) {
        const std::string name = estimator_name(kind);
        json est;
        est["per_seed"] = json::object();
        double sum = 0.0;
        double sum_sq = 0.0;
        for (auto seed : config.seeds) {
            const auto it = std::find_if(cells.begin(), cells.end(), [&](const CellResult& c) {
                return c.kind == kind && c.seed == seed;
            });
            const MetaRunRecord& record = it->record;
            const fs::path seed_dir = out_dir / name / ("seed" + std::to_string(seed));
            fs::create_directories(seed_dir);

            for (std::size_t g = 0; g < record.train_records.size(); ++g) {
                std::ostringstream csv;
                write_run_csv(record.train_records[g], csv);
                write_file(seed_dir / ("train_task" + std::to_string(g) + ".csv"), csv.str());
            }
            for (std::size_t g = 0; g < record.test_records.size(); ++g) {
                std::ostringstream csv;
                write_run_csv(record.test_records[g], csv);
                write_file(seed_dir / ("test_task" + std::to_string(g) + ".csv"), csv.str());

                const LinearMdp mdp =
                    family.make_mdp(TransitionCore(record.sampled_test_cores[g]));
                const auto& run = record.test_records[g];
                const auto report = regret_bound(
                    compute_regularity_constants(family.features(), mdp.core()), run.lambda,
                    static_cast<long>(run.episodes.size()) * mdp.horizon(), mdp.horizon(),
                    family.features().d(), family.features().d_prime(),
                    (record.final_w - mdp.core().m).norm(), run.cumulative_regret);
                bounds << kCsvSchemaVersion << "," << name << "," << seed << "," << g << ","
                       << format_double(report.empirical_regret) << ","
                       << format_double(report.bound) << "," << format_double(report.slack_ratio)
                       << "\n";

                const auto log = trajectory_log(run, mdp);
                for (const auto& check :
                     {check_log_det_lemma(log, constants.c_phi),
                      check_elliptical_potential(log, constants.c_phi),
                      check_stale_feature_lemma(log, constants.c_phi)}) {
                    lemmas << kCsvSchemaVersion << "," << name << "," << seed << "," << g << ","
                           << check.lemma_id << "," << format_double(check.lhs) << ","
                           << format_double(check.rhs) << "," << (check.holds ? 1 : 0) << "\n";
                }
            }

            json per_seed;
            per_seed["transfer_regret"] = record.transfer_regret;
            per_seed["transfer_regret_stderr"] = record.transfer_regret_stderr;
            per_seed["var_estimate"] = record.var_estimate;
            json eps = json::array();
            json hs = json::array();
            json lambdas = json::array();
            for (const auto& diag : record.train_diagnostics) {
                eps.push_back(diag.epsilon);
                hs.push_back(diag.h_script);
                lambdas.push_back(diag.lambda_used);
            }
            per_seed["epsilon_trace"] = eps;
            per_seed["h_script_trace"] = hs;
            per_seed["lambda_per_task"] = lambdas;
            est["per_seed"][std::to_string(seed)] = per_seed;
            sum += record.transfer_regret;
            sum_sq += record.transfer_regret * record.transfer_regret;
        }
        const double n = static_cast<double>(config.seeds.size());
        est["transfer_regret_mean"] = sum / n;
        est["transfer_regret_stderr"] =
            config.seeds.size() > 1
                ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)) / n)
                : 0.0;
        summary["estimators"][name] = est;
    }

    write_file(out_dir / "bounds.csv", bounds.str());
    write_file(out_dir / "lemmas.csv", lemmas.str());
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

std::string ComparisonTable::to_csv() const {
    std::ostringstream out;
    out << "seed";
    for (const auto& c : columns) out << "," << c;
    for (std::size_t i = 1; i < columns.size(); ++i) out << ",diff_" << columns[i];
    out << "\n";
    for (const auto& row : rows) {
        out << row.seed;
        for (double v : row.transfer_regret) out << "," << format_double(v);
        for (std::size_t i = 1; i < row.transfer_regret.size(); ++i)
            out << "," << format_double(row.transfer_regret[i] - row.transfer_regret[0]);
        out << "\n";
    }
    return out.str();
}

std::string ComparisonTable::to_text() const {
    std::ostringstream out;
    out << "seed";
    for (const auto& c : columns) out << "  " << c;
    out << "\n";
    for (const auto& row : rows) {
        out << row.seed;
        for (double v : row.transfer_regret) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "  %10.4f", v);
            out << buf;
        }
        out << "\n";
    }
    for (std::size_t i = 1; i < columns.size(); ++i) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s - %s: mean diff %.6f (stderr %.6f)\n",
                      columns[i].c_str(), columns[0].c_str(), mean_difference_vs_first[i - 1],
                      stderr_difference_vs_first[i - 1]);
        out << buf;
    }
    return out.str();
}

ComparisonTable compare_runs(const std::vector<fs::path>& run_dirs) {
    if (run_dirs.size() < 2) throw IncompatibleRuns("need at least two run directories");

    struct Loaded {
        std::string dir_name;
        json summary;
        ExperimentConfig config;
    };
    std::vector<Loaded> loaded;
    for (const auto& dir : run_dirs) {
        std::ifstream in(dir / "summary.json");
        if (!in) throw IncompatibleRuns("missing summary.json in " + dir.string());
        json summary = json::parse(in);
        Loaded l{dir.filename().string(), std::move(summary),
                 ExperimentConfig::load(dir / "config.resolved.cfg")};
        loaded.push_back(std::move(l));
    }
    const auto& base = loaded.front().config;
    for (const auto& l : loaded) {
        if (l.config.seeds != base.seeds)
            throw IncompatibleRuns("run directories have mismatched seeds");
        if (l.config.mean_core_seed != base.mean_core_seed ||
            l.config.family_kind != base.family_kind || l.config.d != base.d ||
            l.config.num_states != base.num_states || l.config.horizon != base.horizon)
            throw IncompatibleRuns("run directories have incompatible families");
    }

    ComparisonTable table;
    for (const auto& l : loaded)
        for (auto it = l.summary["estimators"].begin(); it != l.summary["estimators"].end(); ++it)
            table.columns.push_back(l.dir_name + ":" + it.key());

    for (auto seed : base.seeds) {
        ComparisonRow row;
        row.seed = seed;
        for (const auto& l : loaded)
            for (auto it = l.summary["estimators"].begin(); it != l.summary["estimators"].end();
                 ++it)
                row.transfer_regret.push_back(
                    it.value()["per_seed"][std::to_string(seed)]["transfer_regret"]
                        .get<double>());
        table.rows.push_back(std::move(row));
    }

    for (std::size_t col = 1; col < table.columns.size(); ++col) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const auto& row : table.rows) {
            const double diff = row.transfer_regret[col] - row.transfer_regret[0];
            sum += diff;
            sum_sq += diff * diff;
        }
        const double n = static_cast<double>(table.rows.size());
        table.mean_difference_vs_first.push_back(sum / n);
        table.stderr_difference_vs_first.push_back(
            n > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)) / n) : 0.0);
    }
    return table;
}

}  // namespace bucmrl
