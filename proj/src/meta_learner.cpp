#include "bucmrl/meta_learner.hpp"

#include <cmath>

namespace bucmrl {

namespace {
// Stream tags for deterministic per-task seed derivation. Adding tasks never
// perturbs earlier streams.
constexpr std::uint64_t kTrainCoreTag = 1;
constexpr std::uint64_t kTrainEnvTag = 2;
constexpr std::uint64_t kTestCoreTag = 3;
constexpr std::uint64_t kTestEnvTag = 4;
constexpr std::uint64_t kStatsTag = 5;
}  // namespace

Matrix low_bias_w(const std::vector<Matrix>& prev_cores, const Matrix& current, long t_per_task,
                  long steps_in_current) {
    const long z = t_per_task * static_cast<long>(prev_cores.size()) + steps_in_current;
    if (z <= 0) throw EmptyHistory("no previous tasks and no transitions in the current task");
    Matrix w = Matrix::Zero(current.rows(), current.cols());
    for (const auto& core : prev_cores)
        w += (static_cast<double>(t_per_task) / static_cast<double>(z)) * core;
    w += (static_cast<double>(steps_in_current) / static_cast<double>(z)) * current;
    return w;
}

GlobalRidgePool::GlobalRidgePool(int d, int d_prime, Matrix kpsi_inv)
    : d_(d), d_prime_(d_prime), kpsi_inv_(std::move(kpsi_inv)), v_(Matrix::Zero(d, d)),
      cross_(Matrix::Zero(d, d_prime)), current_task_v_(Matrix::Zero(d, d)) {}

void GlobalRidgePool::add_transition(const Vector& phi, const Vector& psi_next) {
    if (phi.size() != d_ || psi_next.size() != d_prime_)
        throw DimensionMismatch("pooled transition has wrong dimensions");
    const Matrix outer = phi * phi.transpose();
    v_ += outer;
    current_task_v_ += outer;
    cross_ += phi * (kpsi_inv_ * psi_next).transpose();
    ++t_;
}

void GlobalRidgePool::end_task() {
    task_v_.push_back(current_task_v_);
    current_task_v_.setZero();
}

Matrix GlobalRidgePool::solve(double lambda) const {
    const Matrix v_lambda = lambda * Matrix::Identity(d_, d_) + v_;
    return v_lambda.ldlt().solve(cross_);
}

double GlobalRidgePool::lambda_min() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(v_);
    return es.eigenvalues().minCoeff();
}

double lambda_schedule(double var_estimate, long t_per_task) {
    if (t_per_task < 1) throw std::invalid_argument("T must be >= 1");
    constexpr double kVarFloor = 1e-6;
    return 1.0 / (static_cast<double>(t_per_task) * std::max(var_estimate, kVarFloor));
}

namespace {

class LowBiasSource : public BiasSource {
public:
    LowBiasSource(int d, int d_prime, long t_per_task)
        : w_(Matrix::Zero(d, d_prime)), t_per_task_(t_per_task) {}

    const Matrix& current_w() const override { return w_; }

    void on_episode_end(const RidgeState& task_state) override {
        const Matrix current = task_state.solve();
        try {
            w_ = low_bias_w(prev_, current, t_per_task_, task_state.t());
        } catch (const EmptyHistory&) {
            // keep the initial bias W_0
        }
    }

    void finish_task(const Matrix& final_estimate) {
        prev_.push_back(final_estimate);
        try {
            w_ = low_bias_w(prev_, Matrix::Zero(w_.rows(), w_.cols()), t_per_task_, 0);
        } catch (const EmptyHistory&) {
        }
    }

    const std::vector<Matrix>& prev() const { return prev_; }

private:
    Matrix w_;
    std::vector<Matrix> prev_;
    long t_per_task_;
};

class GlobalRidgeSource : public BiasSource {
public:
    GlobalRidgeSource(GlobalRidgePool& pool, double lambda, int d, int d_prime)
        : pool_(pool), lambda_(lambda), w_(Matrix::Zero(d, d_prime)) {}

    const Matrix& current_w() const override { return w_; }

    void on_transition(const Vector& phi, const Vector& psi_next) override {
        pool_.add_transition(phi, psi_next);
    }

    void on_episode_end(const RidgeState&) override { w_ = pool_.solve(lambda_); }

    void set_lambda(double lambda) { lambda_ = lambda; }

private:
    GlobalRidgePool& pool_;
    double lambda_;
    Matrix w_;
};

double plug_in_variance(const std::vector<Matrix>& estimates) {
    if (estimates.size() < 2) return -1.0;
    Matrix mean = Matrix::Zero(estimates.front().rows(), estimates.front().cols());
    for (const auto& m : estimates) mean += m;
    mean /= static_cast<double>(estimates.size());
    double var = 0.0;
    for (const auto& m : estimates) var += (m - mean).squaredNorm();
    return var / static_cast<double>(estimates.size());
}

Matrix flat_core_average(const std::vector<Matrix>& cores) {
    Matrix mean = Matrix::Zero(cores.front().rows(), cores.front().cols());
    for (const auto& m : cores) mean += m;
    return mean / static_cast<double>(cores.size());
}

}  // namespace

MetaRunRecord meta_train(const TaskFamily& family, EstimatorKind kind, const MetaOptions& opts,
                         std::uint64_t seed) {
    if (opts.g_train < 0 || opts.g_test < 1 || opts.episodes < 1)
        throw std::invalid_argument("invalid meta options");

    const int d = family.features().d();
    const int d_prime = family.features().d_prime();
    const long t_per_task = static_cast<long>(opts.episodes) * family.horizon();
    const Matrix mean_core = family.mean_core().m;

    MetaRunRecord record;
    record.kind = kind;

    // Exact (or Monte Carlo) family statistics for the oracle estimator.
    FamilyStats oracle_stats;
    if (kind == EstimatorKind::Oracle) {
        Rng stats_rng(derive_seed(seed, kStatsTag, 0));
        oracle_stats = family.stats(TransitionCore(mean_core), opts.stats_samples, stats_rng);
    }

    GlobalRidgePool pool(d, d_prime, family.features().kpsi_inv());
    LowBiasSource low_bias(d, d_prime, t_per_task);
    GlobalRidgeSource global_ridge(pool, opts.lambda, d, d_prime);
    FixedBias zero_bias(Matrix::Zero(d, d_prime));
    FixedBias oracle_bias(mean_core);

    std::vector<Matrix> final_task_estimates;

    auto current_lambda = [&](bool is_test) -> double {
        if (kind == EstimatorKind::Zero || !opts.use_lambda_schedule) return opts.lambda;
        if (kind == EstimatorKind::Oracle)
            return lambda_schedule(oracle_stats.var_w, t_per_task);
        const double var = plug_in_variance(final_task_estimates);
        if (var < 0.0) return opts.lambda;
        (void)is_test;
        return lambda_schedule(var, t_per_task);
    };

    auto w_distance_options = [&](TaskOptions& task_opts) {
        if (opts.w_distance_override >= 0.0) {
            task_opts.w_distance_mode = WDistanceMode::Explicit;
            task_opts.w_distance_value = opts.w_distance_override;
            return;
        }
        switch (kind) {
            case EstimatorKind::Zero:
                task_opts.w_distance_mode = WDistanceMode::AssumptionBound;
                break;
            case EstimatorKind::Oracle:
                task_opts.w_distance_mode = WDistanceMode::Explicit;
                task_opts.w_distance_value = oracle_stats.mad_w;
                break;
            case EstimatorKind::LowBiasAverage:
            case EstimatorKind::GlobalRidge: {
                const double var = plug_in_variance(final_task_estimates);
                if (var < 0.0) {
                    task_opts.w_distance_mode = WDistanceMode::AssumptionBound;
                } else {
                    task_opts.w_distance_mode = WDistanceMode::Explicit;
                    task_opts.w_distance_value = std::sqrt(var);
                }
                break;
            }
        }
    };

    auto live_source = [&]() -> BiasSource& {
        switch (kind) {
            case EstimatorKind::Zero: return zero_bias;
            case EstimatorKind::Oracle: return oracle_bias;
            case EstimatorKind::LowBiasAverage: return low_bias;
            case EstimatorKind::GlobalRidge: return global_ridge;
        }
        return zero_bias;
    };

    // --- training phase ---
    std::vector<Matrix> observed_cores;
    for (int g = 0; g < opts.g_train; ++g) {
        Rng core_rng(derive_seed(seed, kTrainCoreTag, static_cast<std::uint64_t>(g)));
        const TransitionCore core = family.sample_core(core_rng);
        const LinearMdp mdp = family.make_mdp(core);
        observed_cores.push_back(core.m);
        record.sampled_train_cores.push_back(core.m);

        TaskOptions task_opts;
        task_opts.lambda = current_lambda(false);
        task_opts.episodes = opts.episodes;
        task_opts.delta = opts.delta;
        w_distance_options(task_opts);
        if (kind == EstimatorKind::GlobalRidge) global_ridge.set_lambda(task_opts.lambda);

        Rng env_rng(derive_seed(seed, kTrainEnvTag, static_cast<std::uint64_t>(g)));
        BiasSource& source = live_source();

        // Each task runs its own ridge state; the estimator carries state
        // across tasks.
        RunRecord run = run_task(mdp, source, task_opts, env_rng);

        // Final within-task estimate, recomputed from the trajectory.
        RidgeState final_state(d, d_prime, task_opts.lambda, family.features().kpsi_inv(),
                               source.current_w());
        for (std::size_t n = 0; n < run.states.size(); ++n)
            for (std::size_t h = 0; h < run.states[n].size(); ++h)
                final_state.update(mdp.features().phi_row(run.states[n][h], run.actions[n][h]),
                                   mdp.features().psi_row(run.next_states[n][h]));
        const Matrix final_estimate = final_state.solve();
        final_task_estimates.push_back(final_estimate);

        if (kind == EstimatorKind::LowBiasAverage) low_bias.finish_task(final_estimate);
        if (kind == EstimatorKind::GlobalRidge) {
            pool.end_task();
            global_ridge.on_episode_end(final_state);
        }

        TaskDiagnostics diag;
        diag.lambda_used = task_opts.lambda;
        diag.epsilon = (mean_core - live_source().current_w()).squaredNorm();
        diag.h_script = (mean_core - flat_core_average(observed_cores)).norm();
        if (kind == EstimatorKind::GlobalRidge && !pool.per_task_v().empty()) {
            const Matrix v_tilde_inv =
                (task_opts.lambda * Matrix::Identity(d, d) + pool.v_tilde())
                    .ldlt()
                    .solve(Matrix::Identity(d, d));
            const Matrix mis = pool.per_task_v().back() * v_tilde_inv;
            Eigen::JacobiSVD<Matrix> svd(mis);
            diag.h_tilde = (mean_core - core.m).norm() * svd.singularValues().maxCoeff();
        }
        record.train_diagnostics.push_back(diag);
        record.train_records.push_back(std::move(run));
    }

    // Freeze the bias before the test phase (no test-task leakage).
    record.final_w = live_source().current_w();
    {
        const double var = plug_in_variance(final_task_estimates);
        record.var_estimate = var < 0.0 ? 0.0 : var;
    }
    if (kind == EstimatorKind::GlobalRidge) record.nu_min = pool.lambda_min();

    // --- test phase ---
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int g = 0; g < opts.g_test; ++g) {
        Rng core_rng(derive_seed(seed, kTestCoreTag, static_cast<std::uint64_t>(g)));
        const TransitionCore core = family.sample_core(core_rng);
        const LinearMdp mdp = family.make_mdp(core);
        record.sampled_test_cores.push_back(core.m);

        TaskOptions task_opts;
        task_opts.lambda = current_lambda(true);
        task_opts.episodes = opts.episodes;
        task_opts.delta = opts.delta;
        w_distance_options(task_opts);

        Rng env_rng(derive_seed(seed, kTestEnvTag, static_cast<std::uint64_t>(g)));
        RunRecord run = [&] {
            if (opts.continual) {
                if (kind == EstimatorKind::GlobalRidge) global_ridge.set_lambda(task_opts.lambda);
                return run_task(mdp, live_source(), task_opts, env_rng);
            }
            FixedBias frozen(record.final_w);
            return run_task(mdp, frozen, task_opts, env_rng);
        }();
        sum += run.cumulative_regret;
        sum_sq += run.cumulative_regret * run.cumulative_regret;
        record.test_records.push_back(std::move(run));
    }
    const double n = static_cast<double>(opts.g_test);
    record.transfer_regret = sum / n;
    if (opts.g_test > 1) {
        const double var = (sum_sq - sum * sum / n) / (n - 1.0);
        record.transfer_regret_stderr = std::sqrt(std::max(var, 0.0) / n);
    }
    return record;
}

EstimationDiagnostics estimation_diagnostics(const MetaRunRecord& record,
                                             const TaskFamily& family) {
    EstimationDiagnostics out;
    const Matrix mean_core = family.mean_core().m;
    std::vector<Matrix> seen;
    for (std::size_t g = 0; g < record.train_diagnostics.size(); ++g) {
        seen.push_back(record.sampled_train_cores[g]);
        out.epsilon_per_task.push_back(record.train_diagnostics[g].epsilon);
        out.h_script_per_task.push_back((mean_core - flat_core_average(seen)).norm());
    }
    out.final_epsilon = (mean_core - record.final_w).squaredNorm();
    return out;
}

}  // namespace bucmrl
