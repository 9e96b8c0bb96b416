#pragma once

#include <memory>
#include <vector>

#include "bucmrl/buc_agent.hpp"
#include "bucmrl/task_family.hpp"

namespace bucmrl {

enum class EstimatorKind { Zero, Oracle, LowBiasAverage, GlobalRidge };

/// Z-normalized convex combination of previous final core estimates and the
/// current task's running estimate; Z = T(G-1) + nH + h. prev_cores holds the
/// G-1 predecessors' final estimates. Throws EmptyHistory when both parts are
/// empty (G = 1, nH + h = 0).
Matrix low_bias_w(const std::vector<Matrix>& prev_cores, const Matrix& current, long t_per_task,
                  long steps_in_current);

/// Pooled-data state for the global ridge estimator. Accumulates every
/// transition of every task into one feature matrix and cross-moment.
class GlobalRidgePool {
public:
    GlobalRidgePool(int d, int d_prime, Matrix kpsi_inv);

    void add_transition(const Vector& phi, const Vector& psi_next);
    /// Marks a task boundary (bookkeeping for per-task V matrices).
    void end_task();

    const Matrix& v_tilde() const { return v_; }
    const std::vector<Matrix>& per_task_v() const { return task_v_; }
    long t() const { return t_; }

    /// (V_tilde^lambda)^{-1} * pooled cross-moment: one unbiased ridge solve
    /// over all pooled transitions.
    Matrix solve(double lambda) const;

    double lambda_min() const;

private:
    int d_;
    int d_prime_;
    Matrix kpsi_inv_;
    Matrix v_;
    Matrix cross_;
    Matrix current_task_v_;
    std::vector<Matrix> task_v_;
    long t_ = 0;
};

/// lambda = 1 / (T * max(var, 1e-6)); the Zero-bias ITRL baseline keeps a
/// fixed lambda = 1 instead (handled by the caller).
double lambda_schedule(double var_estimate, long t_per_task);

struct TaskDiagnostics {
    double epsilon = 0.0;      // ||M_bar - W_hat||_F^2 at task end
    double h_script = 0.0;     // ||M_bar - observed-core average||_F
    double lambda_used = 0.0;
    double h_tilde = 0.0;      // GlobalRidge misalignment, 0 otherwise
};

struct MetaRunRecord {
    EstimatorKind kind = EstimatorKind::Zero;
    std::vector<RunRecord> train_records;
    std::vector<RunRecord> test_records;
    std::vector<Matrix> sampled_train_cores;
    std::vector<Matrix> sampled_test_cores;
    std::vector<TaskDiagnostics> train_diagnostics;
    Matrix final_w;            // frozen before test tasks
    double var_estimate = 0.0; // plug-in variance used by the schedule
    double nu_min = 0.0;       // lambda_min of the pooled matrix (GlobalRidge)
    double transfer_regret = 0.0;
    double transfer_regret_stderr = 0.0;
};

struct MetaOptions {
    int g_train = 0;
    int g_test = 1;
    int episodes = 1;      // N per task
    double delta = 0.0;    // <= 0 selects 1/(NH)
    double lambda = 1.0;   // fixed-lambda value (Zero baseline, or schedule off)
    bool use_lambda_schedule = true;
    bool continual = false;  // every task also feeds the estimator
    long stats_samples = 512;
    // >= 0 pins an explicit bias-distance for every estimator, making the
    // confidence radii identical across arms; < 0 keeps the per-estimator
    // policy.
    double w_distance_override = -1.0;
};

/// The meta-training protocol: run the within-task loop on G_train sampled
/// tasks feeding the estimator, freeze the bias, then score G_test freshly
/// sampled test tasks. The rng seeds per-task streams deterministically.
MetaRunRecord meta_train(const TaskFamily& family, EstimatorKind kind, const MetaOptions& opts,
                         std::uint64_t seed);

/// Post-hoc diagnostics against the known mean core of a synthetic family.
struct EstimationDiagnostics {
    std::vector<double> epsilon_per_task;
    std::vector<double> h_script_per_task;
    double final_epsilon = 0.0;
};

EstimationDiagnostics estimation_diagnostics(const MetaRunRecord& record,
                                             const TaskFamily& family);

}  // namespace bucmrl
