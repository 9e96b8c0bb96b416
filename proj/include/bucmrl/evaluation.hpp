#pragma once

#include <string>
#include <vector>

#include "bucmrl/buc_agent.hpp"

namespace bucmrl {

/// Episodic feature log of a completed run, the input to the numeric
/// inequality checkers.
struct TrajectoryLog {
    double lambda = 0.0;
    std::vector<std::vector<Vector>> phis;  // per episode, per step

    int horizon() const;
    long total_steps() const;
};

TrajectoryLog trajectory_log(const RunRecord& record, const LinearMdp& mdp);

struct BoundReport {
    double empirical_regret = 0.0;
    double bound = 0.0;
    double beta_term = 0.0;    // C_psi' sqrt(d'd log(TD)) + sqrt(lambda) w_distance
    double sweep_term = 0.0;   // 2 C_psi H sqrt(C_{phi,lambda} T d ln D)
    double big_d = 0.0;
    double c_phi_lambda = 0.0;
    double slack_ratio = 0.0;  // bound / max(empirical, tiny)
};

/// Evaluates the explicit single-task regret bound; w_distance = ||M*||_F
/// reproduces the unbiased (W = 0) form bit-identically.
BoundReport regret_bound(const RegularityConstants& constants, double lambda, long t_steps,
                         int horizon, int d, int d_prime, double w_distance,
                         double empirical_regret = 0.0);

struct MtrBound {
    double mad_form = 0.0;
    double var_form = 0.0;
    double dvar_form = 0.0;  // schedule lambda = 1/(T Var_W)
    double tighter = 0.0;    // min(mad_form, var_form)
};

MtrBound mtr_bound(const RegularityConstants& constants, double lambda, long t_steps, int horizon,
                   int d, int d_prime, double var_w, double mad_w);

struct LemmaCheck {
    std::string lemma_id;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// sum ||phi||_{(V_n^l)^{-1}} <= sum 2||phi||_{(V_{n,h}^l)^{-1}} + (C_phi/lambda) d log D,
/// V_n frozen per episode on the left, per step on the right.
LemmaCheck check_log_det_lemma(const TrajectoryLog& log, double c_phi);

/// sum min(1, ||phi_t||^2_{(V_t^l)^{-1}}) <= 2d log(1 + t C_phi / (lambda d)).
LemmaCheck check_elliptical_potential(const TrajectoryLog& log, double c_phi);

/// sum min(1, w_{n,h}^2) with per-episode-frozen V_n <= 2Hd ln(1 + NH C_phi / (lambda d)).
LemmaCheck check_stale_feature_lemma(const TrajectoryLog& log, double c_phi);

struct TransferRegretSummary {
    double mean = 0.0;
    double stderr_ = 0.0;
    int count = 0;
};

TransferRegretSummary transfer_regret(const std::vector<RunRecord>& records);

}  // namespace bucmrl
