#pragma once

#include <ostream>
#include <vector>

#include "bucmrl/core_regression.hpp"
#include "bucmrl/linear_mdp.hpp"

namespace bucmrl {

/// Supplies the bias transition core during a task run. Meta estimators hook
/// the per-transition and per-episode callbacks; a plain run uses FixedBias.
class BiasSource {
public:
    virtual ~BiasSource() = default;
    virtual const Matrix& current_w() const = 0;
    virtual void on_transition(const Vector& /*phi*/, const Vector& /*psi_next*/) {}
    virtual void on_episode_end(const RidgeState& /*task_state*/) {}
};

class FixedBias : public BiasSource {
public:
    explicit FixedBias(Matrix w) : w_(std::move(w)) {}
    const Matrix& current_w() const override { return w_; }

private:
    Matrix w_;
};

struct OptimisticPlan {
    std::vector<Matrix> q;  // per stage h in [0,H): S x A
    std::vector<Vector> v;  // per stage h in [0,H]: V[H] = 0
    double bonus_scale = 0.0;
    std::vector<Matrix> clipped;  // per stage: 1.0 where clipping engaged
};

/// Backward recursion Q_h(s,a) = clip(r + phi^T M_hat Psi^T V_{h+1}
///   + beta ||phi||_{(V^lambda)^{-1}} C_psi ||V_{h+1}||_inf, 0, H).
OptimisticPlan build_optimistic_q(const Matrix& m_hat, double beta, const Matrix& v_lambda_inv,
                                  const Features& features, const std::vector<double>& reward,
                                  int horizon, double c_psi);

/// argmax over the Q row; lowest action index on ties.
int greedy_action(const OptimisticPlan& plan, int s, int h);

enum class WDistanceMode {
    Oracle,           // true ||W - M*||_F, diagnostics only
    AssumptionBound,  // ||W||_F + sqrt(C_M d)
    Explicit,         // caller-provided value
};

struct TaskOptions {
    double lambda = 1.0;
    int episodes = 1;
    double delta = 0.0;  // <= 0 selects 1/(NH)
    WDistanceMode w_distance_mode = WDistanceMode::Oracle;
    double w_distance_value = 0.0;  // used by Explicit
};

struct EpisodeStats {
    int episode = 0;
    double realized_return = 0.0;
    double v_star = 0.0;
    double regret_increment = 0.0;
    double cum_regret = 0.0;
    double beta = 0.0;
    bool in_ellipsoid = false;
    double core_error = 0.0;   // ||M_hat - M*||_F
    double lambda_min = 0.0;   // lambda_min(V_n^lambda) at episode start
    double v_plan_start = 0.0; // optimistic V_{n,1}(s0)
};

struct RunRecord {
    std::vector<EpisodeStats> episodes;
    std::vector<std::vector<int>> states;   // per episode: s_{n,1..H}
    std::vector<std::vector<int>> actions;  // per episode: a_{n,1..H}
    std::vector<std::vector<int>> next_states;
    double v_star_start = 0.0;
    double cumulative_regret = 0.0;
    double lambda = 0.0;

    /// R_T recomputed independently from the stored trajectory.
    double recompute_regret(const LinearMdp& mdp) const;
};

/// Within-task biased upper-confidence loop: per episode build the optimistic
/// plan from (M_hat, beta), act greedily for H steps, then fold the episode's
/// transitions into the ridge state and refresh beta, W and M_hat.
RunRecord run_task(const LinearMdp& mdp, BiasSource& bias, const TaskOptions& opts, Rng& rng);

RunRecord run_task(const LinearMdp& mdp, const Matrix& bias_w, const TaskOptions& opts, Rng& rng);

/// One row per episode:
/// episode,return,v_star,regret_increment,cum_regret,beta,in_ellipsoid,core_error,lambda_min
void write_run_csv(const RunRecord& record, std::ostream& out);

}  // namespace bucmrl
