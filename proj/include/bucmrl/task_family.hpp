#pragma once

#include <optional>
#include <vector>

#include "bucmrl/linear_mdp.hpp"

namespace bucmrl {

enum class FamilyKind { AnchorDirichlet, FiniteSet };

struct FamilyStats {
    double var_w = 0.0;  // E ||M - W||_F^2
    double mad_w = 0.0;  // E ||M - W||_F
    TransitionCore reference;
    long n_samples = 0;  // 0 when computed exactly
};

/// Distribution over transition cores sharing one MDP skeleton (features,
/// reward, horizon, start state). AnchorDirichlet draws each core row from
/// Dirichlet(kappa * mean_row); FiniteSet draws from an explicit weighted set.
class TaskFamily {
public:
    static TaskFamily anchor_dirichlet(Features features, std::vector<double> reward, int horizon,
                                       int start_state, TransitionCore mean_core, double kappa);

    static TaskFamily finite_set(Features features, std::vector<double> reward, int horizon,
                                 int start_state, std::vector<TransitionCore> cores,
                                 std::vector<double> weights);

    FamilyKind kind() const { return kind_; }
    const Features& features() const { return features_; }
    const std::vector<double>& reward() const { return reward_; }
    int horizon() const { return horizon_; }
    int start_state() const { return start_state_; }
    double kappa() const { return kappa_; }
    const std::vector<TransitionCore>& cores() const { return cores_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Exact mean core (the Dirichlet anchor, or the weighted set average).
    TransitionCore mean_core() const;

    TransitionCore sample_core(Rng& rng) const;

    LinearMdp make_mdp(const TransitionCore& core) const;

    /// Var_W and Mad_W; exact on FiniteSet, Monte Carlo otherwise.
    FamilyStats stats(const TransitionCore& w, long n_samples, Rng& rng) const;

private:
    TaskFamily(FamilyKind kind, Features features, std::vector<double> reward, int horizon,
               int start_state);

    FamilyKind kind_;
    Features features_;
    std::vector<double> reward_;
    int horizon_;
    int start_state_;
    // AnchorDirichlet
    TransitionCore mean_core_;
    double kappa_ = 0.0;
    // FiniteSet
    std::vector<TransitionCore> cores_;
    std::vector<double> weights_;
};

/// The maximally-misaligned corner case: d deterministic cycle MDPs whose
/// core columns are pairwise-orthogonal basis vectors. d >= 2.
TaskFamily orthogonal_family(int d);

}  // namespace bucmrl
