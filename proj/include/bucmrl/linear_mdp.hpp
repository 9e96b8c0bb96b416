#pragma once

#include <string>
#include <vector>

#include "bucmrl/rng.hpp"
#include "bucmrl/types.hpp"

namespace bucmrl {

/// d x d' matrix identifying a linear-transition MDP given shared features.
struct TransitionCore {
    Matrix m;

    TransitionCore() = default;
    explicit TransitionCore(Matrix mat) : m(std::move(mat)) {}

    int d() const { return static_cast<int>(m.rows()); }
    int d_prime() const { return static_cast<int>(m.cols()); }
};

/// Shared feature maps of a task family. phi has one row per (s,a) pair in
/// s-major, a-minor order; psi has one row per next state. K_psi and its
/// inverse are precomputed once (throws SingularKPsi when the smallest
/// singular value of K_psi is below 1e-10).
class Features {
public:
    Features(Matrix phi, Matrix psi, int num_states, int num_actions);

    const Matrix& phi() const { return phi_; }
    const Matrix& psi() const { return psi_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int d() const { return static_cast<int>(phi_.cols()); }
    int d_prime() const { return static_cast<int>(psi_.cols()); }

    Vector phi_row(int s, int a) const { return phi_.row(s * num_actions_ + a); }
    Vector psi_row(int s) const { return psi_.row(s); }

    const Matrix& kpsi() const { return kpsi_; }
    const Matrix& kpsi_inv() const { return kpsi_inv_; }
    double kpsi_condition_number() const { return kpsi_cond_; }

private:
    Matrix phi_;
    Matrix psi_;
    int num_states_;
    int num_actions_;
    Matrix kpsi_;
    Matrix kpsi_inv_;
    double kpsi_cond_ = 0.0;
};

/// Tight instance-level values for the feature regularity bounds.
struct RegularityConstants {
    double c_phi = 0.0;        // max row squared norm of phi
    double c_psi = 0.0;        // operator bound: ||Psi^T v||_2 <= c_psi ||v||_inf
    double c_psi_prime = 0.0;  // max row norm of Psi K_psi^{-1}
    double c_m = 0.0;          // ||M||_F^2 / d
};

RegularityConstants compute_regularity_constants(const Features& features,
                                                 const TransitionCore& core);

/// Finite MDP whose kernel factors as P(s'|s,a) = phi(s,a)^T M psi(s').
/// Immutable after construction; safe to share read-only across workers.
class LinearMdp {
public:
    LinearMdp(Features features, TransitionCore core, std::vector<double> reward,
              int horizon, int start_state);

    const Features& features() const { return features_; }
    const TransitionCore& core() const { return core_; }
    int num_states() const { return features_.num_states(); }
    int num_actions() const { return features_.num_actions(); }
    int horizon() const { return horizon_; }
    int start_state() const { return start_state_; }
    double reward(int s, int a) const { return reward_[s * num_actions() + a]; }
    const std::vector<double>& reward_table() const { return reward_; }

    /// Cleaned transition row: entries above -1e-12 clamped to 0, renormalized.
    Vector transition_distribution(int s, int a) const;

    /// Full (|S||A|) x |S| cleaned transition matrix, row per (s,a).
    const Matrix& transition_matrix() const { return p_; }

    int sample_next_state(int s, int a, Rng& rng) const;

    /// Exact backward DP under the true kernel. Returns H+1 tables,
    /// values[h](s) = V*_{h+1 in 1-based terms}; values[H] is identically 0.
    std::vector<Vector> optimal_values() const;

    std::string to_json() const;
    static LinearMdp from_json(const std::string& text);

private:
    Features features_;
    TransitionCore core_;
    std::vector<double> reward_;
    int horizon_;
    int start_state_;
    Matrix p_;  // cleaned row-stochastic transition matrix
};

/// Validates and cleans a raw transition row. Throws InvalidModel when an
/// entry is below -1e-9 or the raw sum is off 1 by more than 1e-6.
Vector clean_transition_row(const Vector& raw);

}  // namespace bucmrl
