#pragma once

#include <string>

#include "bucmrl/linear_mdp.hpp"

namespace bucmrl {

/// Recursive biased matrix ridge regression over observed transitions.
///
/// Internally the W-independent moments are kept (V = sum phi phi^T and the
/// unbiased cross-moment sum phi (K_psi^{-1} psi)^T), so the bias matrix can
/// change between solves without replaying data; the biased solution
///   M_hat = W + (V^lambda)^{-1} (cross - V W)
/// is materialized on demand and is algebraically the biased ridge minimizer.
class RidgeState {
public:
    RidgeState(int d, int d_prime, double lambda, Matrix kpsi_inv, Matrix bias_w);
    RidgeState(int d, int d_prime, double lambda, Matrix kpsi_inv);

    int d() const { return d_; }
    int d_prime() const { return d_prime_; }
    double lambda() const { return lambda_; }
    long t() const { return t_; }
    const Matrix& bias_w() const { return bias_w_; }
    void set_bias_w(Matrix w);

    const Matrix& v() const { return v_; }                      // V_n (without lambda I)
    Matrix v_lambda() const;                                    // lambda I + V_n
    const Matrix& v_lambda_inv() const { return v_lambda_inv_; }
    const Matrix& cross_unbiased() const { return cross_; }
    /// The W-dependent accumulated cross-moment sum phi (psi^T K^{-1} - phi^T W).
    Matrix cross_biased() const { return cross_ - v_ * bias_w_; }
    double lambda_min_v_lambda() const;

    /// Rank-one observation update; the maintained inverse is refreshed by a
    /// full factorization every 500 updates to cap drift.
    void update(const Vector& phi, const Vector& psi_next);

    /// Biased ridge estimate M_hat; equals W on an empty state.
    Matrix solve() const;

    std::string to_json() const;
    static RidgeState from_json(const std::string& text);

private:
    int d_;
    int d_prime_;
    double lambda_;
    long t_ = 0;
    Matrix kpsi_inv_;
    Matrix bias_w_;
    Matrix v_;
    Matrix v_lambda_inv_;
    Matrix cross_;
};

/// Confidence radius beta_n^W(delta) with D = 1 + t C_phi / (lambda d).
/// w_distance is ||W - M*||_F when an oracle supplies it, or a deployable
/// upper bound otherwise.
double ellipsoid_radius(const RidgeState& state, double delta, const RegularityConstants& constants,
                        double w_distance);

/// Deployable stand-in for ||W - M*||_F when M* is unknown:
/// ||W||_F + sqrt(C_M d).
double assumption_w_distance(const Matrix& w, const RegularityConstants& constants);

struct ConfidenceEllipsoid {
    Matrix center;
    double radius = 0.0;
    double delta = 0.0;

    bool contains(const Matrix& m_star) const { return (center - m_star).norm() <= radius; }
};

}  // namespace bucmrl
