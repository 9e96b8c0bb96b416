#include "bucmrl/task_family.hpp"

#include <cmath>
#include <numeric>

namespace bucmrl {

TaskFamily::TaskFamily(FamilyKind kind, Features features, std::vector<double> reward, int horizon,
                       int start_state)
    : kind_(kind), features_(std::move(features)), reward_(std::move(reward)), horizon_(horizon),
      start_state_(start_state) {}

TaskFamily TaskFamily::anchor_dirichlet(Features features, std::vector<double> reward, int horizon,
                                        int start_state, TransitionCore mean_core, double kappa) {
    if (kappa <= 0.0) throw InvalidFamily("kappa must be positive");
    TaskFamily family(FamilyKind::AnchorDirichlet, std::move(features), std::move(reward), horizon,
                      start_state);
    family.mean_core_ = std::move(mean_core);
    family.kappa_ = kappa;
    // Construction must yield a valid instance at the mean.
    family.make_mdp(family.mean_core_);
    return family;
}

TaskFamily TaskFamily::finite_set(Features features, std::vector<double> reward, int horizon,
                                  int start_state, std::vector<TransitionCore> cores,
                                  std::vector<double> weights) {
    if (cores.empty()) throw InvalidFamily("finite set family needs at least one core");
    if (weights.empty()) weights.assign(cores.size(), 1.0 / static_cast<double>(cores.size()));
    if (weights.size() != cores.size()) throw InvalidFamily("weights/cores size mismatch");
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw InvalidFamily("weights must sum to 1");
    for (double w : weights)
        if (w < 0.0) throw InvalidFamily("weights must be nonnegative");
    TaskFamily family(FamilyKind::FiniteSet, std::move(features), std::move(reward), horizon,
                      start_state);
    family.cores_ = std::move(cores);
    family.weights_ = std::move(weights);
    for (const auto& core : family.cores_) family.make_mdp(core);
    return family;
}

TransitionCore TaskFamily::mean_core() const {
    if (kind_ == FamilyKind::AnchorDirichlet) return mean_core_;
    Matrix mean = Matrix::Zero(cores_.front().d(), cores_.front().d_prime());
    for (std::size_t i = 0; i < cores_.size(); ++i) mean += weights_[i] * cores_[i].m;
    return TransitionCore(mean);
}

TransitionCore TaskFamily::sample_core(Rng& rng) const {
    if (kind_ == FamilyKind::FiniteSet) {
        Vector w(static_cast<Eigen::Index>(weights_.size()));
        for (std::size_t i = 0; i < weights_.size(); ++i) w[static_cast<Eigen::Index>(i)] = weights_[i];
        return cores_[static_cast<std::size_t>(rng.categorical(w))];
    }
    Matrix m(mean_core_.m.rows(), mean_core_.m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Vector alpha = mean_core_.m.row(i).transpose().cwiseMax(1e-6) * kappa_;
        m.row(i) = rng.dirichlet(alpha).transpose();
    }
    return TransitionCore(m);
}

LinearMdp TaskFamily::make_mdp(const TransitionCore& core) const {
    return LinearMdp(features_, core, reward_, horizon_, start_state_);
}

FamilyStats TaskFamily::stats(const TransitionCore& w, long n_samples, Rng& rng) const {
    FamilyStats out;
    out.reference = w;
    if (kind_ == FamilyKind::FiniteSet) {
        for (std::size_t i = 0; i < cores_.size(); ++i) {
            const double dist = (cores_[i].m - w.m).norm();
            out.var_w += weights_[i] * dist * dist;
            out.mad_w += weights_[i] * dist;
        }
        out.n_samples = 0;
        return out;
    }
    if (n_samples < 1) throw InvalidFamily("n_samples must be >= 1 for Monte Carlo stats");
    for (long i = 0; i < n_samples; ++i) {
        const double dist = (sample_core(rng).m - w.m).norm();
        out.var_w += dist * dist;
        out.mad_w += dist;
    }
    out.var_w /= static_cast<double>(n_samples);
    out.mad_w /= static_cast<double>(n_samples);
    out.n_samples = n_samples;
    return out;
}

TaskFamily orthogonal_family(int d) {
    if (d < 2) throw InvalidFamily("orthogonal family requires d >= 2");
    const int S = d;
    const int A = 2;
    // phi(s,0) = e_s, phi(s,1) = e_{s+1 mod d}; psi one-hot.
    Matrix phi = Matrix::Zero(S * A, d);
    for (int s = 0; s < S; ++s) {
        phi(s * A + 0, s) = 1.0;
        phi(s * A + 1, (s + 1) % d) = 1.0;
    }
    Matrix psi = Matrix::Identity(S, S);
    std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
    for (int a = 0; a < A; ++a) reward[static_cast<std::size_t>(0) * A + a] = 1.0;

    // Core k is the k-step cyclic shift; column j of core k is basis vector
    // e_{(j-k) mod d}, distinct across k, so columns are pairwise orthogonal.
    std::vector<TransitionCore> cores;
    for (int k = 1; k <= d; ++k) {
        Matrix m = Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i) m(i, (i + k) % d) = 1.0;
        cores.emplace_back(std::move(m));
    }
    return TaskFamily::finite_set(Features(std::move(phi), std::move(psi), S, A),
                                  std::move(reward), /*horizon=*/d, /*start_state=*/0,
                                  std::move(cores), {});
}

}  // namespace bucmrl
