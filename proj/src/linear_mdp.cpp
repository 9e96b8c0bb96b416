#include "bucmrl/linear_mdp.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bucmrl {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.size();
    const auto cols = rows == 0 ? 0 : j.at(0).size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j.at(i).at(c).get<double>();
    return m;
}

}  // namespace

Features::Features(Matrix phi, Matrix psi, int num_states, int num_actions)
    : phi_(std::move(phi)), psi_(std::move(psi)), num_states_(num_states), num_actions_(num_actions) {
    if (phi_.rows() != static_cast<Eigen::Index>(num_states_) * num_actions_)
        throw DimensionMismatch("phi must have |S|*|A| rows");
    if (psi_.rows() != num_states_) throw DimensionMismatch("psi must have |S| rows");

    kpsi_ = psi_.transpose() * psi_;
    Eigen::JacobiSVD<Matrix> svd(kpsi_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin < 1e-10)
        throw SingularKPsi("K_psi is singular at tolerance 1e-10 (smallest singular value " +
                           std::to_string(smin) + ")");
    kpsi_cond_ = smax / smin;
    kpsi_inv_ = svd.solve(Matrix::Identity(kpsi_.rows(), kpsi_.cols()));
}

RegularityConstants compute_regularity_constants(const Features& features,
                                                 const TransitionCore& core) {
    RegularityConstants out;
    out.c_phi = features.phi().rowwise().squaredNorm().maxCoeff();

    const Matrix psi_kinv = features.psi() * features.kpsi_inv();
    out.c_psi_prime = psi_kinv.rowwise().norm().maxCoeff();

    // ||Psi^T v||_2 / ||v||_inf is maximized over sign vectors; exact by
    // enumeration up to |S| = 12, column-norm-sum upper bound beyond.
    const int s = features.num_states();
    if (s <= 12) {
        double best = 0.0;
        Vector v(s);
        for (std::uint32_t mask = 0; mask < (1u << s); ++mask) {
            for (int i = 0; i < s; ++i) v[i] = (mask >> i) & 1u ? 1.0 : -1.0;
            best = std::max(best, (features.psi().transpose() * v).norm());
        }
        out.c_psi = best;
    } else {
        out.c_psi = features.psi().rowwise().norm().sum();
    }

    out.c_m = core.m.squaredNorm() / static_cast<double>(core.d());
    return out;
}

Vector clean_transition_row(const Vector& raw) {
    if (raw.minCoeff() < -1e-9)
        throw InvalidModel("transition probability below -1e-9: " + std::to_string(raw.minCoeff()));
    const double raw_sum = raw.sum();
    if (std::abs(raw_sum - 1.0) > 1e-6)
        throw InvalidModel("transition row sum deviates from 1 by " +
                           std::to_string(std::abs(raw_sum - 1.0)));
    Vector cleaned = raw.cwiseMax(0.0);
    return cleaned / cleaned.sum();
}

LinearMdp::LinearMdp(Features features, TransitionCore core, std::vector<double> reward,
                     int horizon, int start_state)
    : features_(std::move(features)), core_(std::move(core)), reward_(std::move(reward)),
      horizon_(horizon), start_state_(start_state) {
    if (core_.d() != features_.d() || core_.d_prime() != features_.d_prime())
        throw DimensionMismatch("transition core dimensions do not match features");
    if (reward_.size() != static_cast<std::size_t>(num_states()) * num_actions())
        throw DimensionMismatch("reward table must have |S|*|A| entries");
    if (horizon_ < 1) throw InvalidModel("horizon must be >= 1");
    if (start_state_ < 0 || start_state_ >= num_states()) throw InvalidModel("invalid start state");
    for (double r : reward_)
        if (r < 0.0 || r > 1.0) throw InvalidModel("rewards must lie in [0,1]");

    const Matrix raw = features_.phi() * core_.m * features_.psi().transpose();
    p_.resize(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
        p_.row(i) = clean_transition_row(raw.row(i)).transpose();
}

Vector LinearMdp::transition_distribution(int s, int a) const {
    return p_.row(s * num_actions() + a);
}

int LinearMdp::sample_next_state(int s, int a, Rng& rng) const {
    return rng.categorical(transition_distribution(s, a));
}

std::vector<Vector> LinearMdp::optimal_values() const {
    const int S = num_states();
    const int A = num_actions();
    std::vector<Vector> values(horizon_ + 1, Vector::Zero(S));
    for (int h = horizon_ - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = -1.0;
            for (int a = 0; a < A; ++a) {
                const double q = reward(s, a) + p_.row(s * A + a).dot(values[h + 1]);
                best = std::max(best, q);
            }
            values[h][s] = best;
        }
    }
    return values;
}

std::string LinearMdp::to_json() const {
    json j;
    j["num_states"] = num_states();
    j["num_actions"] = num_actions();
    j["d"] = features_.d();
    j["d_prime"] = features_.d_prime();
    j["phi"] = matrix_to_json(features_.phi());
    j["psi"] = matrix_to_json(features_.psi());
    j["core"] = matrix_to_json(core_.m);
    j["reward"] = reward_;
    j["horizon"] = horizon_;
    j["start_state"] = start_state_;
    const auto constants = compute_regularity_constants(features_, core_);
    j["constants"] = {{"c_phi", constants.c_phi},
                      {"c_psi", constants.c_psi},
                      {"c_psi_prime", constants.c_psi_prime},
                      {"c_m", constants.c_m}};
    return j.dump(2);
}

LinearMdp LinearMdp::from_json(const std::string& text) {
    const json j = json::parse(text);
    Features features(matrix_from_json(j.at("phi")), matrix_from_json(j.at("psi")),
                      j.at("num_states").get<int>(), j.at("num_actions").get<int>());
    TransitionCore core(matrix_from_json(j.at("core")));
    return LinearMdp(std::move(features), std::move(core),
                     j.at("reward").get<std::vector<double>>(), j.at("horizon").get<int>(),
                     j.at("start_state").get<int>());
}

}  // namespace bucmrl
