#include "bucmrl/core_regression.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace bucmrl {

namespace {
constexpr long kReinversionPeriod = 500;

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
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j.at(i).at(c).get<double>();
    return m;
}
}  // namespace

RidgeState::RidgeState(int d, int d_prime, double lambda, Matrix kpsi_inv, Matrix bias_w)
    : d_(d), d_prime_(d_prime), lambda_(lambda), kpsi_inv_(std::move(kpsi_inv)),
      bias_w_(std::move(bias_w)), v_(Matrix::Zero(d, d)),
      v_lambda_inv_(Matrix::Identity(d, d) / lambda), cross_(Matrix::Zero(d, d_prime)) {
    if (lambda_ <= 0.0) throw std::invalid_argument("lambda must be positive");
    if (kpsi_inv_.rows() != d_prime_ || kpsi_inv_.cols() != d_prime_)
        throw DimensionMismatch("kpsi_inv must be d' x d'");
    if (bias_w_.rows() != d_ || bias_w_.cols() != d_prime_)
        throw DimensionMismatch("bias matrix must be d x d'");
}

RidgeState::RidgeState(int d, int d_prime, double lambda, Matrix kpsi_inv)
    : RidgeState(d, d_prime, lambda, std::move(kpsi_inv), Matrix::Zero(d, d_prime)) {}

void RidgeState::set_bias_w(Matrix w) {
    if (w.rows() != d_ || w.cols() != d_prime_) throw DimensionMismatch("bias matrix must be d x d'");
    bias_w_ = std::move(w);
}

Matrix RidgeState::v_lambda() const { return lambda_ * Matrix::Identity(d_, d_) + v_; }

double RidgeState::lambda_min_v_lambda() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(v_lambda());
    return es.eigenvalues().minCoeff();
}

void RidgeState::update(const Vector& phi, const Vector& psi_next) {
    if (phi.size() != d_) throw DimensionMismatch("phi must have dimension d");
    if (psi_next.size() != d_prime_) throw DimensionMismatch("psi must have dimension d'");
    v_ += phi * phi.transpose();
    cross_ += phi * (kpsi_inv_ * psi_next).transpose();
    ++t_;
    if (t_ % kReinversionPeriod == 0) {
        v_lambda_inv_ = v_lambda().ldlt().solve(Matrix::Identity(d_, d_));
    } else {
        // Sherman-Morrison rank-one update of the inverse.
        const Vector u = v_lambda_inv_ * phi;
        v_lambda_inv_ -= (u * u.transpose()) / (1.0 + phi.dot(u));
    }
}

Matrix RidgeState::solve() const { return bias_w_ + v_lambda_inv_ * (cross_ - v_ * bias_w_); }

double ellipsoid_radius(const RidgeState& state, double delta,
                        const RegularityConstants& constants, double w_distance) {
    if (delta <= 0.0 || delta >= 1.0) throw InvalidDelta("delta must lie in (0,1)");
    if (w_distance < 0.0) throw std::invalid_argument("w_distance must be nonnegative");
    const double d = state.d();
    const double d_prime = state.d_prime();
    const double big_d =
        1.0 + static_cast<double>(state.t()) * constants.c_phi / (state.lambda() * d);
    const double noise =
        constants.c_psi_prime *
        std::sqrt(2.0 * d_prime * std::log(1.0 / delta) + d_prime * d * std::log(big_d));
    return noise + std::sqrt(state.lambda()) * w_distance;
}

double assumption_w_distance(const Matrix& w, const RegularityConstants& constants) {
    return w.norm() + std::sqrt(constants.c_m * static_cast<double>(w.rows()));
}

std::string RidgeState::to_json() const {
    json j;
    j["d"] = d_;
    j["d_prime"] = d_prime_;
    j["lambda"] = lambda_;
    j["t"] = t_;
    j["kpsi_inv"] = matrix_to_json(kpsi_inv_);
    j["bias_w"] = matrix_to_json(bias_w_);
    j["v"] = matrix_to_json(v_);
    j["cross"] = matrix_to_json(cross_);
    return j.dump(2);
}

RidgeState RidgeState::from_json(const std::string& text) {
    const json j = json::parse(text);
    RidgeState state(j.at("d").get<int>(), j.at("d_prime").get<int>(), j.at("lambda").get<double>(),
                     matrix_from_json(j.at("kpsi_inv")), matrix_from_json(j.at("bias_w")));
    state.v_ = matrix_from_json(j.at("v"));
    state.cross_ = matrix_from_json(j.at("cross"));
    state.t_ = j.at("t").get<long>();
    state.v_lambda_inv_ = state.v_lambda().ldlt().solve(Matrix::Identity(state.d_, state.d_));
    return state;
}

}  // namespace bucmrl
