#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bucmrl/core_regression.hpp"

using namespace bucmrl;

namespace {

struct Sample {
    Vector phi;
    Vector psi;
};

Features simplex_features(int d, int S, int A, std::uint64_t seed) {
    Rng rng(seed);
    Matrix phi(S * A, d);
    for (int i = 0; i < S * A; ++i)
        phi.row(i) = rng.dirichlet(Vector::Constant(d, 0.5)).transpose();
    return Features(std::move(phi), Matrix::Identity(S, S), S, A);
}

std::vector<Sample> random_samples(const Features& f, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (int i = 0; i < n; ++i) {
        const int s = static_cast<int>(rng.next_u64() % f.num_states());
        const int a = static_cast<int>(rng.next_u64() % f.num_actions());
        const int nxt = static_cast<int>(rng.next_u64() % f.num_states());
        out.push_back({f.phi_row(s, a), f.psi_row(nxt)});
    }
    return out;
}

// Direct biased ridge from the normal equations, the independent oracle.
Matrix direct_solve(const std::vector<Sample>& data, const Features& f, double lambda,
                    const Matrix& w) {
    const int d = f.d();
    Matrix v = lambda * Matrix::Identity(d, d);
    Matrix cross = Matrix::Zero(d, f.d_prime());
    for (const auto& s : data) {
        v += s.phi * s.phi.transpose();
        cross += s.phi * ((f.kpsi_inv() * s.psi).transpose() - s.phi.transpose() * w);
    }
    return w + v.inverse() * cross;
}

}  // namespace

TEST_CASE("empty state solves to the bias") {
    const auto f = simplex_features(3, 4, 2, 1);
    Matrix w = Matrix::Random(3, 4);
    RidgeState state(3, 4, 0.7, f.kpsi_inv(), w);
    CHECK((state.solve() - w).norm() == 0.0);
    CHECK(state.t() == 0);
}

TEST_CASE("recursive solution matches the direct normal equations") {
    const auto f = simplex_features(3, 4, 2, 2);
    const auto data = random_samples(f, 120, 3);
    Matrix w = Matrix::Random(3, 4) * 0.3;
    RidgeState state(3, 4, 0.5, f.kpsi_inv(), w);
    for (const auto& s : data) state.update(s.phi, s.psi);
    CHECK((state.solve() - direct_solve(data, f, 0.5, w)).norm() < 1e-9);
}

TEST_CASE("sherman-morrison inverse stays accurate across the refresh period") {
    const auto f = simplex_features(3, 4, 2, 4);
    const auto data = random_samples(f, 1250, 5);  // crosses two 500-step refreshes
    RidgeState state(3, 4, 1.0, f.kpsi_inv());
    for (const auto& s : data) state.update(s.phi, s.psi);
    const Matrix direct = state.v_lambda().inverse();
    CHECK((state.v_lambda_inv() - direct).norm() < 1e-9);
    CHECK((state.solve() - direct_solve(data, f, 1.0, Matrix::Zero(3, 4))).norm() < 1e-9);
}

TEST_CASE("bias can change after data without replay") {
    const auto f = simplex_features(3, 4, 2, 6);
    const auto data = random_samples(f, 80, 7);
    Matrix w1 = Matrix::Random(3, 4) * 0.2;
    Matrix w2 = Matrix::Random(3, 4) * 0.2;

    RidgeState state(3, 4, 0.9, f.kpsi_inv(), w1);
    for (const auto& s : data) state.update(s.phi, s.psi);
    state.set_bias_w(w2);

    RidgeState fresh(3, 4, 0.9, f.kpsi_inv(), w2);
    for (const auto& s : data) fresh.update(s.phi, s.psi);
    CHECK((state.solve() - fresh.solve()).norm() < 1e-10);
    CHECK((state.solve() - direct_solve(data, f, 0.9, w2)).norm() < 1e-9);
}

TEST_CASE("large lambda pins the estimate to the bias") {
    const auto f = simplex_features(3, 4, 2, 8);
    const auto data = random_samples(f, 100, 9);
    Matrix w = Matrix::Random(3, 4) * 0.5;
    RidgeState state(3, 4, 1e9, f.kpsi_inv(), w);
    for (const auto& s : data) state.update(s.phi, s.psi);
    CHECK((state.solve() - w).norm() < 1e-5);
}

TEST_CASE("cross moments relate by the bias identity") {
    const auto f = simplex_features(3, 4, 2, 10);
    const auto data = random_samples(f, 40, 11);
    Matrix w = Matrix::Random(3, 4) * 0.3;
    RidgeState state(3, 4, 1.0, f.kpsi_inv(), w);
    for (const auto& s : data) state.update(s.phi, s.psi);
    CHECK((state.cross_biased() - (state.cross_unbiased() - state.v() * state.bias_w())).norm() ==
          0.0);
}

TEST_CASE("lambda_min grows with data") {
    const auto f = simplex_features(3, 4, 2, 12);
    RidgeState state(3, 4, 0.25, f.kpsi_inv());
    CHECK(state.lambda_min_v_lambda() == doctest::Approx(0.25));
    for (const auto& s : random_samples(f, 200, 13)) state.update(s.phi, s.psi);
    CHECK(state.lambda_min_v_lambda() > 0.25);
}

TEST_CASE("ellipsoid radius formula and validation") {
    const auto f = simplex_features(2, 3, 2, 14);
    RegularityConstants constants;
    constants.c_phi = 1.0;
    constants.c_psi_prime = 2.0;
    constants.c_m = 0.5;
    RidgeState state(2, 3, 4.0, f.kpsi_inv());

    // t = 0: D = 1, radius = c_psi' sqrt(2 d' log(1/delta)) + sqrt(lambda) w.
    const double r0 = ellipsoid_radius(state, 0.1, constants, 1.5);
    CHECK(r0 == doctest::Approx(2.0 * std::sqrt(2.0 * 3.0 * std::log(10.0)) + 2.0 * 1.5));

    state.update(f.phi_row(0, 0), f.psi_row(1));
    const double big_d = 1.0 + 1.0 * constants.c_phi / (4.0 * 2.0);
    const double expected =
        2.0 * std::sqrt(2.0 * 3.0 * std::log(10.0) + 3.0 * 2.0 * std::log(big_d)) + 2.0 * 1.5;
    CHECK(ellipsoid_radius(state, 0.1, constants, 1.5) == doctest::Approx(expected));

    CHECK_THROWS_AS(ellipsoid_radius(state, 0.0, constants, 1.0), InvalidDelta);
    CHECK_THROWS_AS(ellipsoid_radius(state, 1.0, constants, 1.0), InvalidDelta);
    // Radius shrinks as delta grows.
    CHECK(ellipsoid_radius(state, 0.5, constants, 0.0) <
          ellipsoid_radius(state, 0.01, constants, 0.0));
}

TEST_CASE("assumption bound distance") {
    RegularityConstants constants;
    constants.c_m = 0.25;
    Matrix w = Matrix::Zero(4, 3);
    CHECK(assumption_w_distance(w, constants) == doctest::Approx(1.0));  // sqrt(0.25 * 4)
    w(0, 0) = 3.0;
    CHECK(assumption_w_distance(w, constants) == doctest::Approx(4.0));
}

TEST_CASE("ellipsoid membership predicate") {
    ConfidenceEllipsoid e;
    e.center = Matrix::Zero(2, 2);
    e.radius = 1.0;
    Matrix inside = Matrix::Constant(2, 2, 0.4);
    Matrix outside = Matrix::Constant(2, 2, 0.6);
    CHECK(e.contains(inside));
    CHECK_FALSE(e.contains(outside));
}

TEST_CASE("json round trip preserves the solve") {
    const auto f = simplex_features(3, 4, 2, 20);
    Matrix w = Matrix::Random(3, 4) * 0.1;
    RidgeState state(3, 4, 0.6, f.kpsi_inv(), w);
    for (const auto& s : random_samples(f, 60, 21)) state.update(s.phi, s.psi);
    const RidgeState again = RidgeState::from_json(state.to_json());
    CHECK(again.t() == state.t());
    CHECK((again.solve() - state.solve()).norm() < 1e-12);
}

TEST_CASE("constructor validation") {
    CHECK_THROWS(RidgeState(2, 3, 0.0, Matrix::Identity(3, 3)));
    CHECK_THROWS_AS(RidgeState(2, 3, 1.0, Matrix::Identity(2, 2)), DimensionMismatch);
    CHECK_THROWS_AS(RidgeState(2, 3, 1.0, Matrix::Identity(3, 3), Matrix::Zero(3, 3)),
                    DimensionMismatch);
}
