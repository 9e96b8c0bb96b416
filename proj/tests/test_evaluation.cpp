#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bucmrl/evaluation.hpp"

using namespace bucmrl;

namespace {

Features simplex_features(int d, int S, int A, std::uint64_t seed) {
    Rng rng(seed);
    Matrix phi(S * A, d);
    for (int i = 0; i < S * A; ++i)
        phi.row(i) = rng.dirichlet(Vector::Constant(d, 0.5)).transpose();
    return Features(std::move(phi), Matrix::Identity(S, S), S, A);
}

LinearMdp goal_mdp(std::uint64_t seed) {
    const auto f = simplex_features(3, 4, 2, seed);
    Rng rng(seed + 1);
    Matrix m(3, 4);
    for (int i = 0; i < 3; ++i) m.row(i) = rng.dirichlet(Vector::Constant(4, 0.7)).transpose();
    std::vector<double> reward(8, 0.0);
    reward[6] = 1.0;
    reward[7] = 1.0;
    return LinearMdp(f, TransitionCore(std::move(m)), reward, 3, 0);
}

RunRecord sample_run(const LinearMdp& mdp, int episodes, std::uint64_t seed) {
    TaskOptions opts;
    opts.episodes = episodes;
    Rng rng(seed);
    return run_task(mdp, Matrix::Zero(3, 4), opts, rng);
}

}  // namespace

TEST_CASE("regret bound hand value at unit scale") {
    RegularityConstants constants;
    constants.c_phi = 1.0;
    constants.c_psi = 1.0;
    constants.c_psi_prime = 1.0;
    // T = H = d = d' = 1, lambda = 1, w = 0:
    //   D = 2, beta = sqrt(log 2), sweep = 2 sqrt(5 ln 2),
    //   bound = 2 ln(2) sqrt(5).
    const auto report = regret_bound(constants, 1.0, 1, 1, 1, 1, 0.0, 1.0);
    CHECK(report.big_d == doctest::Approx(2.0));
    CHECK(report.c_phi_lambda == doctest::Approx(5.0));
    CHECK(report.bound == doctest::Approx(2.0 * std::log(2.0) * std::sqrt(5.0)));
    CHECK(report.slack_ratio == doctest::Approx(report.bound));
}

TEST_CASE("regret bound is monotone in the bias distance") {
    RegularityConstants constants;
    constants.c_phi = 1.5;
    constants.c_psi = 2.0;
    constants.c_psi_prime = 1.2;
    const auto near = regret_bound(constants, 0.5, 300, 3, 4, 4, 0.1);
    const auto far = regret_bound(constants, 0.5, 300, 3, 4, 4, 2.0);
    CHECK(far.bound > near.bound);
    CHECK(far.sweep_term == doctest::Approx(near.sweep_term));  // w only enters beta
}

TEST_CASE("mtr bound forms") {
    RegularityConstants constants;
    constants.c_phi = 1.0;
    constants.c_psi = 2.0;
    constants.c_psi_prime = 1.0;
    const auto out = mtr_bound(constants, 1.0, 200, 3, 4, 4, 0.04, 0.2);
    CHECK(out.tighter == doctest::Approx(std::min(out.mad_form, out.var_form)));
    CHECK(out.mad_form > 0.0);
    CHECK(out.var_form > 0.0);
    CHECK(out.dvar_form > 0.0);
    // Var 0.04 => sqrt = 0.2 = mad: the two tails coincide.
    CHECK(out.mad_form == doctest::Approx(out.var_form));
}

TEST_CASE("trajectory log shape") {
    const auto mdp = goal_mdp(1);
    const auto rec = sample_run(mdp, 6, 2);
    const auto log = trajectory_log(rec, mdp);
    CHECK(log.horizon() == 3);
    CHECK(log.total_steps() == 18);
    CHECK(log.lambda == rec.lambda);
    for (const auto& ep : log.phis)
        for (const auto& phi : ep) CHECK(phi.size() == 3);
}

TEST_CASE("lemma checkers hold on agent trajectories") {
    const auto mdp = goal_mdp(3);
    const auto constants = compute_regularity_constants(mdp.features(), mdp.core());
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto log = trajectory_log(sample_run(mdp, 25, seed), mdp);
        CHECK(check_log_det_lemma(log, constants.c_phi).holds);
        CHECK(check_elliptical_potential(log, constants.c_phi).holds);
        CHECK(check_stale_feature_lemma(log, constants.c_phi).holds);
    }
}

TEST_CASE("elliptical potential on a single unit feature is exact") {
    TrajectoryLog log;
    log.lambda = 1.0;
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    log.phis = {{e1}};
    const auto check = check_elliptical_potential(log, 1.0);
    // phi^T (lambda I)^{-1} phi = 1 at lambda = 1.
    CHECK(check.lhs == doctest::Approx(1.0));
    CHECK(check.rhs == doctest::Approx(4.0 * std::log(1.5)));
    CHECK(check.holds);
}

TEST_CASE("stale feature checker uses per-episode-frozen matrices") {
    TrajectoryLog log;
    log.lambda = 1.0;
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    // Two episodes of the same feature twice: the second episode sees the
    // first episode's data but not its own.
    log.phis = {{e1, e1}, {e1, e1}};
    const auto check = check_stale_feature_lemma(log, 1.0);
    // Episode 1: V = I, both steps weight 1. Episode 2: V = I + 2 e1 e1^T,
    // both steps weight 1/3.
    CHECK(check.lhs == doctest::Approx(2.0 + 2.0 / 3.0));
    CHECK(check.rhs == doctest::Approx(2.0 * 2.0 * 2.0 * std::log(1.0 + 4.0 / 2.0)));
    CHECK(check.holds);
}

TEST_CASE("log det checker on a deterministic stream") {
    TrajectoryLog log;
    log.lambda = 2.0;
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    log.phis = {{e1}, {e1}};
    const auto check = check_log_det_lemma(log, 1.0);
    // lhs: episode 1 uses V = 2I -> 1/sqrt(2); episode 2 uses V = 2I + e1e1 ->
    // 1/sqrt(3). rhs steps use the same matrices doubled, plus the residue.
    CHECK(check.lhs == doctest::Approx(1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0)));
    const double residue = (1.0 / 2.0) * 2.0 * std::log(1.0 + 2.0 * 1.0 / (2.0 * 2.0));
    CHECK(check.rhs ==
          doctest::Approx(2.0 / std::sqrt(2.0) + 2.0 / std::sqrt(3.0) + residue));
    CHECK(check.holds);
}

TEST_CASE("checkers reject empty logs") {
    TrajectoryLog log;
    log.lambda = 1.0;
    CHECK_THROWS_AS(check_log_det_lemma(log, 1.0), IncompleteLog);
    CHECK_THROWS_AS(check_elliptical_potential(log, 1.0), IncompleteLog);
    CHECK_THROWS_AS(check_stale_feature_lemma(log, 1.0), IncompleteLog);
}

TEST_CASE("transfer regret summary statistics") {
    RunRecord a;
    a.cumulative_regret = 2.0;
    RunRecord b;
    b.cumulative_regret = 4.0;
    RunRecord c;
    c.cumulative_regret = 6.0;
    const auto summary = transfer_regret({a, b, c});
    CHECK(summary.count == 3);
    CHECK(summary.mean == doctest::Approx(4.0));
    CHECK(summary.stderr_ == doctest::Approx(2.0 / std::sqrt(3.0)));
    CHECK_THROWS(transfer_regret({}));
}

TEST_CASE("regret bound dominates observed regret on real runs") {
    const auto mdp = goal_mdp(5);
    const auto constants = compute_regularity_constants(mdp.features(), mdp.core());
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        const auto rec = sample_run(mdp, 50, seed);
        const auto report =
            regret_bound(constants, rec.lambda, 150, 3, 3, 4, mdp.core().m.norm(),
                         rec.cumulative_regret);
        CHECK(report.bound >= rec.cumulative_regret);
    }
}
