#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bucmrl/meta_learner.hpp"

using namespace bucmrl;

namespace {

Features simplex_features(int d, int S, int A, std::uint64_t seed) {
    Rng rng(seed);
    Matrix phi(S * A, d);
    for (int i = 0; i < S * A; ++i)
        phi.row(i) = rng.dirichlet(Vector::Constant(d, 0.5)).transpose();
    return Features(std::move(phi), Matrix::Identity(S, S), S, A);
}

TransitionCore stochastic_core(int d, int S, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(d, S);
    for (int i = 0; i < d; ++i) m.row(i) = rng.dirichlet(Vector::Constant(S, 0.7)).transpose();
    return TransitionCore(std::move(m));
}

TaskFamily test_family(std::uint64_t seed, double kappa) {
    const auto f = simplex_features(3, 4, 2, seed);
    std::vector<double> reward(8, 0.0);
    reward[6] = 1.0;
    reward[7] = 1.0;
    return TaskFamily::anchor_dirichlet(f, reward, 3, 0, stochastic_core(3, 4, seed + 1), kappa);
}

}  // namespace

TEST_CASE("low bias average is the Z-normalized weighted sum") {
    Matrix a = Matrix::Constant(2, 2, 1.0);
    Matrix b = Matrix::Constant(2, 2, 3.0);
    Matrix current = Matrix::Constant(2, 2, 5.0);

    // Z = 10*2 + 5: w = (10 a + 10 b + 5 current) / 25.
    const Matrix w = low_bias_w({a, b}, current, 10, 5);
    CHECK((w - Matrix::Constant(2, 2, (10.0 + 30.0 + 25.0) / 25.0)).norm() < 1e-14);

    // No current-task steps: plain average of history.
    const Matrix w2 = low_bias_w({a, b}, Matrix::Zero(2, 2), 10, 0);
    CHECK((w2 - Matrix::Constant(2, 2, 2.0)).norm() < 1e-14);

    CHECK_THROWS_AS(low_bias_w({}, current, 10, 0), EmptyHistory);
}

TEST_CASE("global ridge pool matches a direct pooled solve") {
    const auto f = simplex_features(3, 4, 2, 1);
    GlobalRidgePool pool(3, 4, f.kpsi_inv());
    Rng rng(2);
    Matrix v = Matrix::Zero(3, 3);
    Matrix cross = Matrix::Zero(3, 4);
    for (int i = 0; i < 70; ++i) {
        const int s = static_cast<int>(rng.next_u64() % 4);
        const int a = static_cast<int>(rng.next_u64() % 2);
        const int nxt = static_cast<int>(rng.next_u64() % 4);
        const Vector phi = f.phi_row(s, a);
        const Vector psi = f.psi_row(nxt);
        pool.add_transition(phi, psi);
        v += phi * phi.transpose();
        cross += phi * (f.kpsi_inv() * psi).transpose();
        if (i % 25 == 24) pool.end_task();
    }
    CHECK(pool.t() == 70);
    const double lambda = 0.3;
    const Matrix direct = (lambda * Matrix::Identity(3, 3) + v).inverse() * cross;
    CHECK((pool.solve(lambda) - direct).norm() < 1e-10);
    CHECK((pool.v_tilde() - v).norm() < 1e-12);
    CHECK(pool.per_task_v().size() == 2);  // two completed task boundaries
    CHECK(pool.lambda_min() >= 0.0);
}

TEST_CASE("lambda schedule with variance floor") {
    CHECK(lambda_schedule(0.5, 100) == doctest::Approx(1.0 / 50.0));
    CHECK(lambda_schedule(0.0, 100) == doctest::Approx(1.0 / (100.0 * 1e-6)));
    CHECK_THROWS(lambda_schedule(0.5, 0));
}

TEST_CASE("meta_train is deterministic in the seed") {
    const auto family = test_family(10, 100.0);
    MetaOptions opts;
    opts.g_train = 3;
    opts.g_test = 2;
    opts.episodes = 8;
    const auto a = meta_train(family, EstimatorKind::LowBiasAverage, opts, 42);
    const auto b = meta_train(family, EstimatorKind::LowBiasAverage, opts, 42);
    CHECK(a.transfer_regret == b.transfer_regret);
    CHECK((a.final_w - b.final_w).norm() == 0.0);
    const auto c = meta_train(family, EstimatorKind::LowBiasAverage, opts, 43);
    CHECK(a.transfer_regret != c.transfer_regret);
}

TEST_CASE("zero estimator keeps a zero bias and fixed lambda") {
    const auto family = test_family(20, 100.0);
    MetaOptions opts;
    opts.g_train = 2;
    opts.g_test = 2;
    opts.episodes = 6;
    opts.lambda = 1.0;
    const auto record = meta_train(family, EstimatorKind::Zero, opts, 1);
    CHECK(record.final_w.norm() == 0.0);
    REQUIRE(record.train_records.size() == 2);
    REQUIRE(record.test_records.size() == 2);
    for (const auto& diag : record.train_diagnostics) CHECK(diag.lambda_used == 1.0);
}

TEST_CASE("oracle estimator pins the bias at the family mean") {
    const auto family = test_family(30, 100.0);
    MetaOptions opts;
    opts.g_train = 2;
    opts.g_test = 1;
    opts.episodes = 5;
    const auto record = meta_train(family, EstimatorKind::Oracle, opts, 2);
    CHECK((record.final_w - family.mean_core().m).norm() < 1e-14);
    // Schedule lambda from exact family stats, identical across tasks.
    CHECK(record.train_diagnostics[0].lambda_used ==
          doctest::Approx(record.train_diagnostics[1].lambda_used));
}

TEST_CASE("learned bias approaches the anchor on a tight family") {
    const auto family = test_family(40, 500.0);
    MetaOptions opts;
    opts.g_train = 10;
    opts.g_test = 1;
    opts.episodes = 40;
    const Matrix anchor = family.mean_core().m;
    for (auto kind : {EstimatorKind::LowBiasAverage, EstimatorKind::GlobalRidge}) {
        const auto record = meta_train(family, kind, opts, 3);
        // Much closer to the anchor than the zero matrix is.
        CHECK((record.final_w - anchor).norm() < 0.4 * anchor.norm());
        CHECK(record.var_estimate > 0.0);
    }
}

TEST_CASE("global ridge reports the pooled minimum eigenvalue") {
    const auto family = test_family(50, 100.0);
    MetaOptions opts;
    opts.g_train = 4;
    opts.g_test = 1;
    opts.episodes = 10;
    const auto record = meta_train(family, EstimatorKind::GlobalRidge, opts, 4);
    CHECK(record.nu_min > 0.0);
    const auto zero = meta_train(family, EstimatorKind::Zero, opts, 4);
    CHECK(zero.nu_min == 0.0);
}

TEST_CASE("no training tasks leaves the learned estimators unbiased") {
    const auto family = test_family(60, 100.0);
    MetaOptions opts;
    opts.g_train = 0;
    opts.g_test = 2;
    opts.episodes = 5;
    const auto record = meta_train(family, EstimatorKind::LowBiasAverage, opts, 5);
    CHECK(record.final_w.norm() == 0.0);
    CHECK(record.train_records.empty());
    CHECK(record.test_records.size() == 2);
}

TEST_CASE("continual mode changes the test phase") {
    const auto family = test_family(70, 100.0);
    MetaOptions opts;
    opts.g_train = 2;
    opts.g_test = 4;
    opts.episodes = 10;
    const auto frozen = meta_train(family, EstimatorKind::LowBiasAverage, opts, 6);
    MetaOptions continual = opts;
    continual.continual = true;
    const auto live = meta_train(family, EstimatorKind::LowBiasAverage, continual, 6);
    // The live estimator keeps updating W through the test tasks, which moves
    // the core estimate even when the realized trajectories coincide.
    bool any_difference = false;
    for (std::size_t g = 0; g < frozen.test_records.size(); ++g)
        for (std::size_t n = 1; n < frozen.test_records[g].episodes.size(); ++n)
            any_difference = any_difference ||
                             frozen.test_records[g].episodes[n].core_error !=
                                 live.test_records[g].episodes[n].core_error;
    CHECK(any_difference);
}

TEST_CASE("estimation diagnostics track the observed-core average") {
    const auto family = test_family(80, 100.0);
    MetaOptions opts;
    opts.g_train = 5;
    opts.g_test = 1;
    opts.episodes = 8;
    const auto record = meta_train(family, EstimatorKind::LowBiasAverage, opts, 7);
    const auto diag = estimation_diagnostics(record, family);
    REQUIRE(diag.epsilon_per_task.size() == 5);
    REQUIRE(diag.h_script_per_task.size() == 5);
    for (std::size_t g = 0; g < 5; ++g)
        CHECK(diag.h_script_per_task[g] ==
              doctest::Approx(record.train_diagnostics[g].h_script));
    CHECK(diag.final_epsilon ==
          doctest::Approx((family.mean_core().m - record.final_w).squaredNorm()));
}

TEST_CASE("transfer regret summary matches its per-task parts") {
    const auto family = test_family(90, 100.0);
    MetaOptions opts;
    opts.g_train = 1;
    opts.g_test = 5;
    opts.episodes = 6;
    const auto record = meta_train(family, EstimatorKind::Zero, opts, 8);
    double sum = 0.0;
    for (const auto& run : record.test_records) sum += run.cumulative_regret;
    CHECK(record.transfer_regret == doctest::Approx(sum / 5.0));
    CHECK(record.transfer_regret_stderr >= 0.0);
}
