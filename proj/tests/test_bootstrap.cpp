#include "support.hpp"

#include <gsc/bootstrap.hpp>
#include <gsc/errors.hpp>
#include <gsc/estimate.hpp>
#include <gsc/simdata.hpp>

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace gsc;
using namespace gsc::test;

namespace {

std::vector<double> as_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("bootstrap weights are reproducible N(1,1) draws") {
    const Vector a = bootstrap_weights(20000, 3, 7);
    CHECK(a == bootstrap_weights(20000, 3, 7));
    CHECK(a != bootstrap_weights(20000, 3, 8));
    CHECK(a != bootstrap_weights(20000, 4, 7));
    CHECK(std::abs(a.mean() - 1.0) < 4.0 / std::sqrt(20000.0));
    const double var = (a.array() - a.mean()).square().mean();
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("unit weights reproduce fit_erm") {
    const auto p = make_process(ProcessKind::logistic_wellspec, 3);
    const Dataset data = generate(p, 300, 1);
    const auto model = default_model(p).declared_for(data);
    const auto fit = fit_erm(model, data);
    const std::vector<double> ones(300, 1.0);
    const auto boot = bootstrap_fit(model, data, ones);
    CHECK(boot.theta_n == fit.theta_n);
    CHECK(boot.iterations == fit.iterations);
    // Both bootstrap statistics vanish.
    const double wald = (boot.theta_n - fit.theta_n).dot(boot.aggregates_at_opt.H_n * (boot.theta_n - fit.theta_n));
    const double lr = 2.0 * (aggregates(model, data, fit.theta_n, kValue, ones).L_n - boot.aggregates_at_opt.L_n);
    CHECK(std::abs(wald) <= 1e-10);
    CHECK(std::abs(lr) <= 1e-10);
}

TEST_CASE("weighted least squares matches the weighted normal equations") {
    const auto p = make_process(ProcessKind::linear_misspec_t, 3);
    const Dataset data = generate(p, 200, 2);
    const Vector w = bootstrap_weights(200, 9, 0);
    const auto boot = bootstrap_fit(LossModel::squared(3), data, as_vec(w));
    const Matrix& X = data.features();
    const Vector expected = (X.transpose() * w.asDiagonal() * X).ldlt().solve(X.transpose() * w.asDiagonal() * *data.response());
    CHECK((boot.theta_n - expected).norm() <= 1e-10 * (1 + expected.norm()));
    CHECK(boot.theta_n == bootstrap_fit(LossModel::squared(3), data, as_vec(w)).theta_n);
}

TEST_CASE("non-convex weighted problems are reported") {
    // Mostly negative weights make the weighted squared loss concave.
    const Dataset data = make_dataset({{1.0, 0.0, 1.0}, {0.0, 1.0, 2.0}, {1.0, 1.0, 0.5}}, true);
    const std::vector<double> w{-1.0, -1.0, -1.0};
    CHECK_THROWS_AS(bootstrap_fit(LossModel::squared(2), data, w), SingularHessian);
}

TEST_CASE("degenerate data gives a zero quantile") {
    RowMatrix X = RowMatrix::Ones(50, 1);
    const Dataset data(X, Vector::Constant(50, 2.0));
    const auto model = LossModel::squared(1);
    const auto fit = fit_erm(model, data);
    BootstrapConfig cfg;
    cfg.B = 200;
    cfg.seed = 1;
    const auto reps = bootstrap_replicates(model, data, fit, cfg);
    for (double t : reps.wald) CHECK(std::abs(t) <= 1e-20);
    CHECK(bootstrap_quantile(model, data, fit, cfg, StatisticKind::wald).quantile <= 1e-20);
    CHECK(bootstrap_quantile(model, data, fit, cfg, StatisticKind::lr).quantile <= 1e-12);
}

TEST_CASE("Wald and LR bootstrap quantiles agree for least squares") {
    const auto p = make_process(ProcessKind::linear_wellspec, 4);
    const Dataset data = generate(p, 100, 3);
    const auto model = LossModel::squared(4);
    const auto fit = fit_erm(model, data);
    BootstrapConfig cfg;
    cfg.B = 500;
    cfg.seed = 2;
    const double w = bootstrap_quantile(model, data, fit, cfg, StatisticKind::wald).quantile;
    const double l = bootstrap_quantile(model, data, fit, cfg, StatisticKind::lr).quantile;
    CHECK(std::abs(w - l) <= 0.02 * w);
}

TEST_CASE("bootstrap quantile is stable in B") {
    const auto p = make_process(ProcessKind::logistic_wellspec, 3);
    const Dataset data = generate(p, 200, 4);
    const auto model = default_model(p).declared_for(data);
    const auto fit = fit_erm(model, data);
    BootstrapConfig cfg;
    cfg.seed = 6;
    cfg.B = 2000;
    const auto q2 = bootstrap_quantile(model, data, fit, cfg, StatisticKind::wald);
    cfg.B = 4000;
    const auto q4 = bootstrap_quantile(model, data, fit, cfg, StatisticKind::wald);
    CHECK(std::abs(q2.quantile - q4.quantile) < 0.05 * q4.quantile);
    CHECK(q4.n_used + q4.n_failed == 4000);
}

TEST_CASE("replicates do not depend on execution mode") {
    const auto p = make_process(ProcessKind::poisson_wellspec, 3);
    const Dataset data = generate(p, 150, 8);
    const auto model = default_model(p).declared_for(data);
    const auto fit = fit_erm(model, data);
    BootstrapConfig cfg;
    cfg.B = 150;
    cfg.seed = 10;
    cfg.exec = Execution::serial;
    const auto a = bootstrap_replicates(model, data, fit, cfg);
    cfg.exec = Execution::parallel;
    const auto b = bootstrap_replicates(model, data, fit, cfg);
    CHECK(a.wald == b.wald);
    CHECK(a.lr == b.lr);
}

TEST_CASE("too many failed replications") {
    // Five points with clashing labels: a minimizer exists, but a negative
    // weight on one of a clashing pair leaves the weighted fit unbounded.
    const Dataset data =
        make_dataset({{1.0, 0.0, 1.0}, {1.0, 0.0, -1.0}, {0.0, 1.0, 1.0}, {0.0, 1.0, -1.0}, {1.0, 1.0, 1.0}}, true);
    const auto model = LossModel::logistic(2, 0.0).declared_for(data);
    const auto fit = fit_erm(model, data);
    REQUIRE(fit.converged);
    BootstrapConfig cfg;
    cfg.B = 200;
    cfg.seed = 3;
    const auto reps = bootstrap_replicates(model, data, fit, cfg);
    CHECK(reps.n_failed > 20);
    CHECK_THROWS_AS(bootstrap_quantile(model, data, fit, cfg, StatisticKind::wald), TooManyFailures);
}

TEST_CASE("config validation") {
    BootstrapConfig cfg;
    cfg.delta = 1.0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.B = 0;
    CHECK_THROWS(cfg.validate());
    for (auto m : {CoverageMethod::oracle, CoverageMethod::bootwald, CoverageMethod::bootlr})
        CHECK(coverage_method_from_string(to_string(m)) == m);
    for (auto k : {StatisticKind::wald, StatisticKind::lr}) CHECK(statistic_kind_from_string(to_string(k)) == k);
}

TEST_CASE("small coverage experiment is deterministic and sensible") {
    CoverageConfig cfg;
    cfg.label = "ls";
    cfg.process = make_process(ProcessKind::linear_wellspec, 3);
    cfg.n = 100;
    cfg.levels = {0.9};
    cfg.reps = 120;
    cfg.B = 200;
    cfg.calibration_reps = 200;
    cfg.seed = 4;
    const auto cells = coverage_experiment(cfg);
    REQUIRE(cells.size() == 3);
    for (const auto& c : cells) {
        CHECK(c.model == "ls");
        CHECK(c.level == 0.9);
        CHECK(c.coverage > 0.8);
        CHECK(c.coverage <= 1.0);
        CHECK(c.stderr_ == doctest::Approx(std::sqrt(c.coverage * (1 - c.coverage) / c.reps)));
    }
    cfg.exec = Execution::serial;
    const auto again = coverage_experiment(cfg);
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(again[i].coverage == cells[i].coverage);
}
