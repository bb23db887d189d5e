#include "support.hpp"

#include <gsc/errors.hpp>
#include <gsc/estimate.hpp>
#include <gsc/inference.hpp>
#include <gsc/simdata.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace gsc;
using namespace gsc::test;

namespace {

FitResult fake_fit(const Matrix& H, const Matrix& G, const Vector& theta) {
    FitResult fit;
    fit.theta_n = theta;
    fit.aggregates_at_opt.H_n = H;
    fit.aggregates_at_opt.G_n = G;
    fit.aggregates_at_opt.S_n = Vector::Zero(theta.size());
    fit.aggregates_at_opt.n = 100;
    fit.converged = true;
    return fit;
}

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("empirical effective dimension examples") {
    CHECK(effective_dim_empirical(fake_fit(diag2(1, 2), diag2(2, 2), Vector::Zero(2))).value == doctest::Approx(3.0));
    Matrix H(3, 3);
    H << 2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5;
    const auto r = effective_dim_empirical(fake_fit(H, H, Vector::Zero(3)));
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.kind == EffDimKind::empirical);
    CHECK_FALSE(r.mc_stderr.has_value());
    CHECK_THROWS_AS(effective_dim_empirical(fake_fit(diag2(1, 0), diag2(1, 1), Vector::Zero(2))), SingularHessian);
}

TEST_CASE("empirical effective dimension is affine invariant") {
    const auto process = make_process(ProcessKind::linear_misspec_t, 3);
    const Dataset data = generate(process, 500, 21);
    Matrix A(3, 3);
    A << 2.0, 0.5, 0.0, 0.0, 1.0, -0.4, 0.3, 0.0, 0.7;
    const Dataset moved(RowMatrix(data.features() * A.transpose()), data.response());
    const double a = effective_dim_empirical(fit_erm(LossModel::squared(3), data)).value;
    const double b = effective_dim_empirical(fit_erm(LossModel::squared(3), moved)).value;
    CHECK(rel_err(a, b) <= 1e-8);
}

TEST_CASE("spectral effective dimension") {
    const int d = 50;
    Vector g(d), h(d);
    for (int i = 1; i <= d; ++i) g(i - 1) = h(i - 1) = std::pow(i, -1.5);
    CHECK(effective_dim_spectrum(g, h) == doctest::Approx(50.0).epsilon(1e-14));

    double oracle = 0.0;
    for (int i = 1; i <= d; ++i) {
        g(i - 1) = std::exp(-static_cast<double>(i));
        h(i - 1) = 1.0 / i;
        oracle += i * std::exp(-static_cast<double>(i));
    }
    CHECK(std::abs(effective_dim_spectrum(g, h) - oracle) <= 1e-10);
    CHECK(effective_dim_spectrum(g, h) == doctest::Approx(0.92067).epsilon(1e-5));
    CHECK_THROWS_AS(effective_dim_spectrum(g, h.head(3)), DimensionMismatch);
    CHECK_THROWS(effective_dim_spectrum(-g, h));
}

TEST_CASE("oracle effective dimension") {
    const auto lin = make_process(ProcessKind::linear_wellspec, 5);
    const auto analytic = effective_dim_oracle(LossModel::squared(5), lin, lin.theta0, 100, 0);
    CHECK(analytic.value == 5.0);
    CHECK(analytic.kind == EffDimKind::oracle_analytic);

    const auto t = make_process(ProcessKind::linear_misspec_t, 5);
    const auto a = effective_dim_oracle(LossModel::squared(5), t, t.theta0, 20000, 1);
    const auto b = effective_dim_oracle(LossModel::squared(5), t, t.theta0, 20000, 2);
    REQUIRE(a.mc_stderr.has_value());
    REQUIRE(b.mc_stderr.has_value());
    CHECK(a.kind == EffDimKind::oracle_mc);
    const double se = std::hypot(*a.mc_stderr, *b.mc_stderr);
    CHECK(std::abs(a.value - b.value) <= 3.0 * se);
    CHECK_THROWS(effective_dim_oracle(LossModel::squared(5), t, t.theta0, 10, 1));
}

TEST_CASE("oracle effective dimension stderr scales like mc_n^{-1/2}") {
    // Averaged over seeds: the batch stderr is itself noisy with 10 batches.
    const auto t = make_process(ProcessKind::logistic_wellspec, 3);
    const auto model = default_model(t).declared_for(generate(t, 1000, 0));
    double small = 0.0, big = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        small += *effective_dim_oracle(model, t, t.theta0, 2000, 100 + s).mc_stderr;
        big += *effective_dim_oracle(model, t, t.theta0, 8000, 200 + s).mc_stderr;
    }
    const double ratio = small / big;
    CHECK(ratio >= 2.0 / 1.2);
    CHECK(ratio <= 2.0 * 1.2);
}

TEST_CASE("t_n bound") {
    AssumptionConstants c;
    c.K2 = 1.0;
    c.sigma_H = 1.0;
    CHECK(t_n_bound(0.05, c, 1000, 5) == doctest::Approx(0.11562).epsilon(1e-4));
    // t_n <= 1/2 exactly when n >= 4 (K2 + 2 sigma^2) times the same log term
    // t_n uses, log(4d/delta). With log(2d/delta) the implication fails.
    for (double sigma : {0.5, 1.0, 2.0}) {
        c.sigma_H = sigma;
        const double n_half = 4.0 * (c.K2 + 2.0 * sigma * sigma) * std::log(4.0 * 5 / 0.05);
        CHECK(t_n_bound(0.05, c, n_half * (1 + 1e-12), 5) <= 0.5);
        CHECK(t_n_bound(0.05, c, n_half * 0.99, 5) > 0.5);
    }
    c.sigma_H = 1.0;
    CHECK(t_n_bound(0.05, c, std::ceil(12.0 * std::log(2.0 * 5 / 0.05)), 5) > 0.5);
    const double ratio = t_n_bound(0.05, c, 4e8, 5) / t_n_bound(0.05, c, 1e8, 5);
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
    double prev = 1e300;
    for (double n = 10; n < 1e7; n *= 1.7) {
        const double v = t_n_bound(0.05, c, n, 5);
        CHECK(v < prev);
        prev = v;
    }
    for (int d = 1; d < 50; ++d) CHECK(t_n_bound(0.05, c, 1000, d + 1) > t_n_bound(0.05, c, 1000, d));
}

TEST_CASE("explicit Wald radius with C = 0") {
    const auto lin = make_process(ProcessKind::linear_misspec_t, 4);
    const Dataset data = generate(lin, 300, 5);
    const auto model = LossModel::squared(4);
    const auto fit = fit_erm(model, data);
    const auto eff = effective_dim_empirical(fit);
    RadiusOptions opts;
    opts.C = 0.0;
    const double r = wald_radius(model, data, fit, eff, 0.05, Calibration::explicit_constant, {}, opts);
    CHECK(r == doctest::Approx(24.0 * eff.value / 300.0).epsilon(1e-12));
    opts.C = 1.0;
    CHECK(wald_radius(model, data, fit, eff, 0.05, Calibration::explicit_constant, {}, opts) > r);
}

TEST_CASE("oracle calibration requires a process") {
    const auto lin = make_process(ProcessKind::linear_wellspec, 2);
    const Dataset data = generate(lin, 50, 5);
    const auto fit = fit_erm(LossModel::squared(2), data);
    const auto eff = effective_dim_empirical(fit);
    CHECK_THROWS_AS(wald_radius(LossModel::squared(2), data, fit, eff, 0.05, Calibration::oracle_mc), MissingSampler);
    CHECK_THROWS_AS(lr_radius(LossModel::squared(2), data, fit, eff, 0.05, Calibration::oracle_mc), MissingSampler);
}

TEST_CASE("oracle statistics do not depend on execution mode") {
    const auto p = make_process(ProcessKind::logistic_wellspec, 3);
    const auto model = default_model(p);
    const auto a = oracle_statistics(model, p, 200, 40, 7, {}, Execution::serial);
    const auto b = oracle_statistics(model, p, 200, 40, 7, {}, Execution::parallel);
    CHECK(a.wald == b.wald);
    CHECK(a.lr == b.lr);
    CHECK(a.n_failed == b.n_failed);
}

TEST_CASE("confidence set membership") {
    const FitResult fit = fake_fit(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Zero(2));
    const auto set = make_confidence_set(StatisticKind::wald, fit, 1.0, 0.05, Calibration::explicit_constant);
    const Dataset dummy = make_dataset({{0.0, 0.0, 0.0}}, true);
    Vector far(2);
    far << 2.0, 0.0;
    CHECK_FALSE(set_membership(set, fit, LossModel::squared(2), dummy, far));
    CHECK(set_membership(set, fit, LossModel::squared(2), dummy, fit.theta_n));
    CHECK_THROWS_AS(set_membership(set, fit, LossModel::squared(2), dummy, Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("center membership and Wald convexity on a real fit") {
    const auto p = make_process(ProcessKind::logistic_wellspec, 3);
    const Dataset data = generate(p, 400, 3);
    const auto model = default_model(p).declared_for(data);
    const auto fit = fit_erm(model, data);
    const auto wald = make_confidence_set(StatisticKind::wald, fit, 0.05, 0.05, Calibration::explicit_constant);
    const auto lr = make_confidence_set(StatisticKind::lr, fit, 0.05, 0.05, Calibration::explicit_constant);
    CHECK(set_membership(wald, fit, model, data, fit.theta_n));
    CHECK(set_membership(lr, fit, model, data, fit.theta_n));

    CounterRng rng(5, make_stream(StreamTag::test_support, 30));
    std::vector<Vector> members;
    while (members.size() < 40) {
        const Vector cand = fit.theta_n + random_normal(3, rng, 0.15);
        if (set_membership(wald, fit, model, data, cand)) members.push_back(cand);
    }
    for (std::size_t i = 0; i + 1 < members.size(); i += 2)
        CHECK(set_membership(wald, fit, model, data, 0.5 * (members[i] + members[i + 1])));
}

TEST_CASE("LR membership is invariant under affine reparameterization") {
    const auto p = make_process(ProcessKind::logistic_wellspec, 2);
    const Dataset data = generate(p, 300, 11);
    Matrix A(2, 2);
    A << 1.5, 0.4, -0.2, 0.9;
    const Dataset moved(RowMatrix(data.features() * A.transpose()), data.response());
    const auto m1 = default_model(p).declared_for(data);
    const auto m2 = default_model(p).declared_for(moved);
    const auto f1 = fit_erm(m1, data);
    const auto f2 = fit_erm(m2, moved);
    const auto s1 = make_confidence_set(StatisticKind::lr, f1, 0.03, 0.05, Calibration::explicit_constant);
    const auto s2 = make_confidence_set(StatisticKind::lr, f2, 0.03, 0.05, Calibration::explicit_constant);
    const Matrix AinvT = A.transpose().inverse();
    CounterRng rng(8, 0);
    int inside = 0;
    for (int k = 0; k < 200; ++k) {
        const Vector theta = f1.theta_n + random_normal(2, rng, 0.2);
        const double gap = 2.0 * (aggregates(m1, data, theta, kValue).L_n - f1.aggregates_at_opt.L_n);
        if (std::abs(gap - 0.03) < 1e-8) continue;  // too close to the boundary to compare
        const bool in1 = set_membership(s1, f1, m1, data, theta);
        CHECK(in1 == set_membership(s2, f2, m2, moved, AinvT * theta));
        inside += in1;
    }
    CHECK(inside > 0);
    CHECK(inside < 200);
}

TEST_CASE("critical sample size") {
    AssumptionConstants c;
    c.K1 = 1.0;
    const ScParams params{1.0, 2.0};
    const SpectralSummary spec{1.0, 3.0};
    const double delta = 1.0 / std::numbers::e;
    const auto br = critical_sample_branches(params, spec, c, 5.0, 5, delta);
    CHECK(br.localization == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(critical_sample_size(params, spec, c, 5.0, 5, delta) ==
          static_cast<std::size_t>(std::ceil(std::max(br.concentration, br.localization))));

    const auto br4 = critical_sample_branches(params, SpectralSummary{4.0, 12.0}, c, 5.0, 5, delta);
    CHECK(br4.localization == doctest::Approx(10.0).epsilon(1e-12));

    std::size_t prev = critical_sample_size(params, spec, c, 5.0, 5, 0.01);
    for (double d : {0.02, 0.05, 0.1, 0.3}) {
        const std::size_t v = critical_sample_size(params, spec, c, 5.0, 5, d);
        CHECK(v <= prev);
        prev = v;
    }
    CHECK(critical_sample_size(params, spec, c, 5.0, 5, 0.3) < critical_sample_size(params, spec, c, 5.0, 5, 0.01));
    CHECK_THROWS_AS(critical_sample_size({1.0, 3.0}, spec, c, 5.0, 5, 0.05), DomainError);
    CHECK_NOTHROW(critical_sample_size({1.0, 2.5}, spec, c, 5.0, 5, 0.05));
}

TEST_CASE("calibration names") {
    for (auto k : {Calibration::oracle_mc, Calibration::bootstrap, Calibration::explicit_constant})
        CHECK(calibration_from_string(to_string(k)) == k);
}
