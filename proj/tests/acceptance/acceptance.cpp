// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails. `--only 1,4` runs a subset.

#include "../support.hpp"

#include <gsc/bootstrap.hpp>
#include <gsc/estimate.hpp>
#include <gsc/experiments.hpp>
#include <gsc/gof.hpp>
#include <gsc/inference.hpp>
#include <gsc/losses.hpp>
#include <gsc/scfun.hpp>
#include <gsc/simdata.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gsc;
using namespace gsc::test;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// ---- 1: kernel exactness -------------------------------------------------

Outcome kernels() {
    CounterRng rng(20240501, make_stream(StreamTag::test_support, 101));
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double nu = 2.0 + 4.0 * rng.uniform();
        const double tau = -0.9 + 1.8 * rng.uniform();
        const double w = nu == 2.0 ? std::exp(tau) : std::pow(1.0 - tau, -2.0 / (nu - 2.0));
        const double qb = integrate01([&](double t) { return omega(nu, t * tau); });
        const double qd = integrate01([&](double r) { return (1.0 - r) * omega(nu, r * tau); });
        worst = std::max({worst, rel_err(omega(nu, tau), w), rel_err(omega_bar(nu, tau), qb),
                          rel_err(omega_dbar(nu, tau), qd)});
    }
    const bool k_exact = k_nu(2.0) == 0.5 && k_nu(3.0) == 0.25;
    return {worst <= 1e-8 && k_exact, fmt("max rel err %.2e over 200 points, K2=%g K3=%g", worst, k_nu(2.0), k_nu(3.0))};
}

// ---- 2, 3: derivatives and self-concordance --------------------------------

struct LossCase {
    LossModel model;
    Observation z;
    Vector theta;
};

LossCase random_loss_case(int which, CounterRng& rng) {
    const int d = 4;
    switch (which) {
    case 0:
        return {LossModel::squared(d), {random_normal(d, rng), rng.normal()}, random_normal(d, rng)};
    case 1: {
        Observation z{random_normal(d, rng), rng.uniform() < 0.5 ? -1.0 : 1.0};
        return {LossModel::logistic(d, 2.0 * z.x.norm()), z, random_normal(d, rng)};
    }
    case 2: {
        Observation z{random_normal(d, rng, 0.5), static_cast<double>(rng.poisson(3.0))};
        return {LossModel::poisson(d, z.x.norm()), z, random_normal(d, rng, 0.5)};
    }
    case 3: {
        Vector x = random_normal(d, rng);
        Observation z{x, std::floor(3.0 * rng.uniform())};
        return {LossModel::softmax(d, 3, x.norm()), z, random_normal(2 * d, rng)};
    }
    default: {
        Vector theta(4);
        theta << rng.normal(), rng.normal(), 0.5 + rng.uniform(), 0.5 + rng.uniform();
        return {LossModel::gaussian_score_matching(2), {random_normal(2, rng), std::nan("")}, theta};
    }
    }
}

Outcome derivatives() {
    CounterRng rng(7, make_stream(StreamTag::test_support, 102));
    double worst = 0.0;
    for (int which = 0; which < 5; ++which) {
        for (int k = 0; k < 100; ++k) {
            const auto c = random_loss_case(which, rng);
            const ObsRef z = c.z.ref();
            const Vector g = c.model.grad(c.theta, z);
            const Matrix H = c.model.hess(c.theta, z);
            const Vector gf = fd_grad([&](const Vector& t) { return c.model.value(t, z); }, c.theta);
            const Matrix Hf = fd_jacobian([&](const Vector& t) { return c.model.grad(t, z); }, c.theta);
            worst = std::max(worst, (g - gf).norm() / std::max(1.0, g.norm()));
            worst = std::max(worst, (H - Hf).norm() / std::max(1.0, H.norm()));
        }
    }
    return {worst <= 1e-4, fmt("max rel err %.2e over 5 losses x 100 inputs", worst)};
}

Outcome self_concordance() {
    CounterRng rng(8, make_stream(StreamTag::test_support, 103));
    // Logistic: R = 2 max ||x|| on a fixed dataset, checked per sample.
    const auto p = make_process(ProcessKind::logistic_wellspec, 4);
    const Dataset data = generate(p, 50, 3);
    const auto logit = default_model(p).declared_for(data);
    double worst_excess = -1e300;
    for (int k = 0; k < 100; ++k) {
        const ObsRef z = data.row(static_cast<std::size_t>(k % 50));
        const Vector theta = random_normal(4, rng);
        const Vector u = random_normal(4, rng), v = random_normal(4, rng);
        const double third = std::abs(loss_third_dir(logit, theta, z, u, v));
        const double bound = logit.sc().R * v.norm() * u.dot(logit.hess(theta, z) * u);
        worst_excess = std::max(worst_excess, third - bound);
    }
    // expfam_glm (softmax): R = 2M with ||x|| <= M.
    const double M = 3.0;
    const auto soft = LossModel::softmax(4, 3, M);
    for (int k = 0; k < 100; ++k) {
        Vector x = random_normal(4, rng);
        x *= M * rng.uniform() / x.norm();
        const Observation z{x, std::floor(3.0 * rng.uniform())};
        const Vector theta = random_normal(8, rng);
        const Vector u = random_normal(8, rng), v = random_normal(8, rng);
        const double third = std::abs(loss_third_dir(soft, theta, z.ref(), u, v));
        const double bound = soft.sc().R * v.norm() * u.dot(soft.hess(theta, z.ref()) * u);
        worst_excess = std::max(worst_excess, third - bound);
    }
    double quad = 0.0;
    for (int which : {0, 4}) {
        for (int k = 0; k < 50; ++k) {
            const auto c = random_loss_case(which, rng);
            const Vector u = random_normal(c.model.dim(), rng), v = random_normal(c.model.dim(), rng);
            quad = std::max(quad, std::abs(loss_third_dir(c.model, c.theta, c.z.ref(), u, v)));
        }
    }
    const bool ok = worst_excess <= 1e-5 && quad <= 1e-6 && soft.sc().R == 2.0 * M;
    return {ok, fmt("max(|D3| - bound) = %.2e (slack 1e-5), quadratic |D3| max %.2e", worst_excess, quad)};
}

// ---- 4: Hessian sandwich ----------------------------------------------------

Outcome sandwich() {
    const auto p = make_process(ProcessKind::logistic_wellspec, 4);
    const Dataset data = generate(p, 2000, 4);
    const auto model = default_model(p).declared_for(data);
    const ScParams sc = empirical_sc(model.sc(), data.n());
    CounterRng rng(9, make_stream(StreamTag::test_support, 104));
    int pairs = 0, bad = 0;
    double worst = 0.0;
    while (pairs < 200) {
        const Vector x = p.theta0 + random_normal(4, rng, 0.5);
        Vector step = random_normal(4, rng);
        const double target = 0.9 * rng.uniform();
        step *= target / (sc.R * step.norm());
        const Vector y = x + step;
        const Matrix Hx = aggregates(model, data, x, kHess).H_n;
        const Matrix Hy = aggregates(model, data, y, kHess).H_n;
        const double dv = d_nu(sc, step, std::sqrt(step.dot(Hx * step)));
        if (!(dv < 0.9)) continue;
        ++pairs;
        const double w = omega(sc.nu, dv);
        Eigen::LLT<Matrix> llt(Hx);
        const Matrix L = llt.matrixL();
        const Matrix W = L.triangularView<Eigen::Lower>().solve(
            L.triangularView<Eigen::Lower>().solve(Hy).transpose().eval());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (W + W.transpose()));
        const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
        if (lo < (1.0 / w) * (1 - 1e-12) || hi > w * (1 + 1e-12)) ++bad;
        worst = std::max({worst, std::log(hi) / std::log(w), -std::log(lo) / std::log(w)});
    }
    return {bad == 0, fmt("%g/200 pairs outside [1/w, w]; max log-eig / log w = %.3f", bad, worst)};
}

// ---- 5: localization --------------------------------------------------------

Outcome localization() {
    const auto p = make_process(ProcessKind::logistic_wellspec, 2);
    int passed = 0, violations = 0, tried = 0;
    for (std::uint64_t seed = 0; passed < 200 && seed < 2000; ++seed) {
        ++tried;
        const Dataset data = generate(p, 5000, 70000 + seed);
        const auto model = default_model(p).declared_for(data);
        const auto cert = localization_certificate(model, data, p.theta0);
        if (!cert.passes) continue;
        ++passed;
        const auto fit = fit_erm(model, data);
        const Matrix H = aggregates(model, data, p.theta0, kHess).H_n;
        const Vector diff = fit.theta_n - p.theta0;
        if (!fit.converged || std::sqrt(diff.dot(H * diff)) > 4.0 * cert.score_norm) ++violations;
    }
    return {passed == 200 && violations == 0,
            fmt("%g certified replications (of %g tried), %g violations", passed, tried, violations)};
}

// ---- 6: Wilks ---------------------------------------------------------------

Outcome wilks() {
    const auto p = make_process(ProcessKind::linear_wellspec, 5);
    const auto model = LossModel::squared(5);
    const std::size_t n = 5000;
    const auto stats = replicate<std::pair<double, double>>(500, Execution::parallel, [&](std::size_t r) {
        const Dataset data = generate(p, n, 80000 + r);
        const auto fit = fit_erm(model, data);
        return std::make_pair(lr_statistic(model, data, fit, p.theta0), wald_statistic(fit, p.theta0));
    });
    double lr = 0.0, wald = 0.0;
    for (const auto& [a, b] : stats) {
        lr += a * n;
        wald += b * n;
    }
    lr /= 500.0;
    wald /= 500.0;
    const bool ok = lr >= 4.5 && lr <= 5.5 && wald >= 4.5 && wald <= 5.5;
    return {ok, fmt("mean n*T_LR = %.3f, mean n*T_Wald = %.3f, band [4.5, 5.5]", lr, wald)};
}

// ---- 7: effective dimension consistency ------------------------------------

Outcome effdim_consistency() {
    EffdimErrorConfig cfg;
    cfg.models = {ProcessKind::logistic_wellspec};
    cfg.dims = {5};
    cfg.n_grid = {2000, 10000};
    cfg.reps = 30;
    cfg.seed = 0;
    const auto rows = effdim_error(cfg);
    const double e2 = rows.at(0).error, e10 = rows.at(1).error;
    const bool ok = e10 < e2 && e10 <= 0.15 && rows[0].failures == 0 && rows[1].failures == 0;
    return {ok, fmt("mean |d_n/d - 1|: n=2000 %.4f, n=10000 %.4f (<= 0.15)", e2, e10)};
}

// ---- 8: Table 2 -------------------------------------------------------------

struct Target {
    const char* model;
    CoverageMethod method;
    double level;
    double value;
};

Outcome table2(std::size_t reps, double tol) {
    CoverageTableConfig cfg;
    cfg.reps = reps;
    cfg.levels = {0.95, 0.75};
    cfg.seed = 0;
    const auto cells = coverage_table(cfg);
    const Target targets[] = {
        {"linear_wellspec", CoverageMethod::oracle, 0.95, 0.957},
        {"logistic_wellspec", CoverageMethod::bootwald, 0.95, 0.938},
        {"logistic_wellspec", CoverageMethod::bootlr, 0.95, 0.976},
        {"linear_misspec_t", CoverageMethod::bootwald, 0.75, 0.727},
    };
    bool ok = true;
    std::ostringstream detail;
    for (const auto& t : targets) {
        for (const auto& c : cells) {
            if (c.model != t.model || c.method != t.method || c.level != t.level) continue;
            const bool cell_ok = std::abs(c.coverage - t.value) <= tol;
            ok = ok && cell_ok;
            detail << t.model << '/' << to_string(t.method) << '@' << t.level << ' ' << c.coverage << " vs "
                   << t.value << (cell_ok ? "" : " (out)") << "; ";
        }
    }
    detail << "reps=" << reps << " B=2000 tol=" << tol;
    return {ok, detail.str()};
}

// ---- 9: spectral regimes ----------------------------------------------------

Outcome spectral() {
    bool ok = true;
    std::ostringstream detail;
    for (int d : {10, 50, 200}) {
        Vector g(d);
        for (int i = 1; i <= d; ++i) g(i - 1) = std::pow(i, -1.3);
        ok = ok && effective_dim_spectrum(g, g) == static_cast<double>(d);
    }
    const int d = 50;
    Vector g(d), h(d);
    double oracle = 0.0;
    for (int i = 1; i <= d; ++i) {
        g(i - 1) = std::exp(-static_cast<double>(i));
        h(i - 1) = 1.0 / i;
        oracle += i * std::exp(-static_cast<double>(i));
    }
    const double ep = effective_dim_spectrum(g, h);
    ok = ok && std::abs(ep - oracle) <= 1e-10 && ep < 1.0;
    detail << "equal spectra -> d; Exp-Poly(d=50) = " << ep << " (oracle diff " << std::abs(ep - oracle) << ")";
    // Poly-Poly alpha = 2, beta = 1: value = H_d, grows like log d.
    double prev = 0.0;
    for (int dd : {10, 100, 1000}) {
        Vector gg(dd), hh(dd);
        for (int i = 1; i <= dd; ++i) {
            gg(i - 1) = std::pow(i, -2.0);
            hh(i - 1) = 1.0 / i;
        }
        const double v = effective_dim_spectrum(gg, hh);
        const double ratio = v / std::log(static_cast<double>(dd));
        ok = ok && v > prev && ratio > 1.0 && ratio < 1.3;
        detail << "; Poly-Poly d=" << dd << ": " << v << " (/log d = " << ratio << ")";
        prev = v;
    }
    return {ok, detail.str()};
}

// ---- 10: power --------------------------------------------------------------

Outcome power() {
    bool ok = true;
    std::ostringstream detail;
    const auto p = make_process(ProcessKind::logistic_wellspec, 5);
    const Vector shift = Vector::Ones(5) * (0.5 / std::sqrt(5.0));
    for (auto kind : {TestKind::rao, TestKind::lr, TestKind::wald}) {
        PowerConfig cfg;
        cfg.kind = kind;
        cfg.process = p;
        cfg.theta0 = p.theta0;
        cfg.alternatives = {p.theta0 + shift};
        cfg.n_grid = {500, 1000, 2000};
        cfg.reps = 500;
        cfg.alpha = 0.05;
        cfg.calibration_reps = 1000;
        cfg.seed = 0;
        const auto rows = power_curve(cfg);
        bool monotone = true;
        for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].power >= rows[i - 1].power - 0.05;
        const bool kind_ok = monotone && rows.back().power >= 0.9;
        ok = ok && kind_ok;
        detail << to_string(kind) << ": " << rows[0].power << ", " << rows[1].power << ", " << rows[2].power << "; ";
    }
    detail << "n = 500, 1000, 2000; ||shift|| = 0.5";
    return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<std::string> only;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--only") {
            std::stringstream ss(argv[i + 1]);
            std::string item;
            while (std::getline(ss, item, ',')) only.insert(item);
        }

    struct Criterion {
        std::string id;
        std::string name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1", "kernel exactness", kernels},
        {"2", "derivative correctness", derivatives},
        {"3", "self-concordance inequality", self_concordance},
        {"4", "Hessian sandwich", sandwich},
        {"5", "localization", localization},
        {"6", "Wilks sanity", wilks},
        {"7", "effective-dimension consistency", effdim_consistency},
        {"8-smoke", "Table 2 coverage, smoke (200 reps, +-0.06)", [] { return table2(200, 0.06); }},
        {"8", "Table 2 coverage (1000 reps, +-0.03)", [] { return table2(1000, 0.03); }},
        {"9", "spectral effective-dimension regimes", spectral},
        {"10", "power direction", power},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %s: %s | %s | %.1fs\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), c.name.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
