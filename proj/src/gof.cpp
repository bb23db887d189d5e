#include <gsc/gof.hpp>

#include <gsc/errors.hpp>
#include <gsc/linalg.hpp>
#include <gsc/rng.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <string>

namespace gsc {

std::string_view to_string(TestKind kind) {
    switch (kind) {
    case TestKind::rao: return "rao";
    case TestKind::lr: return "lr";
    case TestKind::wald: return "wald";
    }
    return "unknown";
}

TestKind test_kind_from_string(std::string_view name) {
    for (auto k : {TestKind::rao, TestKind::lr, TestKind::wald})
        if (to_string(k) == name) return k;
    throw Error("unknown test kind '" + std::string(name) + "' (expected rao, lr or wald)");
}

std::string_view to_string(CriticalRule rule) {
    switch (rule) {
    case CriticalRule::scaled_dim: return "scaled_dim";
    case CriticalRule::explicit_value: return "explicit";
    case CriticalRule::oracle_mc: return "oracle_mc";
    }
    return "unknown";
}

CriticalRule critical_rule_from_string(std::string_view name) {
    for (auto r : {CriticalRule::scaled_dim, CriticalRule::explicit_value, CriticalRule::oracle_mc})
        if (to_string(r) == name) return r;
    throw Error("unknown critical rule '" + std::string(name) + "' (expected scaled_dim, explicit or oracle_mc)");
}

namespace {

void check_theta(const LossModel& model, const Vector& theta0) {
    if (theta0.size() != model.dim())
        throw DimensionMismatch("null parameter has length " + std::to_string(theta0.size()) + ", model expects " +
                                std::to_string(model.dim()));
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

}  // namespace

double rao_statistic(const LossModel& model, const Dataset& data, const Vector& theta0) {
    check_theta(model, theta0);
    model.validate(data);
    const auto agg = aggregates(model, data, theta0, kGrad | kHess);
    return SpdFactor(agg.H_n, false).inverse_quadratic(agg.S_n);
}

double lr_statistic(const LossModel& model, const Dataset& data, const FitResult& fit, const Vector& theta0) {
    check_theta(model, theta0);
    if (!fit.converged) throw NonConverged("lr statistic needs a converged fit");
    return 2.0 * (aggregates(model, data, theta0, kValue).L_n - fit.aggregates_at_opt.L_n);
}

double wald_statistic(const FitResult& fit, const Vector& theta0) {
    if (theta0.size() != fit.theta_n.size()) throw DimensionMismatch("null parameter does not match the fit");
    if (!fit.converged) throw NonConverged("wald statistic needs a converged fit");
    SpdFactor check(fit.aggregates_at_opt.H_n, false);
    (void)check;
    return quadratic_form(fit.aggregates_at_opt.H_n, fit.theta_n - theta0);
}

double test_statistic(TestKind kind, const LossModel& model, const Dataset& data, const Vector& theta0,
                      const SolverOptions& solver, FitResult* fit_out) {
    if (kind == TestKind::rao) return rao_statistic(model, data, theta0);
    check_theta(model, theta0);
    FitResult fit = fit_erm(model, data, solver);
    if (!fit.converged)
        throw NonConverged("fit did not converge (decrement " + std::to_string(fit.newton_decrement) + ")");
    const double t = kind == TestKind::lr ? lr_statistic(model, data, fit, theta0) : wald_statistic(fit, theta0);
    if (fit_out) *fit_out = std::move(fit);
    return t;
}

NullDistribution null_statistics(TestKind kind, const LossModel& model, const Process& process,
                                 const Vector& theta0, std::size_t n, std::size_t reps, std::uint64_t seed_base,
                                 const SolverOptions& solver, Execution exec) {
    check_theta(model, theta0);
    const Process null_process = process.with_theta(theta0);
    null_process.validate();
    struct Outcome {
        double t = 0.0;
        bool ok = false;
    };
    const auto outcomes = replicate<Outcome>(reps, exec, [&](std::size_t r) {
        Outcome o;
        try {
            const Dataset data = generate(null_process, n, seed_base + r);
            o.t = test_statistic(kind, model, data, theta0, solver);
            o.ok = std::isfinite(o.t);
        } catch (const Error&) {
            o.ok = false;
        }
        return o;
    });
    NullDistribution out;
    for (const auto& o : outcomes) {
        if (o.ok)
            out.statistics.push_back(o.t);
        else
            ++out.n_failed;
    }
    return out;
}

double critical_value(TestKind kind, const LossModel& model, std::size_t n, int d, const Vector& theta0,
                      double alpha, const CriticalOptions& options) {
    check_alpha(alpha);
    switch (options.rule) {
    case CriticalRule::scaled_dim: {
        double c = 0.0;
        if (options.c) {
            c = *options.c;
        } else {
            const boost::math::chi_squared chi2(static_cast<double>(d));
            c = boost::math::quantile(chi2, 1.0 - alpha) / d;
        }
        if (!(c > 0.0)) throw DomainError("scaled_dim constant must be positive");
        return c * d / static_cast<double>(n);
    }
    case CriticalRule::explicit_value:
        if (!(options.value > 0.0)) throw DomainError("explicit critical value must be positive");
        return options.value;
    case CriticalRule::oracle_mc: {
        if (options.process == nullptr) throw MissingSampler("oracle_mc critical value needs a process");
        if (options.reps == 0) throw DomainError("oracle_mc needs reps >= 1");
        const auto null = null_statistics(kind, model, *options.process, theta0, n, options.reps,
                                          derive_seed(options.seed, StreamTag::calibration), options.solver,
                                          options.exec);
        if (null.n_failed * 10 > options.reps)
            throw TooManyFailures(std::to_string(null.n_failed) + " of " + std::to_string(options.reps) +
                                  " null replications failed");
        return quantile_type7(null.statistics, 1.0 - alpha);
    }
    }
    throw Error("unknown critical rule");
}

TestReport run_test(TestKind kind, const LossModel& model, const Dataset& data, const Vector& theta0, double alpha,
                    const CriticalOptions& options) {
    check_alpha(alpha);
    TestReport report;
    report.kind = kind;
    report.rule = options.rule;
    report.n = data.n();
    report.d = model.dim();
    report.statistic = test_statistic(kind, model, data, theta0, options.solver);
    report.fit_performed = kind != TestKind::rao;
    report.critical = critical_value(kind, model, data.n(), model.dim(), theta0, alpha, options);
    report.reject = report.statistic > report.critical;
    return report;
}

void PowerConfig::validate() const {
    process.validate();
    check_alpha(alpha);
    if (n_grid.empty()) throw DomainError("power curve needs a non-empty n grid");
    for (auto n : n_grid)
        if (n == 0) throw DomainError("power curve sample sizes must be positive");
    if (alternatives.empty()) throw DomainError("power curve needs at least one alternative");
    if (reps == 0 || calibration_reps == 0) throw DomainError("power curve needs reps >= 1");
    if (theta0.size() != process.d) throw DimensionMismatch("null parameter does not match the process");
    for (const auto& a : alternatives)
        if (a.size() != theta0.size()) throw DimensionMismatch("alternative does not match the null dimension");
    solver.validate();
}

std::vector<PowerRow> power_curve(const PowerConfig& config) {
    config.validate();
    const LossModel model = config.model ? *config.model : default_model(config.process);
    const std::uint64_t cal_base = derive_seed(config.seed, StreamTag::calibration);
    const std::uint64_t eval_base = derive_seed(config.seed, StreamTag::test_support);
    const std::size_t A = config.alternatives.size();

    std::vector<PowerRow> rows;
    for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
        const std::size_t n = config.n_grid[g];
        const auto null = null_statistics(config.kind, model, config.process, config.theta0, n,
                                          config.calibration_reps, cal_base + (std::uint64_t{g} << 32),
                                          config.solver, config.exec);
        if (null.statistics.empty()) throw TooManyFailures("every null replication failed");
        const double critical = quantile_type7(null.statistics, 1.0 - config.alpha);

        for (std::size_t a = 0; a < A; ++a) {
            Vector theta_star = config.alternatives[a];
            if (config.local) theta_star = config.theta0 + theta_star / std::sqrt(static_cast<double>(n));
            struct Outcome {
                bool reject = false;
                bool ok = false;
            };
            const Process alt_process = config.process.with_theta(theta_star);
            const std::uint64_t base = eval_base + (std::uint64_t{g * A + a} << 32);
            const auto outcomes = replicate<Outcome>(config.reps, config.exec, [&](std::size_t r) {
                Outcome o;
                try {
                    const Dataset data = generate(alt_process, n, base + r);
                    const double t = test_statistic(config.kind, model, data, config.theta0, config.solver);
                    o.ok = std::isfinite(t);
                    o.reject = t > critical;
                } catch (const Error&) {
                    o.ok = false;
                }
                return o;
            });
            PowerRow row;
            row.kind = config.kind;
            row.n = n;
            row.dist = (theta_star - config.theta0).norm();
            row.critical = critical;
            std::size_t hits = 0;
            for (const auto& o : outcomes) {
                if (!o.ok) {
                    ++row.failures;
                    continue;
                }
                ++row.reps;
                hits += o.reject ? 1 : 0;
            }
            if (row.reps > 0) {
                row.power = static_cast<double>(hits) / static_cast<double>(row.reps);
                row.stderr_ = std::sqrt(row.power * (1.0 - row.power) / static_cast<double>(row.reps));
            } else {
                row.power = row.stderr_ = std::nan("");
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace gsc
