#include <gsc/bootstrap.hpp>

#include <gsc/errors.hpp>
#include <gsc/inference.hpp>
#include <gsc/linalg.hpp>
#include <gsc/rng.hpp>

#include <cmath>
#include <string>

namespace gsc {

std::string_view to_string(StatisticKind kind) { return kind == StatisticKind::wald ? "wald" : "lr"; }

StatisticKind statistic_kind_from_string(std::string_view name) {
    if (name == "wald") return StatisticKind::wald;
    if (name == "lr") return StatisticKind::lr;
    throw Error("unknown statistic kind '" + std::string(name) + "' (expected wald or lr)");
}

std::string_view to_string(CoverageMethod method) {
    switch (method) {
    case CoverageMethod::oracle: return "oracle";
    case CoverageMethod::bootwald: return "bootwald";
    case CoverageMethod::bootlr: return "bootlr";
    }
    return "unknown";
}

CoverageMethod coverage_method_from_string(std::string_view name) {
    for (auto m : {CoverageMethod::oracle, CoverageMethod::bootwald, CoverageMethod::bootlr})
        if (to_string(m) == name) return m;
    throw Error("unknown coverage method '" + std::string(name) + "' (expected oracle, bootwald or bootlr)");
}

void BootstrapConfig::validate() const {
    if (B == 0) throw DomainError("bootstrap B must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    solver.validate();
}

Vector bootstrap_weights(std::size_t n, std::uint64_t seed, std::size_t b) {
    CounterRng rng(seed, make_stream(StreamTag::bootstrap_weights, b));
    Vector w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = 1.0 + rng.normal();
    return w;
}

FitResult bootstrap_fit(const LossModel& model, const Dataset& data, std::span<const double> weights,
                        const SolverOptions& opts) {
    SolverOptions local = opts;
    local.certify = false;
    FitResult fit = fit_weighted(model, data, weights, local);
    if (!fit.converged)
        throw NonConverged("bootstrap fit stopped after " + std::to_string(fit.iterations) +
                           " iterations with decrement " + std::to_string(fit.newton_decrement));
    // Negative weights can leave the weighted risk nonconvex at the solution.
    SpdFactor check(fit.aggregates_at_opt.H_n, false);
    (void)check;
    return fit;
}

namespace {

struct ReplicateOutcome {
    double wald = 0.0;
    double lr = 0.0;
    bool ok = false;
};

ReplicateOutcome one_replicate(const LossModel& model, const Dataset& data, const FitResult& fit,
                               const BootstrapConfig& config, std::size_t b) {
    ReplicateOutcome out;
    try {
        const Vector w = bootstrap_weights(data.n(), config.seed, b);
        const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
        const FitResult boot = bootstrap_fit(model, data, ws, config.solver);
        const Vector diff = boot.theta_n - fit.theta_n;
        out.wald = quadratic_form(boot.aggregates_at_opt.H_n, diff);
        const double at_center = aggregates(model, data, fit.theta_n, kValue, ws).L_n;
        out.lr = 2.0 * (at_center - boot.aggregates_at_opt.L_n);
        out.ok = std::isfinite(out.wald) && std::isfinite(out.lr);
    } catch (const Error&) {
        out.ok = false;
    }
    return out;
}

}  // namespace

BootstrapReplicates bootstrap_replicates(const LossModel& model, const Dataset& data, const FitResult& fit,
                                         const BootstrapConfig& config) {
    config.validate();
    if (fit.theta_n.size() != model.dim()) throw DimensionMismatch("fit does not match the model dimension");
    const auto outcomes = replicate<ReplicateOutcome>(
        config.B, config.exec, [&](std::size_t b) { return one_replicate(model, data, fit, config, b); });
    BootstrapReplicates out;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++out.n_failed;
            continue;
        }
        out.wald.push_back(o.wald);
        out.lr.push_back(o.lr);
    }
    return out;
}

BootstrapQuantile bootstrap_quantile(const LossModel& model, const Dataset& data, const FitResult& fit,
                                     const BootstrapConfig& config, StatisticKind kind) {
    if (!fit.converged) throw NonConverged("bootstrap needs a converged base fit");
    const auto reps = bootstrap_replicates(model, data, fit, config);
    if (reps.n_failed * 10 > config.B)
        throw TooManyFailures(std::to_string(reps.n_failed) + " of " + std::to_string(config.B) +
                              " bootstrap replications failed");
    const auto& values = kind == StatisticKind::wald ? reps.wald : reps.lr;
    BootstrapQuantile q;
    q.quantile = quantile_type7(values, 1.0 - config.delta);
    q.n_failed = reps.n_failed;
    q.n_used = values.size();
    return q;
}

void CoverageConfig::validate() const {
    process.validate();
    if (n == 0) throw DomainError("coverage experiment needs n >= 1");
    if (reps == 0) throw DomainError("coverage experiment needs reps >= 1");
    if (levels.empty()) throw DomainError("coverage experiment needs at least one level");
    for (double q : levels)
        if (!(q > 0.0 && q < 1.0)) throw DomainError("coverage levels must lie in (0, 1)");
    if (methods.empty()) throw DomainError("coverage experiment needs at least one method");
    for (auto m : methods) {
        if (m != CoverageMethod::oracle && B == 0) throw DomainError("bootstrap methods need B >= 1");
        if (m == CoverageMethod::oracle && calibration_reps == 0)
            throw DomainError("oracle method needs calibration_reps >= 1");
    }
    solver.validate();
}

namespace {

// Per-replication verdicts: covered[method][level], or failed[method].
struct RepVerdict {
    std::vector<std::vector<char>> covered;
    std::vector<char> failed;
};

}  // namespace

std::vector<CoverageCell> coverage_experiment(const CoverageConfig& config) {
    config.validate();
    const LossModel model = config.model ? *config.model : default_model(config.process);
    const std::size_t M = config.methods.size();
    const std::size_t L = config.levels.size();
    const Vector& theta0 = config.process.theta0;

    bool need_oracle = false;
    bool need_boot = false;
    for (auto m : config.methods) (m == CoverageMethod::oracle ? need_oracle : need_boot) = true;

    std::vector<double> oracle_q(L, 0.0);
    if (need_oracle) {
        const auto cal = oracle_statistics(model, config.process, config.n, config.calibration_reps, config.seed,
                                           config.solver, config.exec);
        if (cal.wald.empty()) throw TooManyFailures("every oracle calibration replication failed");
        for (std::size_t l = 0; l < L; ++l) oracle_q[l] = quantile_type7(cal.wald, config.levels[l]);
    }
    const std::uint64_t boot_base = derive_seed(config.seed, StreamTag::bootstrap_weights);

    auto run = [&](std::size_t r) {
        RepVerdict v;
        v.covered.assign(M, std::vector<char>(L, 0));
        v.failed.assign(M, 0);
        FitResult fit;
        Dataset data;
        try {
            data = generate(config.process, config.n, config.seed + r);
            fit = fit_erm(model, data, config.solver);
            if (!fit.converged) throw NonConverged("replication fit did not converge");
        } catch (const Error&) {
            v.failed.assign(M, 1);
            return v;
        }
        const double t_wald = quadratic_form(fit.aggregates_at_opt.H_n, theta0 - fit.theta_n);
        double t_lr = 0.0;
        BootstrapReplicates boot;
        bool boot_ok = true;
        try {
            t_lr = 2.0 * (aggregates(model, data, theta0, kValue).L_n - fit.aggregates_at_opt.L_n);
            if (need_boot) {
                BootstrapConfig bc;
                bc.B = config.B;
                bc.seed = boot_base + r;
                bc.solver = config.solver;
                bc.exec = Execution::serial;
                boot = bootstrap_replicates(model, data, fit, bc);
                boot_ok = boot.n_failed * 10 <= config.B && !boot.wald.empty();
            }
        } catch (const Error&) {
            boot_ok = false;
        }
        for (std::size_t m = 0; m < M; ++m) {
            const auto method = config.methods[m];
            if (method != CoverageMethod::oracle && !boot_ok) {
                v.failed[m] = 1;
                continue;
            }
            for (std::size_t l = 0; l < L; ++l) {
                const double level = config.levels[l];
                switch (method) {
                case CoverageMethod::oracle: v.covered[m][l] = t_wald <= oracle_q[l]; break;
                case CoverageMethod::bootwald: v.covered[m][l] = t_wald <= quantile_type7(boot.wald, level); break;
                case CoverageMethod::bootlr: v.covered[m][l] = t_lr <= quantile_type7(boot.lr, level); break;
                }
            }
        }
        return v;
    };
    const auto verdicts = replicate<RepVerdict>(config.reps, config.exec, run);

    std::vector<CoverageCell> cells;
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t l = 0; l < L; ++l) {
            CoverageCell cell;
            cell.model = config.label.empty() ? std::string(to_string(config.process.kind)) : config.label;
            cell.method = config.methods[m];
            cell.level = config.levels[l];
            std::size_t hits = 0;
            for (const auto& v : verdicts) {
                if (v.failed[m]) {
                    ++cell.failures;
                    continue;
                }
                ++cell.reps;
                hits += static_cast<std::size_t>(v.covered[m][l]);
            }
            if (cell.reps > 0) {
                cell.coverage = static_cast<double>(hits) / static_cast<double>(cell.reps);
                cell.stderr_ = std::sqrt(cell.coverage * (1.0 - cell.coverage) / static_cast<double>(cell.reps));
            } else {
                cell.coverage = std::nan("");
                cell.stderr_ = std::nan("");
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace gsc
