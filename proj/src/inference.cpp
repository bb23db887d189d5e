#include <gsc/inference.hpp>

#include <gsc/errors.hpp>
#include <gsc/linalg.hpp>
#include <gsc/rng.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace gsc {

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
}

ScParams per_sample_sc(const LossModel& model, const Dataset& data) {
    return model.sc().R == 0.0 ? model.declared_for(data).sc() : model.sc();
}

constexpr std::size_t kEffdimBatches = 10;

}  // namespace

std::string_view to_string(Calibration calibration) {
    switch (calibration) {
    case Calibration::oracle_mc: return "oracle_mc";
    case Calibration::bootstrap: return "bootstrap";
    case Calibration::explicit_constant: return "explicit_constant";
    }
    return "unknown";
}

Calibration calibration_from_string(std::string_view name) {
    for (auto c : {Calibration::oracle_mc, Calibration::bootstrap, Calibration::explicit_constant})
        if (to_string(c) == name) return c;
    throw Error("unknown calibration '" + std::string(name) + "' (expected oracle_mc, bootstrap or explicit_constant)");
}

std::string_view to_string(EffDimKind kind) {
    switch (kind) {
    case EffDimKind::oracle_analytic: return "oracle_analytic";
    case EffDimKind::oracle_mc: return "oracle_mc";
    case EffDimKind::empirical: return "empirical";
    }
    return "unknown";
}

void ConfidenceSet::validate() const {
    const auto d = center.size();
    if (d == 0) throw DimensionMismatch("confidence set has an empty center");
    if (shape.rows() != d || shape.cols() != d) throw DimensionMismatch("confidence set shape must be d x d");
    if (!shape.isApprox(shape.transpose(), 1e-12)) throw DomainError("confidence set shape must be symmetric");
    SpdFactor check(shape, false);
    (void)check;
    if (!(sq_radius > 0.0) || !std::isfinite(sq_radius)) throw DomainError("sq_radius must be positive and finite");
    check_delta(delta);
}

void AssumptionConstants::validate() const {
    if (!(K1 > 0.0 && K2 > 0.0 && sigma_H > 0.0 && M_lip > 0.0))
        throw DomainError("assumption constants must be positive");
}

EffDimReport effective_dim_empirical(const FitResult& fit) {
    const auto& agg = fit.aggregates_at_opt;
    if (agg.H_n.size() == 0 || agg.G_n.size() == 0) throw DimensionMismatch("fit carries no H_n/G_n");
    const SpdFactor factor(agg.H_n, false);
    EffDimReport r;
    r.value = factor.trace_inverse_times(agg.G_n);
    r.kind = EffDimKind::empirical;
    return r;
}

double effective_dim_spectrum(const Vector& g_eigs, const Vector& h_eigs) {
    if (g_eigs.size() != h_eigs.size())
        throw DimensionMismatch("spectra have lengths " + std::to_string(g_eigs.size()) + " and " +
                                std::to_string(h_eigs.size()));
    if (g_eigs.size() == 0) throw DimensionMismatch("empty spectra");
    if ((g_eigs.array() <= 0.0).any() || (h_eigs.array() <= 0.0).any())
        throw DomainError("spectra must be positive");
    return (g_eigs.array() / h_eigs.array()).sum();
}

EffDimReport effective_dim_oracle(const LossModel& model, const Process& process, const Vector& theta_star,
                                  std::size_t mc_n, std::uint64_t seed) {
    process.validate();
    if (theta_star.size() != model.dim()) throw DimensionMismatch("theta_star does not match the model dimension");
    EffDimReport report;
    if (process.kind == ProcessKind::linear_wellspec && model.kind() == LossKind::squared &&
        theta_star == process.theta0) {
        report.value = static_cast<double>(model.dim());
        report.kind = EffDimKind::oracle_analytic;
        return report;
    }
    if (mc_n < 2 * kEffdimBatches) throw DomainError("effective_dim_oracle needs mc_n >= 20");

    const Dataset data = generate(process, mc_n, seed);
    model.validate(data);
    constexpr unsigned flags = kHess | kOuter;
    LossAccumulator total(model.dim());
    std::vector<double> batch_traces;
    for (std::size_t b = 0; b < kEffdimBatches; ++b) {
        const std::size_t begin = b * mc_n / kEffdimBatches;
        const std::size_t end = (b + 1) * mc_n / kEffdimBatches;
        LossAccumulator acc(model.dim());
        for (std::size_t i = begin; i < end; ++i) model.accumulate(theta_star, data.row(i), 1.0, flags, acc);
        total += acc;
        const Matrix H = acc.hess.selfadjointView<Eigen::Lower>();
        const Matrix G = acc.outer.selfadjointView<Eigen::Lower>();
        batch_traces.push_back(SpdFactor(H, false).trace_inverse_times(G));
    }
    const Matrix H = total.hess.selfadjointView<Eigen::Lower>();
    const Matrix G = total.outer.selfadjointView<Eigen::Lower>();
    report.value = SpdFactor(H, false).trace_inverse_times(G);
    report.kind = EffDimKind::oracle_mc;

    double mean = 0.0;
    for (double t : batch_traces) mean += t;
    mean /= static_cast<double>(kEffdimBatches);
    double ss = 0.0;
    for (double t : batch_traces) ss += (t - mean) * (t - mean);
    const double var = ss / static_cast<double>(kEffdimBatches - 1);
    report.mc_stderr = std::sqrt(var / static_cast<double>(kEffdimBatches));
    return report;
}

double t_n_bound(double delta, const AssumptionConstants& constants, double n, int d) {
    check_delta(delta);
    constants.validate();
    if (!(n > 0.0) || d < 1) throw DomainError("t_n_bound needs n > 0 and d >= 1");
    const double s2 = constants.sigma_H * constants.sigma_H;
    const double K2 = constants.K2;
    const double log_term = std::log(4.0 * d / delta);
    return 2.0 * s2 / (-K2 + std::sqrt(K2 * K2 + 2.0 * s2 * n / log_term));
}

OracleCalibration oracle_statistics(const LossModel& model, const Process& process, std::size_t n,
                                    std::size_t reps, std::uint64_t seed, const SolverOptions& solver,
                                    Execution exec) {
    process.validate();
    if (reps == 0) throw DomainError("calibration needs reps >= 1");
    if (process.theta0.size() != model.dim())
        throw DimensionMismatch("process parameter does not match the model dimension");
    const std::uint64_t base = derive_seed(seed, StreamTag::calibration);
    struct Outcome {
        double wald = 0.0;
        double lr = 0.0;
        bool ok = false;
    };
    const auto outcomes = replicate<Outcome>(reps, exec, [&](std::size_t r) {
        Outcome o;
        try {
            const Dataset data = generate(process, n, base + r);
            const FitResult fit = fit_erm(model, data, solver);
            if (!fit.converged) return o;
            const Vector diff = process.theta0 - fit.theta_n;
            o.wald = quadratic_form(fit.aggregates_at_opt.H_n, diff);
            o.lr = 2.0 * (aggregates(model, data, process.theta0, kValue).L_n - fit.aggregates_at_opt.L_n);
            o.ok = std::isfinite(o.wald) && std::isfinite(o.lr);
        } catch (const Error&) {
            o.ok = false;
        }
        return o;
    });
    OracleCalibration out;
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

double oracle_wald_quantile(const LossModel& model, const Process& process, std::size_t n, double delta,
                            std::size_t reps, std::uint64_t seed, Execution exec) {
    check_delta(delta);
    const auto cal = oracle_statistics(model, process, n, reps, seed, {}, exec);
    if (cal.n_failed * 10 > reps)
        throw TooManyFailures(std::to_string(cal.n_failed) + " of " + std::to_string(reps) +
                              " calibration replications failed");
    return quantile_type7(cal.wald, 1.0 - delta);
}

namespace {

double explicit_radius(const LossModel& model, const Dataset& data, const FitResult& fit,
                       const EffDimReport& effdim, double delta, const AssumptionConstants& constants, double C) {
    constants.validate();
    if (!(C >= 0.0)) throw DomainError("explicit constant C must be non-negative");
    const auto& agg = fit.aggregates_at_opt;
    const double n = static_cast<double>(data.n());
    const SpdFactor factor(agg.H_n, false);
    const double omega_norm = factor.max_whitened_eigenvalue(agg.G_n);
    const double log_term = std::log(std::numbers::e / delta);
    const double K1sq = constants.K1 * constants.K1;
    const double r_n = std::sqrt(C * K1sq * log_term * effdim.value / n);
    const ScParams sc = per_sample_sc(model, data);
    const double r_star = r_nu(sc, SpectralSummary::of(agg.H_n));
    const double w = omega(sc.nu, r_n * r_star);
    const double w2 = w * w;
    return 24.0 * w2 * effdim.value / n + C * K1sq * w2 * log_term * omega_norm / n;
}

double calibrated_radius(StatisticKind kind, const LossModel& model, const Dataset& data, const FitResult& fit,
                         const EffDimReport& effdim, double delta, Calibration calibration,
                         const AssumptionConstants& constants, const RadiusOptions& options) {
    check_delta(delta);
    if (!fit.converged) throw NonConverged("confidence sets need a converged fit");
    switch (calibration) {
    case Calibration::explicit_constant:
        return explicit_radius(model, data, fit, effdim, delta, constants, options.C);
    case Calibration::oracle_mc: {
        if (options.process == nullptr)
            throw MissingSampler("oracle_mc calibration needs a data-generating process");
        const auto cal = oracle_statistics(model, *options.process, data.n(), options.calibration_reps,
                                           options.seed, {}, options.exec);
        if (cal.n_failed * 10 > options.calibration_reps)
            throw TooManyFailures(std::to_string(cal.n_failed) + " of " +
                                  std::to_string(options.calibration_reps) + " calibration replications failed");
        return quantile_type7(kind == StatisticKind::wald ? cal.wald : cal.lr, 1.0 - delta);
    }
    case Calibration::bootstrap: {
        BootstrapConfig bc;
        bc.B = options.B;
        bc.delta = delta;
        bc.seed = options.seed;
        bc.exec = options.exec;
        return bootstrap_quantile(model, data, fit, bc, kind).quantile;
    }
    }
    throw Error("unknown calibration");
}

}  // namespace

double wald_radius(const LossModel& model, const Dataset& data, const FitResult& fit, const EffDimReport& effdim,
                   double delta, Calibration calibration, const AssumptionConstants& constants,
                   const RadiusOptions& options) {
    return calibrated_radius(StatisticKind::wald, model, data, fit, effdim, delta, calibration, constants, options);
}

double lr_radius(const LossModel& model, const Dataset& data, const FitResult& fit, const EffDimReport& effdim,
                 double delta, Calibration calibration, const AssumptionConstants& constants,
                 const RadiusOptions& options) {
    return calibrated_radius(StatisticKind::lr, model, data, fit, effdim, delta, calibration, constants, options);
}

ConfidenceSet make_confidence_set(StatisticKind kind, const FitResult& fit, double sq_radius, double delta,
                                  Calibration calibration) {
    ConfidenceSet set;
    set.kind = kind;
    set.center = fit.theta_n;
    set.shape = fit.aggregates_at_opt.H_n;
    set.sq_radius = sq_radius;
    set.delta = delta;
    set.calibration = calibration;
    set.validate();
    return set;
}

bool set_membership(const ConfidenceSet& set, const FitResult& fit, const LossModel& model, const Dataset& data,
                    const Vector& theta) {
    if (theta.size() != set.center.size())
        throw DimensionMismatch("theta has length " + std::to_string(theta.size()) + ", set has dimension " +
                                std::to_string(set.center.size()));
    if (set.kind == StatisticKind::wald) return quadratic_form(set.shape, theta - set.center) <= set.sq_radius;
    if (fit.theta_n.size() != theta.size()) throw DimensionMismatch("fit does not match the set dimension");
    const double gap = aggregates(model, data, theta, kValue).L_n - fit.aggregates_at_opt.L_n;
    return 2.0 * gap <= set.sq_radius;
}

SampleSizeBranches critical_sample_branches(const ScParams& params, const SpectralSummary& spec,
                                            const AssumptionConstants& constants, double d_star, int d,
                                            double delta, double C) {
    params.validate();
    constants.validate();
    check_delta(delta);
    if (!(params.nu >= 2.0 && params.nu < 3.0))
        throw DomainError("critical_sample_size needs nu in [2, 3), got " + std::to_string(params.nu));
    if (d < 1 || !(d_star > 0.0) || !(C >= 0.0)) throw DomainError("invalid dimension or constant");
    SampleSizeBranches b;
    const double s2 = constants.sigma_H * constants.sigma_H;
    b.concentration = 4.0 * (constants.K2 + 2.0 * s2) * std::log(4.0 * d / delta);
    const double r_star = r_nu(params, spec);
    const double K = k_nu(params.nu);
    const double inner = r_star * r_star * constants.K1 * constants.K1 * d_star *
                         std::log(std::numbers::e / delta) / (K * K);
    b.localization = C * std::pow(inner, 1.0 / (3.0 - params.nu));
    return b;
}

std::size_t critical_sample_size(const ScParams& params, const SpectralSummary& spec,
                                 const AssumptionConstants& constants, double d_star, int d, double delta,
                                 double C) {
    const auto b = critical_sample_branches(params, spec, constants, d_star, d, delta, C);
    return static_cast<std::size_t>(std::ceil(std::max(b.concentration, b.localization)));
}

}  // namespace gsc
