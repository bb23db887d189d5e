#include <gsc/estimate.hpp>

#include <gsc/errors.hpp>
#include <gsc/linalg.hpp>

#include <cmath>
#include <exception>
#include <string>

namespace gsc {

namespace {

void check_weights(const Dataset& data, std::span<const double> weights) {
    if (weights.empty()) return;
    if (weights.size() != data.n())
        throw DimensionMismatch("weight vector has length " + std::to_string(weights.size()) + ", dataset has " +
                                std::to_string(data.n()) + " rows");
    for (double w : weights)
        if (!std::isfinite(w)) throw DomainError("weights must be finite");
}

void accumulate_rows(const LossModel& model, const Dataset& data, const Vector& theta, unsigned flags,
                     std::span<const double> weights, std::size_t begin, std::size_t end,
                     LossAccumulator& acc) {
    for (std::size_t i = begin; i < end; ++i)
        model.accumulate(theta, data.row(i), weights.empty() ? 1.0 : weights[i], flags, acc);
}

EmpiricalAggregates finalize(const LossAccumulator& acc, std::size_t n, unsigned flags) {
    const double inv_n = 1.0 / static_cast<double>(n);
    EmpiricalAggregates out;
    out.n = n;
    if (flags & kValue) out.L_n = acc.value * inv_n;
    if (flags & kGrad) out.S_n = acc.grad * inv_n;
    if (flags & kHess) out.H_n = Matrix(acc.hess.selfadjointView<Eigen::Lower>()) * inv_n;
    if (flags & kOuter) out.G_n = Matrix(acc.outer.selfadjointView<Eigen::Lower>()) * inv_n;
    return out;
}

void check_inputs(const LossModel& model, const Dataset& data, const Vector& theta,
                  std::span<const double> weights) {
    if (data.n() == 0) throw EmptyDataset("dataset has no rows");
    if (theta.size() != model.dim())
        throw DimensionMismatch("theta has length " + std::to_string(theta.size()) + ", model expects " +
                                std::to_string(model.dim()));
    if (model.supervised() && !data.has_response())
        throw DimensionMismatch("supervised loss needs a response column y");
    check_weights(data, weights);
}

// Logistic/Poisson models built with R = 0 take their constant from the data.
ScParams effective_sc(const LossModel& model, const Dataset& data) {
    if (model.sc().R == 0.0) return model.declared_for(data).sc();
    return model.sc();
}

}  // namespace

void SolverOptions::validate() const {
    if (!(tol > 0.0)) throw DomainError("solver tolerance must be positive");
    if (max_iter < 1) throw DomainError("solver max_iter must be >= 1");
    if (!(ridge_floor >= 0.0)) throw DomainError("ridge_floor must be non-negative");
}

EmpiricalAggregates aggregates(const LossModel& model, const Dataset& data, const Vector& theta, unsigned flags,
                               std::span<const double> weights) {
    check_inputs(model, data, theta, weights);
    LossAccumulator acc(model.dim());
    accumulate_rows(model, data, theta, flags, weights, 0, data.n(), acc);
    return finalize(acc, data.n(), flags);
}

EmpiricalAggregates aggregates_parallel(const LossModel& model, const Dataset& data, const Vector& theta,
                                        std::size_t chunk_rows, unsigned flags, std::span<const double> weights) {
    check_inputs(model, data, theta, weights);
    if (chunk_rows == 0) throw DomainError("chunk_rows must be positive");
    const std::size_t n = data.n();
    const std::size_t chunks = (n + chunk_rows - 1) / chunk_rows;
    std::vector<LossAccumulator> partial(chunks, LossAccumulator(model.dim()));
    std::vector<std::exception_ptr> errors(chunks);

    const auto count = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < count; ++c) {
        const auto chunk = static_cast<std::size_t>(c);
        try {
            accumulate_rows(model, data, theta, flags, weights, chunk * chunk_rows,
                            std::min(n, (chunk + 1) * chunk_rows), partial[chunk]);
        } catch (...) {
            errors[chunk] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    LossAccumulator total(model.dim());
    for (const auto& p : partial) total += p;
    return finalize(total, n, flags);
}

ScParams empirical_sc(const ScParams& per_sample, std::size_t n) {
    ScParams out = per_sample;
    out.R = per_sample.R * std::pow(static_cast<double>(n), per_sample.nu / 2.0 - 1.0);
    return out;
}

FitResult fit_weighted(const LossModel& model, const Dataset& data, std::span<const double> weights,
                       const SolverOptions& opts) {
    opts.validate();
    model.validate(data);
    check_weights(data, weights);

    auto eval = [&](const Vector& theta, unsigned flags) {
        return opts.chunk_rows > 0 ? aggregates_parallel(model, data, theta, opts.chunk_rows, flags, weights)
                                   : aggregates(model, data, theta, flags, weights);
    };
    constexpr unsigned kNewtonFlags = kValue | kGrad | kHess;
    const ScParams sc_n = empirical_sc(effective_sc(model, data), data.n());

    FitResult result;
    Vector theta = Vector::Zero(model.dim());
    EmpiricalAggregates agg = eval(theta, kNewtonFlags);
    result.objective_trace.push_back(agg.L_n);
    std::vector<double> theta_norms{0.0};

    for (;;) {
        Matrix system = agg.H_n;
        if (opts.ridge_floor > 0.0) system.diagonal().array() += opts.ridge_floor;
        const SpdFactor factor(system);
        const Vector step = -factor.solve(agg.S_n);
        const double decrement = std::sqrt(std::max(0.0, -agg.S_n.dot(step)));
        result.newton_decrement = decrement;
        if (decrement <= opts.tol || result.iterations >= opts.max_iter) break;

        double alpha = std::min(1.0, 1.0 / (1.0 + d_nu(sc_n, step, decrement)));
        Vector candidate;
        EmpiricalAggregates next;
        for (int halving = 0;; ++halving) {
            candidate = theta + alpha * step;
            try {
                next = eval(candidate, kNewtonFlags);
            } catch (const NumericOverflow&) {
                if (halving >= 60) throw;
                alpha *= 0.5;
                continue;
            }
            if (next.L_n <= agg.L_n + 1e-14 * (1.0 + std::abs(agg.L_n)) || halving >= 30) break;
            alpha *= 0.5;
        }
        theta = std::move(candidate);
        agg = std::move(next);
        ++result.iterations;
        result.objective_trace.push_back(agg.L_n);
        theta_norms.push_back(theta.norm());
    }

    result.theta_n = theta;
    result.aggregates_at_opt = eval(theta, kAll);
    const bool stationary = result.newton_decrement <= opts.tol;
    bool certified = true;
    if (opts.certify) {
        Certificate cert;
        try {
            cert = certify_unique_minimizer(sc_n, SpectralSummary::of(result.aggregates_at_opt.H_n),
                                            result.newton_decrement);
        } catch (const SingularHessian&) {
            cert.passes = false;
        }
        result.certificate = cert;
        certified = cert.passes;
    }
    result.converged = stationary && certified;

    // Norm still growing over the trailing iterations: no finite minimizer.
    bool growing = theta_norms.size() > 10;
    for (std::size_t i = theta_norms.size() > 10 ? theta_norms.size() - 10 : 0; growing && i + 1 < theta_norms.size(); ++i)
        growing = theta_norms[i + 1] > theta_norms[i];
    result.diverging = (stationary && !certified) || (!stationary && growing);
    return result;
}

LocalizationCertificate localization_certificate(const LossModel& model, const Dataset& data,
                                                 const Vector& theta_ref) {
    const auto agg = aggregates(model, data, theta_ref, kGrad | kHess);
    const SpdFactor factor(agg.H_n, false);
    LocalizationCertificate cert;
    cert.score_norm = std::sqrt(factor.inverse_quadratic(agg.S_n));
    cert.r_star = r_nu(empirical_sc(effective_sc(model, data), data.n()), SpectralSummary::of(agg.H_n));
    cert.k_nu = k_nu(model.sc().nu);
    cert.passes = cert.r_star * cert.score_norm <= cert.k_nu;
    cert.bound = cert.passes ? 4.0 * cert.score_norm : 0.0;
    return cert;
}

}  // namespace gsc
