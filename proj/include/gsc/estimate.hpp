#pragma once

// Empirical risk aggregates, the damped-Newton empirical risk minimizer and
// the finite-sample localization certificate.

#include <gsc/dataset.hpp>
#include <gsc/losses.hpp>
#include <gsc/scfun.hpp>

#include <optional>
#include <span>
#include <vector>

namespace gsc {

/// Sample averages at one theta: L_n, S_n, H_n and G_n = mean of S S'.
struct EmpiricalAggregates {
    double L_n = 0.0;
    Vector S_n;
    Matrix H_n;
    Matrix G_n;
    std::size_t n = 0;
};

struct SolverOptions {
    double tol = 1e-10;        // stop when ||S_n||_{H_n^{-1}} <= tol
    int max_iter = 100;
    double ridge_floor = 0.0;  // added to diag(H_n) for the Newton system only
    bool certify = true;       // existence certificate at the final iterate
    std::size_t chunk_rows = 0;  // > 0: fixed-tree OpenMP aggregation

    void validate() const;
};

struct FitResult {
    Vector theta_n;
    EmpiricalAggregates aggregates_at_opt;
    double newton_decrement = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Iterates ran away: the minimizer most likely does not exist
    /// (e.g. separable logistic data).
    bool diverging = false;
    std::optional<Certificate> certificate;
    /// L_n at theta = 0 and after each accepted step.
    std::vector<double> objective_trace;
};

struct LocalizationCertificate {
    bool passes = false;
    double score_norm = 0.0;  // ||S_n(theta_ref)||_{H_n(theta_ref)^{-1}}
    double r_star = 0.0;      // R*_{n,nu} from the spectrum of H_n(theta_ref)
    double k_nu = 0.0;
    double bound = 0.0;       // 4 * score_norm when passes
};

/// Serial reference: weighted sums in index order divided by n. Empty
/// `weights` means unit weights. Only quantities selected by `flags` are filled.
EmpiricalAggregates aggregates(const LossModel& model, const Dataset& data, const Vector& theta,
                               unsigned flags = kAll, std::span<const double> weights = {});

/// OpenMP version with a reduction tree fixed by `chunk_rows`: chunk partial
/// sums are combined in chunk order, so results do not depend on the number
/// of threads.
EmpiricalAggregates aggregates_parallel(const LossModel& model, const Dataset& data, const Vector& theta,
                                        std::size_t chunk_rows, unsigned flags = kAll,
                                        std::span<const double> weights = {});

/// Damped Newton from theta = 0 on n^{-1} sum w_i l(theta; z_i). Throws
/// SingularHessian when the Newton system cannot be factorized; a run that
/// stops without convergence is returned with converged = false.
FitResult fit_weighted(const LossModel& model, const Dataset& data, std::span<const double> weights,
                       const SolverOptions& opts = {});

inline FitResult fit_erm(const LossModel& model, const Dataset& data, const SolverOptions& opts = {}) {
    return fit_weighted(model, data, {}, opts);
}

/// Self-concordance parameters of L_n: (n^{nu/2 - 1} R, nu).
ScParams empirical_sc(const ScParams& per_sample, std::size_t n);

LocalizationCertificate localization_certificate(const LossModel& model, const Dataset& data,
                                                 const Vector& theta_ref);

}  // namespace gsc
