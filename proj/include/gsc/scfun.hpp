#pragma once

// Kernel functions of generalized self-concordance and the certificates
// built on them. Everything here is a pure scalar function.

#include <gsc/types.hpp>

namespace gsc {

/// Declared (R, nu) of a generalized self-concordant function.
struct ScParams {
    double R = 0.0;
    double nu = 2.0;

    /// Throws DomainError unless R >= 0 and nu >= 2.
    void validate() const;
};

/// Extreme eigenvalues of a positive definite Hessian.
struct SpectralSummary {
    double lambda_min = 1.0;
    double lambda_max = 1.0;

    void validate() const;
    static SpectralSummary of(const Matrix& spd);
};

struct Certificate {
    bool passes = false;
    double radius_bound = 0.0;
};

/// omega_nu(tau): e^tau for nu = 2, (1 - tau)^(-2/(nu-2)) for nu > 2.
double omega(double nu, double tau);

/// Average of omega_nu over [0, tau].
double omega_bar(double nu, double tau);

/// Integral of t * omega_bar(t tau) over t in [0, 1].
double omega_dbar(double nu, double tau);

/// Self-concordance distance between x and y = x + step. `hess_norm_of_step`
/// is the step measured in the Hessian metric at x.
double d_nu(const ScParams& params, const Vector& step, double hess_norm_of_step);

/// Constant converting the local norm at x into a bound on d_nu.
double r_nu(const ScParams& params, const SpectralSummary& spec);

/// Largest K such that omega_dbar(nu, -t) * t <= K forces t < 1 + [nu == 2]
/// and omega_dbar(nu, -t) >= 1/4. Exactly 1/2 at nu = 2 and 1/4 at nu = 3.
double k_nu(double nu);

/// Existence/uniqueness certificate for the minimizer of a (R, nu) function
/// from the geometry at a single point. `newton_norm` is the gradient in the
/// inverse-Hessian metric.
Certificate certify_unique_minimizer(const ScParams& params,
                                     const SpectralSummary& spec,
                                     double newton_norm);

}  // namespace gsc
