#include <gsc/scfun.hpp>

#include <gsc/errors.hpp>

#include <array>
#include <cmath>
#include <string>

namespace gsc {

namespace {

// Closed forms lose accuracy to cancellation near these points.
constexpr double kSmallTau = 1e-4;
constexpr double kBranchWidth = 1e-6;
// omega_dbar near nu = 4 loses about eps / (a tau) in the closed form, so the
// series has to cover a wider band there to stay at 1e-8 for |tau| >= 1e-4.
constexpr double kDbarNu4Width = 1e-3;

void check_domain(double nu, double tau) {
    if (!(nu >= 2.0))
        throw DomainError("self-concordance order nu must be >= 2, got " + std::to_string(nu));
    if (nu > 2.0 && !(tau < 1.0))
        throw DomainError("omega_nu requires tau < 1 when nu > 2, got tau = " + std::to_string(tau));
}

// Taylor coefficients of omega_nu around 0: omega_nu(s) = sum_k c_k s^k.
std::array<double, 4> omega_taylor(double nu) {
    if (nu == 2.0) return {1.0, 1.0, 0.5, 1.0 / 6.0};
    const double p = 2.0 / (nu - 2.0);
    return {1.0, p, p * (p + 1.0) / 2.0, p * (p + 1.0) * (p + 2.0) / 6.0};
}

// -expm1(s L) / s expanded in s.
double neg_expm1_over_s_series(double s, double L) {
    const double sL = s * L;
    return -L * (1.0 + sL / 2.0 + sL * sL / 6.0 + sL * sL * sL / 24.0);
}

// m-th derivative at s = 1 of u(s) = (1 - e^{sL}) / s, where e^L = 1 - tau.
double u_derivative_at_one(int m, double L, double tau) {
    double sum = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= m; ++k) {
        const double f_k = (k == 0) ? tau : -std::pow(L, k) * (1.0 - tau);
        const int j = m - k;
        double g_j = std::tgamma(j + 1.0);
        if (j % 2 == 1) g_j = -g_j;
        sum += binom * f_k * g_j;
        binom = binom * (m - k) / (k + 1);
    }
    return sum;
}

}  // namespace

void ScParams::validate() const {
    if (!(R >= 0.0)) throw DomainError("self-concordance constant R must be >= 0");
    if (!(nu >= 2.0)) throw DomainError("self-concordance order nu must be >= 2");
}

void SpectralSummary::validate() const {
    if (!(lambda_min > 0.0) || !(lambda_min <= lambda_max))
        throw DomainError("spectral summary requires 0 < lambda_min <= lambda_max");
}

SpectralSummary SpectralSummary::of(const Matrix& spd) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(spd, Eigen::EigenvaluesOnly);
    SpectralSummary s{eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
    if (!(s.lambda_min > 0.0)) throw SingularHessian("matrix is not positive definite");
    return s;
}

double omega(double nu, double tau) {
    check_domain(nu, tau);
    if (nu == 2.0) return std::exp(tau);
    return std::exp(-2.0 / (nu - 2.0) * std::log1p(-tau));
}

double omega_bar(double nu, double tau) {
    check_domain(nu, tau);
    if (std::abs(tau) < kSmallTau) {
        const auto c = omega_taylor(nu);
        return c[0] + tau * (c[1] / 2.0 + tau * (c[2] / 3.0 + tau * c[3] / 4.0));
    }
    if (nu == 2.0) return std::expm1(tau) / tau;

    const double L = std::log1p(-tau);
    if (nu == 4.0) return -L / tau;
    const double a = (nu - 4.0) / (nu - 2.0);
    if (std::abs(nu - 4.0) < kBranchWidth) return neg_expm1_over_s_series(a, L) / tau;
    return -std::expm1(a * L) / (a * tau);
}

double omega_dbar(double nu, double tau) {
    check_domain(nu, tau);
    if (std::abs(tau) < kSmallTau) {
        const auto c = omega_taylor(nu);
        return c[0] / 2.0 + tau * (c[1] / 6.0 + tau * (c[2] / 12.0 + tau * c[3] / 20.0));
    }
    const double tau2 = tau * tau;
    if (nu == 2.0) return (std::expm1(tau) - tau) / tau2;

    const double L = std::log1p(-tau);
    if (nu == 3.0) return -(tau + L) / tau2;
    if (nu == 4.0) return ((1.0 - tau) * L + tau) / tau2;

    const double a = (nu - 4.0) / (nu - 2.0);
    const double b = a + 1.0;
    if (std::abs(nu - 4.0) < kDbarNu4Width) {
        // (tau - u(1 + a)) / (a tau^2) with u(1) = tau, expanded in a.
        double series = 0.0;
        double a_pow = 1.0;
        double fact = 1.0;
        for (int m = 1; m <= 7; ++m) {
            fact *= m;
            series += u_derivative_at_one(m, L, tau) * a_pow / fact;
            a_pow *= a;
        }
        return -series / tau2;
    }
    const double u_b = (std::abs(nu - 3.0) < kBranchWidth)
                           ? neg_expm1_over_s_series(b, L)
                           : -std::expm1(b * L) / b;
    return (tau - u_b) / (a * tau2);
}

double d_nu(const ScParams& params, const Vector& step, double hess_norm_of_step) {
    params.validate();
    const double norm2 = step.norm();
    if (norm2 == 0.0) return 0.0;
    if (params.nu == 2.0) return params.R * norm2;
    return (params.nu / 2.0 - 1.0) * params.R * std::pow(norm2, 3.0 - params.nu) *
           std::pow(hess_norm_of_step, params.nu - 2.0);
}

double r_nu(const ScParams& params, const SpectralSummary& spec) {
    params.validate();
    spec.validate();
    const double nu = params.nu;
    if (nu == 2.0) return params.R / std::sqrt(spec.lambda_min);
    const double lambda = (nu <= 3.0) ? spec.lambda_min : spec.lambda_max;
    return (nu / 2.0 - 1.0) * std::pow(lambda, (nu - 3.0) / 2.0) * params.R;
}

double k_nu(double nu) {
    check_domain(nu, 0.0);
    if (nu == 2.0) return 0.5;
    if (nu == 3.0) return 0.25;

    auto phi = [nu](double t) { return omega_dbar(nu, -t); };
    constexpr double tol = 1e-10;

    // phi decreases from 1/2 towards 0; bracket its crossing of 1/4.
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (phi(hi) >= 0.25) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 60) throw ConvergenceError("k_nu: could not bracket omega_dbar(-t) = 1/4");
    }
    int iterations = 0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) >= 0.25 ? lo : hi) = mid;
        if (++iterations > 200) throw ConvergenceError("k_nu: bisection did not converge");
    }
    const double t_max = 1.0 - tol;
    const double t_star = std::min(t_max, lo);
    return std::min(0.5, t_star * phi(t_star));
}

Certificate certify_unique_minimizer(const ScParams& params, const SpectralSummary& spec,
                                     double newton_norm) {
    Certificate cert;
    cert.passes = r_nu(params, spec) * newton_norm <= k_nu(params.nu);
    cert.radius_bound = cert.passes ? 4.0 * newton_norm : 0.0;
    return cert;
}

}  // namespace gsc
