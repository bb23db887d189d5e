#pragma once

#include <gsc/types.hpp>

#include <span>

namespace gsc {

/// Cholesky factor of a symmetric positive definite matrix. Construction
/// retries once with diagonal jitter 1e-10 * trace / d and throws
/// SingularHessian if the matrix is still not numerically positive definite
/// (smallest pivot <= 1e-12 * trace / d).
class SpdFactor {
public:
    explicit SpdFactor(const Matrix& spd, bool allow_jitter = true);

    Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }
    Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }

    /// rhs' A^{-1} rhs.
    double inverse_quadratic(const Vector& rhs) const;

    /// trace(A^{-1} B).
    double trace_inverse_times(const Matrix& B) const;

    /// Largest eigenvalue of L^{-1} B L^{-T}, i.e. of A^{-1/2} B A^{-1/2}.
    double max_whitened_eigenvalue(const Matrix& B) const;

    bool jittered() const noexcept { return jittered_; }

private:
    Eigen::LLT<Matrix> llt_;
    bool jittered_ = false;
};

/// ||v||_A^2 = v' A v.
inline double quadratic_form(const Matrix& A, const Vector& v) { return v.dot(A * v); }

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `prob` in [0, 1]. The input is copied and sorted.
double quantile_type7(std::span<const double> values, double prob);

}  // namespace gsc
