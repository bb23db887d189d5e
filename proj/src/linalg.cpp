#include <gsc/linalg.hpp>

#include <gsc/errors.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace gsc {

namespace {

bool factor_ok(const Eigen::LLT<Matrix>& llt, double pivot_floor) {
    if (llt.info() != Eigen::Success) return false;
    const Vector diag = llt.matrixLLT().diagonal();
    return diag.allFinite() && (diag.array() * diag.array()).minCoeff() > pivot_floor;
}

}  // namespace

SpdFactor::SpdFactor(const Matrix& spd, bool allow_jitter) {
    if (spd.rows() != spd.cols() || spd.rows() == 0) throw DimensionMismatch("SpdFactor needs a non-empty square matrix");
    const double d = static_cast<double>(spd.rows());
    const double scale = spd.trace() / d;
    if (!std::isfinite(scale) || !(scale > 0.0)) throw SingularHessian("matrix has non-positive trace");
    const double pivot_floor = 1e-12 * scale;

    llt_.compute(spd);
    if (factor_ok(llt_, pivot_floor)) return;
    if (allow_jitter) {
        Matrix jittered = spd;
        jittered.diagonal().array() += 1e-10 * scale;
        llt_.compute(jittered);
        jittered_ = true;
        if (factor_ok(llt_, pivot_floor)) return;
    }
    throw SingularHessian("matrix is not numerically positive definite");
}

double SpdFactor::inverse_quadratic(const Vector& rhs) const {
    const Vector w = llt_.matrixL().solve(rhs);
    return w.squaredNorm();
}

double SpdFactor::trace_inverse_times(const Matrix& B) const {
    // trace(L^-T L^-1 B) = trace(L^-1 B L^-T).
    Matrix W = llt_.matrixL().solve(B);
    W = llt_.matrixL().solve(W.transpose().eval());  // eval: the solve writes into W
    return W.trace();
}

double SpdFactor::max_whitened_eigenvalue(const Matrix& B) const {
    Matrix W = llt_.matrixL().solve(B);
    W = llt_.matrixL().solve(W.transpose().eval());  // eval: the solve writes into W
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (W + W.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

double quantile_type7(std::span<const double> values, double prob) {
    if (values.empty()) throw Error("quantile of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace gsc
