#pragma once

// Test-side oracles: quadrature, finite differences, small data builders.

#include <gsc/dataset.hpp>
#include <gsc/losses.hpp>
#include <gsc/rng.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>

namespace gsc::test {

inline double integrate01(const std::function<double(double)>& f) {
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14, &err);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline Vector fd_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector a = x, b = x;
        a(i) += h;
        b(i) -= h;
        g(i) = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-6) {
    Matrix J(f(x).size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector a = x, b = x;
        a(i) += h;
        b(i) -= h;
        J.col(i) = (f(a) - f(b)) / (2.0 * h);
    }
    return J;
}

inline Vector random_normal(Eigen::Index d, CounterRng& rng, double scale = 1.0) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
    return v;
}

inline Dataset make_dataset(std::initializer_list<std::initializer_list<double>> rows, bool last_is_y) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto width = static_cast<Eigen::Index>(rows.begin()->size());
    const auto d = last_is_y ? width - 1 : width;
    RowMatrix X(n, d);
    Vector y(n);
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) {
            if (j < d)
                X(i, j) = v;
            else
                y(i) = v;
            ++j;
        }
        ++i;
    }
    std::optional<Vector> yy;
    if (last_is_y) yy = y;
    return Dataset(X, yy);
}

}  // namespace gsc::test
