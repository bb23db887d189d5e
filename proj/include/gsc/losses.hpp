#pragma once

// Per-sample losses with analytic derivatives and declared self-concordance
// parameters: squared, logistic and Poisson regression, finite-label
// exponential-family GLMs (softmax included), and score matching for
// exponential families.

#include <gsc/dataset.hpp>
#include <gsc/scfun.hpp>
#include <gsc/types.hpp>

#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace gsc {

enum class LossKind { squared, logistic, poisson, expfam_glm, score_matching };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// Per-sample quadratic form l(theta; z) = 1/2 theta' A theta - b' theta + c.
struct ScoreMatchingTriple {
    Matrix A;
    Vector b;
    double c = 0.0;
};

/// Writes t(x, label) into `out` (length = model dimension).
using FeatureMap =
    std::function<void(const Eigen::Ref<const Vector>& x, int label, Eigen::Ref<Vector> out)>;

/// Maps a raw sample z to its score-matching triple.
using TripleMap = std::function<ScoreMatchingTriple(const Eigen::Ref<const Vector>& z)>;

/// Which sums `LossModel::accumulate` adds to.
enum AccumulateFlags : unsigned {
    kValue = 1u,
    kGrad = 2u,
    kHess = 4u,
    kOuter = 8u,
    kAll = 15u,
};

/// Running weighted sums of loss value, gradient, Hessian and gradient outer
/// products. Only the lower triangles of `hess` and `outer` are written.
struct LossAccumulator {
    double value = 0.0;
    Vector grad;
    Matrix hess;
    Matrix outer;

    explicit LossAccumulator(Eigen::Index dim = 0);
    void reset();
    LossAccumulator& operator+=(const LossAccumulator& other);
};

class LossModel {
public:
    static LossModel squared(int dim);
    /// Labels in {-1, +1}. `R` is the declared pseudo self-concordance constant.
    static LossModel logistic(int dim, double R);
    /// Non-negative integer counts with log link.
    static LossModel poisson(int dim, double R);
    /// Conditional exponential family over labels {0, ..., num_labels - 1}
    /// with sufficient statistic t(x, y), ||t||_2 <= M. Declared (2M, 2).
    static LossModel expfam_glm(int dim, int num_labels, double M, FeatureMap t);
    /// Multinomial logistic regression on `features`-dimensional inputs with
    /// ||x||_2 <= M; parameter stacks one weight vector per class.
    static LossModel softmax(int features, int num_labels, double M);
    static LossModel score_matching(int dim, TripleMap triple);
    /// Score matching for independent univariate Gaussians on R^p with
    /// t(z) = (z_1..z_p, -z_1^2/2..-z_p^2/2), h = 0. Parameter dimension 2p.
    static LossModel gaussian_score_matching(int p);

    LossKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    const ScParams& sc() const noexcept { return sc_; }
    int num_labels() const noexcept { return num_labels_; }
    double feature_bound() const noexcept { return feature_bound_; }

    /// True for losses of the form phi(y, theta' x).
    bool linear_predictor() const noexcept;
    bool supervised() const noexcept { return kind_ != LossKind::score_matching; }

    /// Copy with R declared from the data: 2 max ||x_i|| (logistic),
    /// max ||x_i|| (poisson). Other kinds are returned unchanged.
    LossModel declared_for(const Dataset& data) const;
    LossModel with_sc(ScParams sc) const;

    double value(const Vector& theta, const ObsRef& z) const;
    Vector grad(const Vector& theta, const ObsRef& z) const;
    Matrix hess(const Vector& theta, const ObsRef& z) const;

    /// acc += weight * (value, grad, hess, grad grad') restricted to `flags`.
    void accumulate(const Vector& theta, const ObsRef& z, double weight, unsigned flags,
                    LossAccumulator& acc) const;

    /// Checks dimensions and label admissibility for every row.
    void validate(const Dataset& data) const;

private:
    LossModel(LossKind kind, int dim, ScParams sc);

    void check(const Vector& theta, const ObsRef& z) const;

    LossKind kind_;
    int dim_;
    ScParams sc_;
    int num_labels_ = 0;
    double feature_bound_ = 0.0;
    std::shared_ptr<const FeatureMap> features_;
    std::shared_ptr<const TripleMap> triple_;
};

/// D^3 l(theta; z)[u, u, v] by central differences of u' H(theta + s v) u.
/// Verification aid for the self-concordance inequality.
double loss_third_dir(const LossModel& model, const Vector& theta, const ObsRef& z,
                      const Vector& u, const Vector& v);

/// Assembles (A, b, c) from derivatives of the sufficient statistic t and the
/// base measure h at one sample. `t_grad` holds one row d t / d z_k per
/// sample coordinate; `t_lap` is sum_k d^2 t / d z_k^2.
ScoreMatchingTriple score_matching_assemble(const Matrix& t_grad, const Vector& t_lap,
                                            const Vector& h_grad, double h_lap);

}  // namespace gsc
