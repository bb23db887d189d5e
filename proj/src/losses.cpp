#include <gsc/losses.hpp>

#include <gsc/errors.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace gsc {

namespace {

// exp() overflows past this argument.
constexpr double kMaxExpArg = 709.0;

struct LinkDerivs {
    double value;
    double d1;
    double d2;
};

double softplus(double m) { return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m)); }

// sigma(m) = 1 / (1 + e^{-m}) without overflow.
double sigmoid(double m) {
    if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

LinkDerivs link_derivs(LossKind kind, double eta, double y) {
    switch (kind) {
    case LossKind::squared:
        return {0.5 * (y - eta) * (y - eta), eta - y, 1.0};
    case LossKind::logistic: {
        const double e = std::exp(-std::abs(eta));
        return {softplus(-y * eta), -y * sigmoid(-y * eta), e / ((1.0 + e) * (1.0 + e))};
    }
    case LossKind::poisson: {
        if (eta > kMaxExpArg)
            throw NumericOverflow("poisson: exp(theta'x) overflows at theta'x = " + std::to_string(eta));
        const double mu = std::exp(eta);
        return {-y * eta + mu, mu - y, mu};
    }
    default:
        break;
    }
    throw Error("link_derivs called for a non linear-predictor loss");
}

void check_label(LossKind kind, double y, int num_labels) {
    switch (kind) {
    case LossKind::squared:
        if (!std::isfinite(y)) throw DimensionMismatch("squared loss requires a response value");
        return;
    case LossKind::logistic:
        if (y != 1.0 && y != -1.0)
            throw InvalidLabel("logistic loss requires y in {-1, +1}, got " + std::to_string(y));
        return;
    case LossKind::poisson:
        if (std::isnan(y)) throw DimensionMismatch("poisson loss requires a response value");
        if (y < 0.0 || y != std::floor(y))
            throw InvalidLabel("poisson loss requires a non-negative integer count, got " + std::to_string(y));
        return;
    case LossKind::expfam_glm:
        if (std::isnan(y)) throw DimensionMismatch("expfam_glm loss requires a label");
        if (y < 0.0 || y != std::floor(y) || y >= num_labels)
            throw InvalidLabel("label " + std::to_string(y) + " outside {0, ..., " +
                               std::to_string(num_labels - 1) + "}");
        return;
    case LossKind::score_matching:
        return;
    }
}

// Sufficient statistics t(x, k) for every label, one per row.
Matrix label_statistics(const FeatureMap& t, const Eigen::Ref<const Vector>& x, int num_labels,
                        int dim) {
    Matrix T(dim, num_labels);
    for (int k = 0; k < num_labels; ++k) t(x, k, T.col(k));
    return T;
}

}  // namespace

std::string_view to_string(LossKind kind) {
    switch (kind) {
    case LossKind::squared: return "squared";
    case LossKind::logistic: return "logistic";
    case LossKind::poisson: return "poisson";
    case LossKind::expfam_glm: return "expfam_glm";
    case LossKind::score_matching: return "score_matching";
    }
    return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
    for (auto kind : {LossKind::squared, LossKind::logistic, LossKind::poisson,
                      LossKind::expfam_glm, LossKind::score_matching})
        if (to_string(kind) == name) return kind;
    throw Error("unknown loss kind '" + std::string(name) + "'");
}

LossAccumulator::LossAccumulator(Eigen::Index dim)
    : grad(Vector::Zero(dim)), hess(Matrix::Zero(dim, dim)), outer(Matrix::Zero(dim, dim)) {}

void LossAccumulator::reset() {
    value = 0.0;
    grad.setZero();
    hess.setZero();
    outer.setZero();
}

LossAccumulator& LossAccumulator::operator+=(const LossAccumulator& other) {
    value += other.value;
    grad += other.grad;
    hess += other.hess;
    outer += other.outer;
    return *this;
}

LossModel::LossModel(LossKind kind, int dim, ScParams sc) : kind_(kind), dim_(dim), sc_(sc) {
    if (dim <= 0) throw DimensionMismatch("loss dimension must be positive");
    sc_.validate();
}

LossModel LossModel::squared(int dim) { return LossModel(LossKind::squared, dim, {0.0, 2.0}); }

LossModel LossModel::logistic(int dim, double R) { return LossModel(LossKind::logistic, dim, {R, 2.0}); }

LossModel LossModel::poisson(int dim, double R) { return LossModel(LossKind::poisson, dim, {R, 2.0}); }

LossModel LossModel::expfam_glm(int dim, int num_labels, double M, FeatureMap t) {
    if (num_labels < 2) throw DomainError("expfam_glm needs at least two labels");
    if (!(M > 0.0)) throw DomainError("expfam_glm needs a positive statistic bound M");
    LossModel model(LossKind::expfam_glm, dim, {2.0 * M, 2.0});
    model.num_labels_ = num_labels;
    model.feature_bound_ = M;
    model.features_ = std::make_shared<const FeatureMap>(std::move(t));
    return model;
}

LossModel LossModel::softmax(int features, int num_labels, double M) {
    // Class 0 is the reference class so the Hessian is nonsingular.
    const int dim = features * (num_labels - 1);
    FeatureMap t = [features](const Eigen::Ref<const Vector>& x, int label, Eigen::Ref<Vector> out) {
        out.setZero();
        if (label > 0) out.segment((label - 1) * features, features) = x;
    };
    return expfam_glm(dim, num_labels, M, std::move(t));
}

LossModel LossModel::score_matching(int dim, TripleMap triple) {
    LossModel model(LossKind::score_matching, dim, {0.0, 2.0});
    model.triple_ = std::make_shared<const TripleMap>(std::move(triple));
    return model;
}

LossModel LossModel::gaussian_score_matching(int p) {
    TripleMap triple = [p](const Eigen::Ref<const Vector>& z) {
        if (z.size() != p) throw DimensionMismatch("gaussian score matching: sample has wrong length");
        Matrix t_grad = Matrix::Zero(p, 2 * p);
        Vector t_lap = Vector::Zero(2 * p);
        for (int k = 0; k < p; ++k) {
            t_grad(k, k) = 1.0;
            t_grad(k, p + k) = -z(k);
            t_lap(p + k) = -1.0;
        }
        return score_matching_assemble(t_grad, t_lap, Vector::Zero(p), 0.0);
    };
    return score_matching(2 * p, std::move(triple));
}

bool LossModel::linear_predictor() const noexcept {
    return kind_ == LossKind::squared || kind_ == LossKind::logistic || kind_ == LossKind::poisson;
}

LossModel LossModel::declared_for(const Dataset& data) const {
    if (kind_ != LossKind::logistic && kind_ != LossKind::poisson) return *this;
    const double max_norm = data.features().rowwise().norm().maxCoeff();
    LossModel copy = *this;
    copy.sc_.R = (kind_ == LossKind::logistic ? 2.0 : 1.0) * max_norm;
    return copy;
}

LossModel LossModel::with_sc(ScParams sc) const {
    sc.validate();
    LossModel copy = *this;
    copy.sc_ = sc;
    return copy;
}

void LossModel::check(const Vector& theta, const ObsRef& z) const {
    if (theta.size() != dim_)
        throw DimensionMismatch("theta has length " + std::to_string(theta.size()) + ", model expects " +
                                std::to_string(dim_));
    if (linear_predictor() && z.x.size() != dim_)
        throw DimensionMismatch("feature vector has length " + std::to_string(z.x.size()) +
                                ", model expects " + std::to_string(dim_));
    check_label(kind_, z.y, num_labels_);
}

void LossModel::validate(const Dataset& data) const {
    if (data.n() == 0) throw EmptyDataset("dataset has no rows");
    if (supervised() && !data.has_response())
        throw DimensionMismatch("supervised loss '" + std::string(to_string(kind_)) +
                                "' needs a response column y");
    if (linear_predictor() && data.d() != static_cast<std::size_t>(dim_))
        throw DimensionMismatch("dataset has " + std::to_string(data.d()) + " features, model expects " +
                                std::to_string(dim_));
    for (std::size_t i = 0; i < data.n(); ++i) check_label(kind_, data.row(i).y, num_labels_);
}

double LossModel::value(const Vector& theta, const ObsRef& z) const {
    LossAccumulator acc(dim_);
    accumulate(theta, z, 1.0, kValue, acc);
    return acc.value;
}

Vector LossModel::grad(const Vector& theta, const ObsRef& z) const {
    LossAccumulator acc(dim_);
    accumulate(theta, z, 1.0, kGrad, acc);
    return acc.grad;
}

Matrix LossModel::hess(const Vector& theta, const ObsRef& z) const {
    LossAccumulator acc(dim_);
    accumulate(theta, z, 1.0, kHess, acc);
    return acc.hess.selfadjointView<Eigen::Lower>();
}

void LossModel::accumulate(const Vector& theta, const ObsRef& z, double weight, unsigned flags,
                           LossAccumulator& acc) const {
    check(theta, z);
    switch (kind_) {
    case LossKind::squared:
    case LossKind::logistic:
    case LossKind::poisson: {
        const auto f = link_derivs(kind_, theta.dot(z.x), z.y);
        if (flags & kValue) acc.value += weight * f.value;
        if (flags & kGrad) acc.grad.noalias() += (weight * f.d1) * z.x;
        if (flags & kHess) acc.hess.selfadjointView<Eigen::Lower>().rankUpdate(z.x, weight * f.d2);
        if (flags & kOuter) acc.outer.selfadjointView<Eigen::Lower>().rankUpdate(z.x, weight * f.d1 * f.d1);
        return;
    }
    case LossKind::expfam_glm: {
        const Matrix T = label_statistics(*features_, z.x, num_labels_, dim_);
        const Vector scores = T.transpose() * theta;
        const double shift = scores.maxCoeff();
        const Vector expd = (scores.array() - shift).exp().matrix();
        const double total = expd.sum();
        const Vector prob = expd / total;
        const int label = static_cast<int>(z.y);
        const Vector mean = T * prob;
        if (flags & kValue) acc.value += weight * (-scores(label) + shift + std::log(total));
        if (flags & (kGrad | kOuter)) {
            const Vector g = mean - T.col(label);
            if (flags & kGrad) acc.grad.noalias() += weight * g;
            if (flags & kOuter) acc.outer.selfadjointView<Eigen::Lower>().rankUpdate(g, weight);
        }
        if (flags & kHess) {
            auto lower = acc.hess.selfadjointView<Eigen::Lower>();
            for (int k = 0; k < num_labels_; ++k) lower.rankUpdate(T.col(k), weight * prob(k));
            lower.rankUpdate(mean, -weight);
        }
        return;
    }
    case LossKind::score_matching: {
        const ScoreMatchingTriple tr = (*triple_)(z.x);
        if (tr.A.rows() != dim_ || tr.b.size() != dim_)
            throw DimensionMismatch("score matching triple has wrong dimension");
        if (flags & kValue) acc.value += weight * (0.5 * theta.dot(tr.A * theta) - tr.b.dot(theta) + tr.c);
        if (flags & (kGrad | kOuter)) {
            const Vector g = tr.A * theta - tr.b;
            if (flags & kGrad) acc.grad.noalias() += weight * g;
            if (flags & kOuter) acc.outer.selfadjointView<Eigen::Lower>().rankUpdate(g, weight);
        }
        if (flags & kHess) acc.hess.triangularView<Eigen::Lower>() += weight * tr.A;
        return;
    }
    }
}

double loss_third_dir(const LossModel& model, const Vector& theta, const ObsRef& z, const Vector& u,
                      const Vector& v) {
    const double vnorm = v.norm();
    if (vnorm == 0.0) return 0.0;
    const double h = 1e-4 / std::max(1.0, vnorm);
    const Vector plus = theta + h * v;
    const Vector minus = theta - h * v;
    const double up = u.dot(model.hess(plus, z) * u);
    const double um = u.dot(model.hess(minus, z) * u);
    return (up - um) / (2.0 * h);
}

ScoreMatchingTriple score_matching_assemble(const Matrix& t_grad, const Vector& t_lap, const Vector& h_grad,
                                            double h_lap) {
    const auto p = t_grad.rows();
    const auto d = t_grad.cols();
    if (t_lap.size() != d || h_grad.size() != p)
        throw DimensionMismatch("score_matching_assemble: inconsistent sample/parameter dimensions");
    ScoreMatchingTriple out;
    out.A = t_grad.transpose() * t_grad;
    out.b = -(t_lap + t_grad.transpose() * h_grad);
    out.c = h_lap + 0.5 * h_grad.squaredNorm();
    return out;
}

}  // namespace gsc
