#include <gsc/dataset.hpp>

#include <gsc/errors.hpp>

#include <cmath>
#include <utility>

namespace gsc {

Dataset::Dataset(RowMatrix x, std::optional<Vector> y, std::optional<Provenance> provenance)
    : x_(std::move(x)), y_(std::move(y)), provenance_(std::move(provenance)) {
    if (x_.rows() == 0) throw EmptyDataset("dataset has no rows");
    if (y_ && y_->size() != x_.rows())
        throw DimensionMismatch("response length " + std::to_string(y_->size()) +
                                " does not match row count " + std::to_string(x_.rows()));
    if (!x_.allFinite() || (y_ && !y_->allFinite()))
        throw DomainError("dataset contains non-finite entries");
}

ObsRef Dataset::row(std::size_t i) const {
    const auto idx = static_cast<Eigen::Index>(i);
    return {Eigen::Map<const Vector>(x_.row(idx).data(), x_.cols()),
            y_ ? (*y_)(idx) : std::numeric_limits<double>::quiet_NaN()};
}

Observation Dataset::observation(std::size_t i) const {
    const auto r = row(i);
    return {Vector(r.x), r.y};
}

Dataset Dataset::head(std::size_t count) const {
    const auto rows = static_cast<Eigen::Index>(std::min(count, n()));
    std::optional<Vector> y;
    if (y_) y = y_->head(rows);
    return Dataset(x_.topRows(rows), std::move(y), provenance_);
}

}  // namespace gsc
