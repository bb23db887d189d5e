#pragma once

#include <gsc/types.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace gsc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Non-owning view of one observation z = (x, y). For unsupervised losses
/// (score matching) `x` is the raw sample and `y` is NaN.
struct ObsRef {
    Eigen::Ref<const Vector> x;
    double y;
};

/// Owning single observation.
struct Observation {
    Vector x;
    double y = std::numeric_limits<double>::quiet_NaN();

    ObsRef ref() const { return {x, y}; }
};

struct Provenance {
    std::string process;
    std::uint64_t seed = 0;
};

/// n observations stored row-major, with an optional response column.
class Dataset {
public:
    Dataset() = default;
    Dataset(RowMatrix x, std::optional<Vector> y, std::optional<Provenance> provenance = {});

    std::size_t n() const noexcept { return static_cast<std::size_t>(x_.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(x_.cols()); }
    bool has_response() const noexcept { return y_.has_value(); }

    ObsRef row(std::size_t i) const;
    Observation observation(std::size_t i) const;

    const RowMatrix& features() const noexcept { return x_; }
    const std::optional<Vector>& response() const noexcept { return y_; }
    const std::optional<Provenance>& provenance() const noexcept { return provenance_; }

    /// First `count` rows.
    Dataset head(std::size_t count) const;

private:
    RowMatrix x_;
    std::optional<Vector> y_;
    std::optional<Provenance> provenance_;
};

}  // namespace gsc
