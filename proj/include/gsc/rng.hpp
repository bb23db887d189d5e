#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, position), so a replication's numbers never depend on how
// work is scheduled across threads.
//
// Generator: Philox4x32-10 (Salmon et al., SC'11). Key = 64-bit seed,
// counter = (64-bit position, 64-bit stream id).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace gsc {

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Stream namespaces so independent consumers of one seed never overlap.
enum class StreamTag : std::uint64_t {
    data_row = 1,
    bootstrap_weights = 2,
    calibration = 3,
    test_support = 4,
};

constexpr std::uint64_t make_stream(StreamTag tag, std::uint64_t index) {
    return (static_cast<std::uint64_t>(tag) << 48) ^ index;
}

/// Seed base for a family of per-replication seeds (base + r) that must not
/// collide with the user seed range of another family.
inline std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag) {
    const auto out = Philox4x32::generate(
        {static_cast<std::uint32_t>(tag), 0u, 0xA5A5A5A5u, 0u},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (lane_ == 2) refill();
        return buffer_[lane_++];
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang squeeze/rejection.
    double gamma(double shape) {
        if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = 0.0;
            double v = 0.0;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double student_t(double df) { return normal() / std::sqrt(2.0 * gamma(0.5 * df) / df); }

    /// Poisson(rate) by CDF inversion; large rates are split into chunks
    /// whose point masses stay representable.
    std::uint64_t poisson(double rate) {
        constexpr double kChunk = 256.0;
        std::uint64_t total = 0;
        while (rate > kChunk) {
            total += poisson_inversion(kChunk);
            rate -= kChunk;
        }
        return total + poisson_inversion(rate);
    }

private:
    std::uint64_t poisson_inversion(double rate) {
        const double u = uniform();
        double mass = std::exp(-rate);
        double cdf = mass;
        std::uint64_t k = 0;
        while (u > cdf && mass > 0.0) {
            ++k;
            mass *= rate / static_cast<double>(k);
            cdf += mass;
        }
        return k;
    }

    void refill() {
        const Philox4x32::Block ctr{static_cast<std::uint32_t>(position_),
                                    static_cast<std::uint32_t>(position_ >> 32),
                                    static_cast<std::uint32_t>(stream_),
                                    static_cast<std::uint32_t>(stream_ >> 32)};
        const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
        const auto out = Philox4x32::generate(ctr, key);
        buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        ++position_;
        lane_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int lane_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gsc
