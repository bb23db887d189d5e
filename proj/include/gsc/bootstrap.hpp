#pragma once

// Multiplier bootstrap with N(1, 1) weights and the coverage experiment.

#include <gsc/estimate.hpp>
#include <gsc/parallel.hpp>
#include <gsc/simdata.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsc {

enum class StatisticKind { wald, lr };

std::string_view to_string(StatisticKind kind);
StatisticKind statistic_kind_from_string(std::string_view name);

struct BootstrapConfig {
    std::size_t B = 2000;
    double delta = 0.05;  // quantile level is 1 - delta
    std::uint64_t seed = 0;
    SolverOptions solver{};
    Execution exec = Execution::parallel;

    /// Throws DomainError for B == 0 or delta outside (0, 1). B < 100 is
    /// allowed; callers report it as a warning.
    void validate() const;
};

/// W_1..W_n ~ N(1, 1) for replication b, drawn from stream (seed, b).
Vector bootstrap_weights(std::size_t n, std::uint64_t seed, std::size_t b);

/// Minimizer of n^{-1} sum W_i l(theta; Z_i). Throws SingularHessian when a
/// Newton system (or the Hessian at the solution) is not positive definite
/// and NonConverged when max_iter is hit.
FitResult bootstrap_fit(const LossModel& model, const Dataset& data, std::span<const double> weights,
                        const SolverOptions& opts = {});

struct BootstrapReplicates {
    std::vector<double> wald;  // successful replications only, in b order
    std::vector<double> lr;
    std::size_t n_failed = 0;
};

/// Both statistics for b = 0..B-1. Failed replications are counted, never thrown.
BootstrapReplicates bootstrap_replicates(const LossModel& model, const Dataset& data, const FitResult& fit,
                                         const BootstrapConfig& config);

struct BootstrapQuantile {
    double quantile = 0.0;
    std::size_t n_failed = 0;
    std::size_t n_used = 0;
};

/// Type-7 (1 - delta)-quantile of the chosen statistic. Throws
/// TooManyFailures when more than B/10 replications fail.
BootstrapQuantile bootstrap_quantile(const LossModel& model, const Dataset& data, const FitResult& fit,
                                     const BootstrapConfig& config, StatisticKind kind);

enum class CoverageMethod { oracle, bootwald, bootlr };

std::string_view to_string(CoverageMethod method);
CoverageMethod coverage_method_from_string(std::string_view name);

struct CoverageConfig {
    std::string label;  // model column of the output table
    Process process;
    std::optional<LossModel> model;  // default_model(process) when empty
    std::size_t n = 100;
    /// Nominal coverage levels; a level q uses the q-quantile.
    std::vector<double> levels{0.95, 0.9, 0.85, 0.8, 0.75};
    std::size_t reps = 1000;
    std::size_t B = 2000;
    std::size_t calibration_reps = 1000;
    std::uint64_t seed = 0;
    std::vector<CoverageMethod> methods{CoverageMethod::oracle, CoverageMethod::bootwald, CoverageMethod::bootlr};
    SolverOptions solver{};
    Execution exec = Execution::parallel;

    void validate() const;
};

struct CoverageCell {
    std::string model;
    CoverageMethod method = CoverageMethod::oracle;
    double level = 0.0;
    double coverage = 0.0;
    double stderr_ = 0.0;
    std::size_t reps = 0;      // replications that entered the mean
    std::size_t failures = 0;  // replications dropped from this cell
};

/// One row per (method, level), methods in config order. Replication r uses
/// data seed `seed + r`; the oracle radius is calibrated on independent seeds.
std::vector<CoverageCell> coverage_experiment(const CoverageConfig& config);

}  // namespace gsc
