#pragma once

// Effective dimension, radius formulas and Wald / likelihood-ratio
// confidence sets.

#include <gsc/bootstrap.hpp>
#include <gsc/estimate.hpp>
#include <gsc/parallel.hpp>
#include <gsc/simdata.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gsc {

enum class Calibration { oracle_mc, bootstrap, explicit_constant };

std::string_view to_string(Calibration calibration);
Calibration calibration_from_string(std::string_view name);

struct ConfidenceSet {
    StatisticKind kind = StatisticKind::wald;
    Vector center;
    Matrix shape;  // H_n(theta_n); also kept for lr sets
    double sq_radius = 0.0;
    double delta = 0.05;
    Calibration calibration = Calibration::oracle_mc;

    void validate() const;
};

struct AssumptionConstants {
    double K1 = 1.0;
    double K2 = 1.0;
    double sigma_H = 1.0;
    double M_lip = 1.0;

    void validate() const;
};

enum class EffDimKind { oracle_analytic, oracle_mc, empirical };

std::string_view to_string(EffDimKind kind);

struct EffDimReport {
    double value = 0.0;
    EffDimKind kind = EffDimKind::empirical;
    std::optional<double> mc_stderr;
};

/// tr(H_n^{-1} G_n) at theta_n.
EffDimReport effective_dim_empirical(const FitResult& fit);

/// sum g_i / h_i.
double effective_dim_spectrum(const Vector& g_eigs, const Vector& h_eigs);

/// Monte-Carlo tr(H*^{-1} G*) from mc_n fresh draws of `process`, with a
/// standard error from 10 equal batches. For the well-specified linear
/// process at its own parameter the value is d (kind oracle_analytic).
EffDimReport effective_dim_oracle(const LossModel& model, const Process& process, const Vector& theta_star,
                                  std::size_t mc_n, std::uint64_t seed);

double t_n_bound(double delta, const AssumptionConstants& constants, double n, int d);

struct OracleCalibration {
    std::vector<double> wald;  // ||theta_n - theta0||^2_{H_n(theta_n)}, successful replications
    std::vector<double> lr;    // 2 [L_n(theta0) - L_n(theta_n)]
    std::size_t n_failed = 0;
};

/// Replication r fits generate(process, n, derive_seed(seed, calibration) + r)
/// and evaluates both statistics at theta0 = process.theta0.
OracleCalibration oracle_statistics(const LossModel& model, const Process& process, std::size_t n,
                                    std::size_t reps, std::uint64_t seed, const SolverOptions& solver = {},
                                    Execution exec = Execution::parallel);

/// (1 - delta)-quantile of the Wald oracle statistics.
double oracle_wald_quantile(const LossModel& model, const Process& process, std::size_t n, double delta,
                            std::size_t reps, std::uint64_t seed, Execution exec = Execution::parallel);

struct RadiusOptions {
    double C = 1.0;                           // explicit_constant
    const Process* process = nullptr;         // oracle_mc
    std::size_t calibration_reps = 1000;      // oracle_mc
    std::size_t B = 2000;                     // bootstrap
    std::uint64_t seed = 0;
    Execution exec = Execution::parallel;
};

/// Squared radius of the Wald set. explicit_constant evaluates
/// 24 w^2 d*/n + C K1^2 w^2 log(e/delta) ||Omega||/n with w = omega_nu(r_n R*),
/// r_n = sqrt(C K1^2 log(e/delta) d*/n) and ||Omega|| the largest eigenvalue
/// of G_n whitened by H_n.
double wald_radius(const LossModel& model, const Dataset& data, const FitResult& fit, const EffDimReport& effdim,
                   double delta, Calibration calibration, const AssumptionConstants& constants = {},
                   const RadiusOptions& options = {});

/// Same calibrations for the likelihood-ratio set (explicit_constant reuses the Wald formula).
double lr_radius(const LossModel& model, const Dataset& data, const FitResult& fit, const EffDimReport& effdim,
                 double delta, Calibration calibration, const AssumptionConstants& constants = {},
                 const RadiusOptions& options = {});

ConfidenceSet make_confidence_set(StatisticKind kind, const FitResult& fit, double sq_radius, double delta,
                                  Calibration calibration);

bool set_membership(const ConfidenceSet& set, const FitResult& fit, const LossModel& model, const Dataset& data,
                    const Vector& theta);

struct SampleSizeBranches {
    double concentration = 0.0;  // 4 (K2 + 2 sigma_H^2) log(4d/delta)
    double localization = 0.0;   // C [R*^2 K1^2 d* log(e/delta) / K_nu^2]^{1/(3 - nu)}
};

/// Both branches of the sample-size condition. R* = r_nu(params, spec).
/// DomainError unless nu in [2, 3).
SampleSizeBranches critical_sample_branches(const ScParams& params, const SpectralSummary& spec,
                                            const AssumptionConstants& constants, double d_star, int d,
                                            double delta, double C = 1.0);

/// ceil(max(branches)). A formula evaluator; the constant C is not sharp.
std::size_t critical_sample_size(const ScParams& params, const SpectralSummary& spec,
                                 const AssumptionConstants& constants, double d_star, int d, double delta,
                                 double C = 1.0);

}  // namespace gsc
