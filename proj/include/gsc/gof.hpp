#pragma once

// Rao score, likelihood-ratio and Wald tests of a simple null, with
// Monte-Carlo critical values and power studies.

#include <gsc/estimate.hpp>
#include <gsc/parallel.hpp>
#include <gsc/simdata.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gsc {

enum class TestKind { rao, lr, wald };
enum class CriticalRule { scaled_dim, explicit_value, oracle_mc };

std::string_view to_string(TestKind kind);
TestKind test_kind_from_string(std::string_view name);
std::string_view to_string(CriticalRule rule);
CriticalRule critical_rule_from_string(std::string_view name);

struct TestReport {
    double statistic = 0.0;
    TestKind kind = TestKind::rao;
    double critical = 0.0;
    bool reject = false;  // statistic > critical
    std::size_t n = 0;
    int d = 0;
    CriticalRule rule = CriticalRule::oracle_mc;
    bool fit_performed = false;
};

/// S_n(theta0)' H_n(theta0)^{-1} S_n(theta0). No fit.
double rao_statistic(const LossModel& model, const Dataset& data, const Vector& theta0);
/// 2 [L_n(theta0) - L_n(theta_n)].
double lr_statistic(const LossModel& model, const Dataset& data, const FitResult& fit, const Vector& theta0);
/// ||theta_n - theta0||^2_{H_n(theta_n)}.
double wald_statistic(const FitResult& fit, const Vector& theta0);

/// Fits only for lr / wald. `fit_out` receives the fit when one is made.
double test_statistic(TestKind kind, const LossModel& model, const Dataset& data, const Vector& theta0,
                      const SolverOptions& solver = {}, FitResult* fit_out = nullptr);

struct CriticalOptions {
    CriticalRule rule = CriticalRule::oracle_mc;
    /// scaled_dim: critical = c d / n; default c = chi2_{d, 1 - alpha} / d.
    std::optional<double> c;
    double value = 0.0;                // explicit_value
    const Process* process = nullptr;  // oracle_mc; its theta0 is replaced by the null
    std::size_t reps = 1000;
    std::uint64_t seed = 0;
    SolverOptions solver{};
    Execution exec = Execution::parallel;
};

struct NullDistribution {
    std::vector<double> statistics;  // successful replications
    std::size_t n_failed = 0;
};

/// Statistic at theta0 on generate(process.with_theta(theta0), n, seed_base + r).
NullDistribution null_statistics(TestKind kind, const LossModel& model, const Process& process,
                                 const Vector& theta0, std::size_t n, std::size_t reps, std::uint64_t seed_base,
                                 const SolverOptions& solver = {}, Execution exec = Execution::parallel);

/// Critical value for a sample of size n at level alpha.
double critical_value(TestKind kind, const LossModel& model, std::size_t n, int d, const Vector& theta0,
                      double alpha, const CriticalOptions& options);

TestReport run_test(TestKind kind, const LossModel& model, const Dataset& data, const Vector& theta0, double alpha,
                    const CriticalOptions& options = {});

struct PowerConfig {
    TestKind kind = TestKind::rao;
    Process process;                  // sampling law; theta0 is overridden per alternative
    std::optional<LossModel> model;   // default_model(process) when empty
    Vector theta0;                    // null
    std::vector<Vector> alternatives; // theta* (or the offset c when `local`)
    bool local = false;               // theta* = theta0 + c / sqrt(n)
    std::vector<std::size_t> n_grid;
    std::size_t reps = 500;
    double alpha = 0.05;
    std::size_t calibration_reps = 1000;
    std::uint64_t seed = 0;
    SolverOptions solver{};
    Execution exec = Execution::parallel;

    void validate() const;
};

struct PowerRow {
    TestKind kind = TestKind::rao;
    std::size_t n = 0;
    double dist = 0.0;  // ||theta* - theta0||
    double power = 0.0;
    double stderr_ = 0.0;
    double critical = 0.0;
    std::size_t reps = 0;
    std::size_t failures = 0;
};

/// Oracle-calibrated rejection rates, one row per (n, alternative) in grid order.
std::vector<PowerRow> power_curve(const PowerConfig& config);

}  // namespace gsc
