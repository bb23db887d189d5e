#pragma once

// Synthetic data-generating processes and CSV dataset I/O.

#include <gsc/dataset.hpp>
#include <gsc/losses.hpp>
#include <gsc/types.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace gsc {

enum class ProcessKind {
    linear_wellspec,             // Y | X ~ N(theta0' X, 1)
    linear_misspec_t,            // Y | X ~ theta0' X + t_df (unit scale)
    logistic_wellspec,           // P(Y = 1 | X) = sigma(theta0' X), Y in {-1, +1}
    poisson_wellspec,            // Y | X ~ Poisson(exp(theta0' X))
    gaussian_expfam_scorematch,  // Z_j ~ N(eta_j / lambda_j, 1 / lambda_j), theta0 = (eta, lambda)
};

std::string_view to_string(ProcessKind kind);
ProcessKind process_kind_from_string(std::string_view name);

struct Process {
    ProcessKind kind = ProcessKind::linear_wellspec;
    int d = 1;
    Vector theta0;
    Matrix x_cov;  // empty means identity
    double noise_df = 3.5;

    /// Throws DomainError/DimensionMismatch on inconsistent fields.
    void validate() const;
    /// Copy with a different true parameter.
    Process with_theta(const Vector& theta) const;
};

/// Process with X ~ N(0, I_d) and theta0 = theta0_equispaced(d) (for score
/// matching: eta equispaced in [0, 1], lambda = 1 + eta; d must be even).
Process make_process(ProcessKind kind, int d);

/// The loss whose population minimizer is the process parameter (for the
/// misspecified linear process: the least-squares projection).
LossModel default_model(const Process& process);

/// n rows; row i is a pure function of (seed, i), so generate(p, n, s) is a
/// prefix of generate(p, m, s) for m >= n.
Dataset generate(const Process& process, std::size_t n, std::uint64_t seed);

/// (0, 1/(d-1), ..., 1); (0.5) when d = 1.
Vector theta0_equispaced(int d);

/// Header x1..xd[,y], '.' decimal separator.
Dataset read_csv(const std::filesystem::path& path);
/// Writes 17 significant digits so values round-trip exactly.
void write_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace gsc
