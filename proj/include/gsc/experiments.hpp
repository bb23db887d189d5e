#pragma once

// Simulation drivers behind `gscinfer experiment`.

#include <gsc/bootstrap.hpp>
#include <gsc/parallel.hpp>
#include <gsc/simdata.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gsc {

struct CoverageTableConfig {
    int d = 5;
    std::size_t n = 100;
    std::size_t reps = 1000;
    std::size_t B = 2000;
    std::size_t calibration_reps = 1000;
    std::vector<double> levels{0.95, 0.9, 0.85, 0.8, 0.75};
    std::vector<ProcessKind> models{ProcessKind::linear_wellspec, ProcessKind::linear_misspec_t,
                                    ProcessKind::logistic_wellspec};
    std::uint64_t seed = 0;
    Execution exec = Execution::parallel;
};

/// Oracle / BootWald / BootLR rows for each model, theta0 equispaced.
std::vector<CoverageCell> coverage_table(const CoverageTableConfig& config);

struct EffdimErrorConfig {
    std::vector<ProcessKind> models{ProcessKind::linear_wellspec, ProcessKind::logistic_wellspec};
    std::vector<int> dims{5, 10, 15, 20};
    std::vector<std::size_t> n_grid{2000, 4000, 6000, 8000, 10000};
    std::size_t reps = 30;
    std::uint64_t seed = 0;
    Execution exec = Execution::parallel;
};

struct EffdimErrorRow {
    std::string model;
    int d = 0;
    std::size_t n = 0;
    double error = 0.0;  // mean |d_n / d - 1|
    double stderr_ = 0.0;
    std::size_t reps = 0;
    std::size_t failures = 0;
};

/// Well-specified processes with theta = (1, ..., 1), so d* = d. Replication
/// r at every n uses seed + r; larger n extends the same sample.
std::vector<EffdimErrorRow> effdim_error(const EffdimErrorConfig& config);

struct ConfsetShapeConfig {
    Vector theta0 = (Vector(2) << -1.0, 2.0).finished();
    std::vector<Matrix> covariances;  // empty: the three default 2 x 2 settings
    std::size_t n = 1000;
    double delta = 0.05;
    double C = 1.0;  // sq_radius = C d/n log(e/delta)
    std::size_t points = 200;
    std::uint64_t seed = 0;
};

struct ConfsetShape {
    Matrix covariance;
    Vector center;
    Matrix shape;
    double sq_radius = 0.0;
    Matrix boundary;  // points x 2
};

std::vector<Matrix> default_shape_covariances();

/// Logistic fits under each covariance and the boundary of the Wald ellipse.
std::vector<ConfsetShape> confset_shape(const ConfsetShapeConfig& config);

}  // namespace gsc
