#include <gsc/experiments.hpp>

#include <gsc/errors.hpp>
#include <gsc/estimate.hpp>
#include <gsc/inference.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gsc {

std::vector<CoverageCell> coverage_table(const CoverageTableConfig& config) {
    if (config.models.empty()) throw DomainError("coverage table needs at least one model");
    std::vector<CoverageCell> out;
    for (std::size_t m = 0; m < config.models.size(); ++m) {
        CoverageConfig cc;
        cc.process = make_process(config.models[m], config.d);
        cc.label = std::string(to_string(config.models[m]));
        cc.n = config.n;
        cc.levels = config.levels;
        cc.reps = config.reps;
        cc.B = config.B;
        cc.calibration_reps = config.calibration_reps;
        cc.seed = config.seed + (std::uint64_t{m} << 40);
        cc.exec = config.exec;
        auto cells = coverage_experiment(cc);
        out.insert(out.end(), cells.begin(), cells.end());
    }
    return out;
}

std::vector<EffdimErrorRow> effdim_error(const EffdimErrorConfig& config) {
    if (config.models.empty() || config.dims.empty() || config.n_grid.empty() || config.reps == 0)
        throw DomainError("effdim_error needs non-empty models, dims, n grid and reps");
    const std::size_t n_max = *std::max_element(config.n_grid.begin(), config.n_grid.end());
    std::vector<EffdimErrorRow> rows;
    for (auto kind : config.models) {
        for (int d : config.dims) {
            Process process = make_process(kind, d);
            process.theta0 = Vector::Ones(d);
            const LossModel model = default_model(process);
            // errors[r][g], NaN when the fit failed
            const auto errors = replicate<std::vector<double>>(config.reps, config.exec, [&](std::size_t r) {
                std::vector<double> e(config.n_grid.size(), std::nan(""));
                try {
                    const Dataset full = generate(process, n_max, config.seed + r);
                    for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
                        try {
                            const FitResult fit = fit_erm(model, full.head(config.n_grid[g]));
                            if (!fit.converged) continue;
                            e[g] = std::abs(effective_dim_empirical(fit).value / d - 1.0);
                        } catch (const Error&) {
                        }
                    }
                } catch (const Error&) {
                }
                return e;
            });
            for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
                EffdimErrorRow row;
                row.model = std::string(to_string(kind));
                row.d = d;
                row.n = config.n_grid[g];
                double sum = 0.0;
                double sum2 = 0.0;
                for (const auto& e : errors) {
                    if (std::isnan(e[g])) {
                        ++row.failures;
                        continue;
                    }
                    ++row.reps;
                    sum += e[g];
                    sum2 += e[g] * e[g];
                }
                if (row.reps > 0) {
                    const double m = static_cast<double>(row.reps);
                    row.error = sum / m;
                    const double var = row.reps > 1 ? std::max(0.0, (sum2 - m * row.error * row.error) / (m - 1.0)) : 0.0;
                    row.stderr_ = std::sqrt(var / m);
                } else {
                    row.error = row.stderr_ = std::nan("");
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

std::vector<Matrix> default_shape_covariances() {
    Matrix a(2, 2), b(2, 2), c(2, 2);
    a << 2, 0, 0, 1;
    b << 2, 1, 1, 1;
    c << 2, -1, -1, 1;
    return {a, b, c};
}

std::vector<ConfsetShape> confset_shape(const ConfsetShapeConfig& config) {
    if (config.theta0.size() != 2) throw DimensionMismatch("confset_shape works in two dimensions");
    if (config.points < 3) throw DomainError("confset_shape needs at least 3 boundary points");
    if (!(config.delta > 0.0 && config.delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    const auto covs = config.covariances.empty() ? default_shape_covariances() : config.covariances;
    std::vector<ConfsetShape> out;
    for (const auto& cov : covs) {
        Process process = make_process(ProcessKind::logistic_wellspec, 2);
        process.theta0 = config.theta0;
        process.x_cov = cov;
        const LossModel model = default_model(process);
        const Dataset data = generate(process, config.n, config.seed);
        const FitResult fit = fit_erm(model, data);
        if (!fit.converged) throw NonConverged("confset_shape fit did not converge");

        ConfsetShape s;
        s.covariance = cov;
        s.center = fit.theta_n;
        s.shape = fit.aggregates_at_opt.H_n;
        s.sq_radius = config.C * 2.0 / static_cast<double>(config.n) * std::log(std::numbers::e / config.delta);
        // theta = center + r L^{-T} u for unit u, where H = L L'.
        const Eigen::LLT<Matrix> llt(s.shape);
        const double r = std::sqrt(s.sq_radius);
        s.boundary.resize(static_cast<Eigen::Index>(config.points), 2);
        for (std::size_t k = 0; k < config.points; ++k) {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(config.points);
            const Vector u = (Vector(2) << std::cos(t), std::sin(t)).finished();
            const Vector p = s.center + r * llt.matrixU().solve(u);
            s.boundary.row(static_cast<Eigen::Index>(k)) = p.transpose();
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace gsc
