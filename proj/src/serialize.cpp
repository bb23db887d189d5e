#include <gsc/serialize.hpp>

#include <gsc/errors.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace gsc {

namespace {

// JSON has no NaN; missing cells become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void csv_number(std::ostream& out, double v) {
    if (std::isfinite(v))
        out << v;
    else
        out << "NA";
}

}  // namespace

Json vector_json(const Vector& v) {
    Json j = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(number(v(i)));
    return j;
}

Json matrix_json(const Matrix& m) {
    Json j = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(vector_json(m.row(r).transpose()));
    return j;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw Error("expected a JSON array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw Error("expected a JSON array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw Error("expected a JSON array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const Vector first = vector_from_json(j[0]);
    Matrix m(rows, first.size());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Vector row = vector_from_json(j[static_cast<std::size_t>(r)]);
        if (row.size() != m.cols()) throw DimensionMismatch("matrix rows have unequal lengths");
        m.row(r) = row.transpose();
    }
    return m;
}

Json document(const std::string& kind, const Json& body) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = kind;
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    return j;
}

Json to_json(const FitResult& fit, const std::string& model_kind) {
    Json j;
    j["model"] = model_kind;
    j["theta_n"] = vector_json(fit.theta_n);
    j["converged"] = fit.converged;
    j["diverging"] = fit.diverging;
    j["iterations"] = fit.iterations;
    j["newton_decrement"] = number(fit.newton_decrement);
    const auto& a = fit.aggregates_at_opt;
    j["n"] = a.n;
    j["L_n"] = number(a.L_n);
    j["S_n"] = vector_json(a.S_n);
    j["H_n"] = matrix_json(a.H_n);
    j["G_n"] = matrix_json(a.G_n);
    if (fit.certificate) {
        j["certificate"] = {{"passes", fit.certificate->passes},
                            {"radius_bound", number(fit.certificate->radius_bound)}};
    } else {
        j["certificate"] = nullptr;
    }
    Json trace = Json::array();
    for (double v : fit.objective_trace) trace.push_back(number(v));
    j["objective_trace"] = trace;
    return j;
}

Json to_json(const ConfidenceSet& set) {
    Json j;
    j["set_kind"] = std::string(to_string(set.kind));
    j["center"] = vector_json(set.center);
    j["shape"] = matrix_json(set.shape);
    j["sq_radius"] = number(set.sq_radius);
    j["delta"] = set.delta;
    j["calibration"] = std::string(to_string(set.calibration));
    return j;
}

Json to_json(const EffDimReport& report) {
    Json j;
    j["value"] = number(report.value);
    j["effdim_kind"] = std::string(to_string(report.kind));
    j["mc_stderr"] = report.mc_stderr ? number(*report.mc_stderr) : Json(nullptr);
    return j;
}

Json to_json(const TestReport& report) {
    Json j;
    j["test"] = std::string(to_string(report.kind));
    j["statistic"] = number(report.statistic);
    j["critical"] = number(report.critical);
    j["critical_rule"] = std::string(to_string(report.rule));
    j["reject"] = report.reject;
    j["n"] = report.n;
    j["d"] = report.d;
    j["fit_performed"] = report.fit_performed;
    return j;
}

Json to_json(const Process& process) {
    Json j;
    j["process"] = std::string(to_string(process.kind));
    j["d"] = process.d;
    j["theta0"] = vector_json(process.theta0);
    j["x_cov"] = process.x_cov.size() ? matrix_json(process.x_cov) : Json(nullptr);
    j["noise_df"] = process.noise_df;
    return j;
}

Process process_from_json(const Json& j) {
    if (!j.is_object()) throw Error("process must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "process" && k != "d" && k != "theta0" && k != "x_cov" && k != "noise_df" && k != "schema_version" &&
            k != "kind")
            throw Error("unknown process key '" + k + "'");
    }
    if (!j.contains("process") || !j.contains("d")) throw Error("process needs 'process' and 'd'");
    Process p = make_process(process_kind_from_string(j.at("process").get<std::string>()), j.at("d").get<int>());
    if (j.contains("theta0") && !j["theta0"].is_null()) p.theta0 = vector_from_json(j["theta0"]);
    if (j.contains("x_cov") && !j["x_cov"].is_null()) p.x_cov = matrix_from_json(j["x_cov"]);
    if (j.contains("noise_df")) p.noise_df = j["noise_df"].get<double>();
    p.validate();
    return p;
}

void write_coverage_csv(std::ostream& out, const std::vector<CoverageCell>& cells) {
    out << "model,method,delta,coverage,stderr,reps,failures\n";
    for (const auto& c : cells) {
        out << c.model << ',' << to_string(c.method) << ',' << c.level << ',';
        csv_number(out, c.coverage);
        out << ',';
        csv_number(out, c.stderr_);
        out << ',' << c.reps << ',' << c.failures << '\n';
    }
}

void write_power_csv(std::ostream& out, const std::vector<PowerRow>& rows) {
    out << "kind,n,dist,power,stderr\n";
    for (const auto& r : rows) {
        out << to_string(r.kind) << ',' << r.n << ',' << r.dist << ',';
        csv_number(out, r.power);
        out << ',';
        csv_number(out, r.stderr_);
        out << '\n';
    }
}

void write_test_csv(std::ostream& out, const TestReport& report) {
    out << "kind,n,d,statistic,critical,reject\n";
    out << to_string(report.kind) << ',' << report.n << ',' << report.d << ',';
    csv_number(out, report.statistic);
    out << ',';
    csv_number(out, report.critical);
    out << ',' << (report.reject ? "true" : "false") << '\n';
}

void write_effdim_error_csv(std::ostream& out, const std::vector<EffdimErrorRow>& rows) {
    out << "model,d,n,error,stderr,reps,failures\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.d << ',' << r.n << ',';
        csv_number(out, r.error);
        out << ',';
        csv_number(out, r.stderr_);
        out << ',' << r.reps << ',' << r.failures << '\n';
    }
}

void write_confset_shape_csv(std::ostream& out, const std::vector<ConfsetShape>& shapes) {
    out << "sigma,point,theta1,theta2\n";
    for (const auto& s : shapes) {
        std::ostringstream label;
        label << s.covariance(0, 0) << ';' << s.covariance(0, 1) << ';' << s.covariance(1, 1);
        const std::string sigma = label.str();
        for (Eigen::Index k = 0; k < s.boundary.rows(); ++k)
            out << sigma << ',' << k << ',' << s.boundary(k, 0) << ',' << s.boundary(k, 1) << '\n';
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace gsc
