#include <gsc/simdata.hpp>

#include <gsc/errors.hpp>
#include <gsc/rng.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace gsc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& f : fields) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    }
    return fields;
}

}  // namespace

std::string_view to_string(ProcessKind kind) {
    switch (kind) {
    case ProcessKind::linear_wellspec: return "linear_wellspec";
    case ProcessKind::linear_misspec_t: return "linear_misspec_t";
    case ProcessKind::logistic_wellspec: return "logistic_wellspec";
    case ProcessKind::poisson_wellspec: return "poisson_wellspec";
    case ProcessKind::gaussian_expfam_scorematch: return "gaussian_expfam_scorematch";
    }
    return "unknown";
}

ProcessKind process_kind_from_string(std::string_view name) {
    for (auto kind : {ProcessKind::linear_wellspec, ProcessKind::linear_misspec_t, ProcessKind::logistic_wellspec,
                      ProcessKind::poisson_wellspec, ProcessKind::gaussian_expfam_scorematch})
        if (to_string(kind) == name) return kind;
    throw Error("unknown process kind '" + std::string(name) + "'");
}

void Process::validate() const {
    if (d < 1) throw DomainError("process dimension must be >= 1");
    if (theta0.size() != d) throw DimensionMismatch("theta0 length does not match process dimension");
    if (!theta0.allFinite()) throw DomainError("theta0 must be finite");
    if (kind == ProcessKind::gaussian_expfam_scorematch) {
        if (d % 2 != 0) throw DomainError("score-matching process needs an even parameter dimension");
        if ((theta0.tail(d / 2).array() <= 0.0).any()) throw DomainError("score-matching precisions must be positive");
        return;
    }
    if (x_cov.size() != 0) {
        if (x_cov.rows() != d || x_cov.cols() != d) throw DimensionMismatch("x_cov must be d x d");
        if (!x_cov.isApprox(x_cov.transpose(), 1e-12)) throw DomainError("x_cov must be symmetric");
        if (Eigen::LLT<Matrix>(x_cov).info() != Eigen::Success) throw DomainError("x_cov must be positive definite");
    }
    if (kind == ProcessKind::linear_misspec_t && !(noise_df > 2.0))
        throw DomainError("Student-t noise needs df > 2 for a finite variance");
}

Process Process::with_theta(const Vector& theta) const {
    Process copy = *this;
    copy.theta0 = theta;
    return copy;
}

Process make_process(ProcessKind kind, int d) {
    Process p;
    p.kind = kind;
    p.d = d;
    if (kind == ProcessKind::gaussian_expfam_scorematch) {
        if (d % 2 != 0) throw DomainError("score-matching process needs an even parameter dimension");
        const Vector eta = theta0_equispaced(d / 2);
        p.theta0.resize(d);
        p.theta0 << eta, (eta.array() + 1.0).matrix();
    } else {
        p.theta0 = theta0_equispaced(d);
    }
    return p;
}

LossModel default_model(const Process& process) {
    switch (process.kind) {
    case ProcessKind::linear_wellspec:
    case ProcessKind::linear_misspec_t: return LossModel::squared(process.d);
    case ProcessKind::logistic_wellspec: return LossModel::logistic(process.d, 0.0);
    case ProcessKind::poisson_wellspec: return LossModel::poisson(process.d, 0.0);
    case ProcessKind::gaussian_expfam_scorematch: return LossModel::gaussian_score_matching(process.d / 2);
    }
    throw Error("unknown process kind");
}

Vector theta0_equispaced(int d) {
    if (d < 1) throw DomainError("theta0_equispaced needs d >= 1");
    if (d == 1) return Vector::Constant(1, 0.5);
    return Vector::LinSpaced(d, 0.0, 1.0);
}

Dataset generate(const Process& process, std::size_t n, std::uint64_t seed) {
    process.validate();
    if (n == 0) throw EmptyDataset("cannot generate an empty dataset");
    const int d = process.d;
    const bool scorematch = process.kind == ProcessKind::gaussian_expfam_scorematch;
    const int cols = scorematch ? d / 2 : d;

    Matrix factor;
    if (!scorematch && process.x_cov.size() != 0) factor = Eigen::LLT<Matrix>(process.x_cov).matrixL();

    RowMatrix X(static_cast<Eigen::Index>(n), cols);
    Vector y(scorematch ? 0 : static_cast<Eigen::Index>(n));
    Vector z(cols);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(seed, make_stream(StreamTag::data_row, i));
        const auto row = static_cast<Eigen::Index>(i);
        for (int j = 0; j < cols; ++j) z(j) = rng.normal();
        if (scorematch) {
            for (int j = 0; j < cols; ++j) {
                const double eta = process.theta0(j);
                const double lambda = process.theta0(cols + j);
                X(row, j) = eta / lambda + z(j) / std::sqrt(lambda);
            }
            continue;
        }
        if (factor.size() != 0)
            X.row(row) = (factor * z).transpose();
        else
            X.row(row) = z.transpose();
        const double eta = X.row(row).dot(process.theta0.transpose());
        switch (process.kind) {
        case ProcessKind::linear_wellspec: y(row) = eta + rng.normal(); break;
        case ProcessKind::linear_misspec_t: y(row) = eta + rng.student_t(process.noise_df); break;
        case ProcessKind::logistic_wellspec: {
            const double p1 = 1.0 / (1.0 + std::exp(-eta));
            y(row) = rng.uniform() < p1 ? 1.0 : -1.0;
            break;
        }
        case ProcessKind::poisson_wellspec: y(row) = static_cast<double>(rng.poisson(std::exp(eta))); break;
        default: break;
        }
    }
    std::optional<Vector> response;
    if (!scorematch) response = std::move(y);
    return Dataset(std::move(X), std::move(response), Provenance{std::string(to_string(process.kind)), seed});
}

Dataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path.string() + "': missing header", 1, 0);
    const auto header = split_fields(line);
    std::size_t features = 0;
    bool has_y = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "x" + std::to_string(c + 1) && !has_y) {
            ++features;
        } else if (header[c] == "y" && c + 1 == header.size()) {
            has_y = true;
        } else {
            throw ParseError("'" + path.string() + "': unexpected header field '" + std::string(header[c]) +
                                 "' (expected x1..xd[,y])",
                             1, c + 1);
        }
    }
    if (features == 0) throw ParseError("'" + path.string() + "': header has no x columns", 1, 0);

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++rows;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DimensionMismatch("'" + path.string() + "' row " + std::to_string(rows - 1) + " (line " +
                                    std::to_string(line_no) + "): expected " + std::to_string(header.size()) +
                                    " fields, found " + std::to_string(fields.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v = 0.0;
            const auto* first = fields[c].data();
            const auto* last = first + fields[c].size();
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (fields[c].empty() || ec != std::errc{} || ptr != last)
                throw ParseError("'" + path.string() + "' row " + std::to_string(rows - 1) + " (line " +
                                     std::to_string(line_no) + "), column " + std::to_string(c + 1) +
                                     ": cannot parse '" + std::string(fields[c]) + "' as a number",
                                 rows - 1, c + 1);
            values.push_back(v);
        }
    }
    if (rows == 0) throw EmptyDataset("'" + path.string() + "' has no data rows");

    const auto width = static_cast<Eigen::Index>(header.size());
    const auto all = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(rows), width);
    std::optional<Vector> y;
    if (has_y) y = all.col(width - 1);
    return Dataset(all.leftCols(static_cast<Eigen::Index>(features)), std::move(y));
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    for (std::size_t j = 0; j < data.d(); ++j) out << (j ? "," : "") << 'x' << j + 1;
    if (data.has_response()) out << ",y";
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto r = data.row(i);
        for (Eigen::Index j = 0; j < r.x.size(); ++j) out << (j ? "," : "") << r.x(j);
        if (data.has_response()) out << ',' << r.y;
        out << '\n';
    }
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace gsc
