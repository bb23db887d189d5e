#include "cli.hpp"

#include <gsc/bootstrap.hpp>
#include <gsc/errors.hpp>
#include <gsc/estimate.hpp>
#include <gsc/experiments.hpp>
#include <gsc/gof.hpp>
#include <gsc/inference.hpp>
#include <gsc/parallel.hpp>
#include <gsc/serialize.hpp>
#include <gsc/simdata.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace gsc::cli {

namespace {

const std::vector<std::string> kCommands{"fit", "confset", "effdim", "gof", "bootstrap", "experiment"};

Vector parse_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        std::string field = text.substr(start, comma - start);
        field.erase(0, field.find_first_not_of(" \t"));
        field.erase(field.find_last_not_of(" \t") + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
            throw Error("--" + what + ": cannot parse '" + field + "' as a number");
        values.push_back(v);
        start = comma + 1;
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::string scalar_token(const Json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    throw Error("config key '" + key + "' has an unsupported value type");
}

// Arrays (and arrays of arrays, row-major) become comma lists.
std::string list_token(const Json& v, const std::string& key) {
    std::string out;
    for (const auto& item : v) {
        const std::string part = item.is_array() ? list_token(item, key) : scalar_token(item, key);
        out += (out.empty() ? "" : ",") + part;
    }
    return out;
}

struct Globals {
    std::uint64_t seed = 0;
    std::string out = "-";
    std::string config;
    int threads = 0;
};

struct DataOptions {
    std::string data;
    std::string process;
    std::string model;
    int d = 5;
    std::size_t n = 1000;
    std::string theta0;
    std::string x_cov;
    double noise_df = 3.5;
    double tol = 1e-10;
    int max_iter = 100;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
    cmd->add_option("--data", o.data, "CSV dataset with header x1..xd[,y]");
    cmd->add_option("--process", o.process,
                    "Data-generating process (linear_wellspec, linear_misspec_t, logistic_wellspec, "
                    "poisson_wellspec, gaussian_expfam_scorematch)");
    cmd->add_option("--model", o.model, "Loss: squared, logistic, poisson, score_matching");
    cmd->add_option("--d", o.d, "Process parameter dimension");
    cmd->add_option("--n", o.n, "Sample size drawn from --process");
    cmd->add_option("--theta0", o.theta0, "True parameter, comma separated (default equispaced)");
    cmd->add_option("--x-cov", o.x_cov, "Feature covariance, row-major comma list");
    cmd->add_option("--noise-df", o.noise_df, "Student-t degrees of freedom");
    cmd->add_option("--tol", o.tol, "Newton decrement tolerance");
    cmd->add_option("--max-iter", o.max_iter, "Newton iteration cap");
}

std::optional<Process> build_process(const DataOptions& o) {
    if (o.process.empty()) return std::nullopt;
    Process p = make_process(process_kind_from_string(o.process), o.d);
    if (!o.theta0.empty()) p.theta0 = parse_list(o.theta0, "theta0");
    if (!o.x_cov.empty()) {
        const Vector flat = parse_list(o.x_cov, "x-cov");
        if (flat.size() != static_cast<Eigen::Index>(o.d) * o.d) throw DimensionMismatch("--x-cov needs d*d entries");
        p.x_cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            flat.data(), o.d, o.d);
    }
    p.noise_df = o.noise_df;
    p.validate();
    return p;
}

LossModel build_model(const DataOptions& o, const std::optional<Process>& process, const Dataset& data) {
    if (o.model.empty()) {
        if (process) return default_model(*process);
        if (!data.has_response()) return LossModel::gaussian_score_matching(static_cast<int>(data.d()));
        throw Error("--model is required with --data");
    }
    const int d = static_cast<int>(data.d());
    if (o.model == "squared") return LossModel::squared(d);
    if (o.model == "logistic") return LossModel::logistic(d, 0.0);
    if (o.model == "poisson") return LossModel::poisson(d, 0.0);
    if (o.model == "score_matching") return LossModel::gaussian_score_matching(d);
    throw Error("unknown --model '" + o.model + "' (expected squared, logistic, poisson or score_matching)");
}

struct Problem {
    std::optional<Process> process;
    Dataset data;
    LossModel model = LossModel::squared(1);
    SolverOptions solver;
};

Problem load_problem(const DataOptions& o, std::uint64_t seed) {
    Problem p;
    p.process = build_process(o);
    if (!o.data.empty()) {
        if (!std::filesystem::exists(o.data)) throw Error("data file '" + o.data + "' does not exist");
        p.data = read_csv(o.data);
    } else if (p.process) {
        p.data = generate(*p.process, o.n, seed);
    } else {
        throw Error("give --data or --process");
    }
    p.model = build_model(o, p.process, p.data);
    p.solver.tol = o.tol;
    p.solver.max_iter = o.max_iter;
    p.solver.validate();
    return p;
}

FitResult fit_or_throw(const Problem& p) {
    FitResult fit = fit_erm(p.model, p.data, p.solver);
    if (fit.diverging)
        throw SingularHessian("no finite minimizer: iterates diverge and the Hessian degenerates "
                              "(separable data?)");
    if (!fit.converged)
        throw NonConverged("Newton stopped after " + std::to_string(fit.iterations) + " iterations, decrement " +
                           std::to_string(fit.newton_decrement));
    return fit;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        out.flush();
        return;
    }
    write_text(path, text);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Vector read_null(const std::string& spec, int dim) {
    Vector theta;
    if (std::filesystem::exists(spec)) {
        const Json j = read_json_file(spec);
        theta = vector_from_json(j.is_object() ? j.at("theta0") : j);
    } else {
        theta = parse_list(spec, "null");
    }
    if (theta.size() != dim)
        throw DimensionMismatch("null parameter has length " + std::to_string(theta.size()) + ", model expects " +
                                std::to_string(dim));
    return theta;
}

std::vector<ProcessKind> parse_processes(const std::string& text) {
    std::vector<ProcessKind> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(process_kind_from_string(item));
    if (out.empty()) throw Error("--models is empty");
    return out;
}

Json run_meta(const Globals& g, const std::string& command) {
    return {{"command", command}, {"seed", g.seed}, {"threads", max_threads()}};
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    const Json cfg = read_json_file(path);
    if (!cfg.is_object()) throw Error("config '" + path + "' must be a JSON object");

    std::vector<std::string> tokens;
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        std::string key = it.key();
        if (key == "schema_version" || key == "command") continue;
        std::replace(key.begin(), key.end(), '_', '-');
        const Json& v = it.value();
        if (v.is_null()) continue;
        if (v.is_boolean()) {
            tokens.push_back("--" + key + "=" + (v.get<bool>() ? "true" : "false"));
            continue;
        }
        tokens.push_back("--" + key);
        tokens.push_back(v.is_array() ? list_token(v, key) : scalar_token(v, key));
    }

    std::vector<std::string> out;
    bool inserted = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
        out.push_back(args[i]);
        if (!inserted && i > 0 && std::find(kCommands.begin(), kCommands.end(), args[i]) != kCommands.end()) {
            out.insert(out.end(), tokens.begin(), tokens.end());
            inserted = true;
        }
    }
    if (!inserted) throw Error("--config needs a subcommand (" + std::string("fit, confset, effdim, gof, bootstrap, experiment") + ")");
    return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inference for M-estimation with generalized self-concordant losses"};
    app.name(raw_args.empty() ? "gscinfer" : raw_args[0]);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random draw");
    app.add_option("--out", g.out, "Output path ('-' for stdout)");
    app.add_option("--config", g.config, "JSON file of option values; explicit flags override it");
    app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the runtime default)");

    // fit
    DataOptions fit_o;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the empirical risk minimizer");
    add_data_options(fit_cmd, fit_o);

    // confset
    DataOptions cs_o;
    std::string cs_kind = "wald";
    std::string cs_cal = "oracle_mc";
    double cs_delta = 0.05;
    std::size_t cs_B = 2000;
    std::size_t cs_reps = 1000;
    double cs_C = 1.0;
    AssumptionConstants cs_k;
    auto* cs_cmd = app.add_subcommand("confset", "Wald or likelihood-ratio confidence set");
    add_data_options(cs_cmd, cs_o);
    cs_cmd->add_option("--kind", cs_kind, "wald or lr");
    cs_cmd->add_option("--calibration", cs_cal, "oracle_mc, bootstrap or explicit_constant");
    cs_cmd->add_option("--delta", cs_delta, "Miscoverage level in (0, 1)");
    cs_cmd->add_option("--B", cs_B, "Bootstrap replications");
    cs_cmd->add_option("--reps", cs_reps, "Oracle calibration replications");
    cs_cmd->add_option("--C", cs_C, "Absolute constant for explicit_constant");
    cs_cmd->add_option("--K1", cs_k.K1, "Sub-Gaussian gradient constant");

    // effdim
    DataOptions ed_o;
    std::string ed_est = "empirical";
    std::size_t ed_mc_n = 100000;
    auto* ed_cmd = app.add_subcommand("effdim", "Effective dimension");
    add_data_options(ed_cmd, ed_o);
    ed_cmd->add_option("--estimator", ed_est, "empirical or oracle");
    ed_cmd->add_option("--mc-n", ed_mc_n, "Monte-Carlo sample size for the oracle");

    // gof
    DataOptions gof_o;
    std::string gof_test = "rao";
    std::string gof_null;
    std::string gof_rule = "oracle_mc";
    std::string gof_format = "json";
    double gof_alpha = 0.05;
    double gof_value = 0.0;
    double gof_c = 0.0;
    std::size_t gof_reps = 1000;
    auto* gof_cmd = app.add_subcommand("gof", "Rao, likelihood-ratio or Wald test of a simple null");
    add_data_options(gof_cmd, gof_o);
    gof_cmd->add_option("--test", gof_test, "rao, lr or wald");
    gof_cmd->add_option("--null", gof_null, "Null parameter: JSON file (array or {\"theta0\": [...]}) or comma list")
        ->required();
    gof_cmd->add_option("--alpha", gof_alpha, "Test level");
    gof_cmd->add_option("--critical", gof_rule, "scaled_dim, explicit or oracle_mc");
    gof_cmd->add_option("--critical-value", gof_value, "Critical value for --critical explicit");
    gof_cmd->add_option("--c", gof_c, "Constant for scaled_dim (default chi2 quantile / d)");
    gof_cmd->add_option("--reps", gof_reps, "Null replications for oracle_mc");
    gof_cmd->add_option("--format", gof_format, "json or csv");

    // bootstrap
    DataOptions bs_o;
    std::string bs_kind = "wald";
    double bs_delta = 0.05;
    std::size_t bs_B = 2000;
    auto* bs_cmd = app.add_subcommand("bootstrap", "Multiplier-bootstrap quantile");
    add_data_options(bs_cmd, bs_o);
    bs_cmd->add_option("--kind", bs_kind, "wald or lr");
    bs_cmd->add_option("--delta", bs_delta, "Upper-tail probability");
    bs_cmd->add_option("--B", bs_B, "Bootstrap replications");

    // experiment
    std::string ex_name;
    CoverageTableConfig ex_cov;
    EffdimErrorConfig ex_eff;
    ConfsetShapeConfig ex_shape;
    std::size_t ex_reps = 0;
    std::size_t ex_n = 0;
    int ex_d = 0;
    std::string ex_levels;
    std::string ex_ngrid;
    std::string ex_dims;
    std::string ex_models;
    auto* ex_cmd = app.add_subcommand("experiment", "Simulation studies");
    ex_cmd->add_option("--name", ex_name, "coverage_table, effdim_error or confset_shape")->required();
    ex_cmd->add_option("--reps", ex_reps, "Replications (coverage: 1000, effdim_error: 30)");
    ex_cmd->add_option("--n", ex_n, "Sample size (coverage: 100, confset_shape: 1000)");
    ex_cmd->add_option("--d", ex_d, "Dimension for coverage_table (default 5)");
    ex_cmd->add_option("--B", ex_cov.B, "Bootstrap replications");
    ex_cmd->add_option("--calibration-reps", ex_cov.calibration_reps, "Oracle calibration replications");
    ex_cmd->add_option("--levels", ex_levels, "Coverage levels, comma separated");
    ex_cmd->add_option("--n-grid", ex_ngrid, "effdim_error sample sizes, comma separated");
    ex_cmd->add_option("--models", ex_models, "Process names, comma separated");
    ex_cmd->add_option("--dims", ex_dims, "effdim_error dimensions, comma separated");
    ex_cmd->add_option("--delta", ex_shape.delta, "confset_shape miscoverage");
    ex_cmd->add_option("--C", ex_shape.C, "confset_shape radius constant");
    ex_cmd->add_option("--points", ex_shape.points, "confset_shape boundary points per ellipse");

    for (auto* cmd : {fit_cmd, cs_cmd, ed_cmd, gof_cmd, bs_cmd, ex_cmd}) cmd->fallthrough();

    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        set_thread_count(g.threads);
        if (fit_cmd->parsed()) {
            const Problem p = load_problem(fit_o, g.seed);
            const FitResult fit = fit_or_throw(p);
            emit(g.out, dump(document("fit", to_json(fit, std::string(to_string(p.model.kind()))))), out);
        } else if (cs_cmd->parsed()) {
            const Problem p = load_problem(cs_o, g.seed);
            const FitResult fit = fit_or_throw(p);
            const auto kind = statistic_kind_from_string(cs_kind);
            const auto cal = calibration_from_string(cs_cal);
            const EffDimReport effdim = effective_dim_empirical(fit);
            RadiusOptions ro;
            ro.C = cs_C;
            ro.process = p.process ? &*p.process : nullptr;
            ro.calibration_reps = cs_reps;
            ro.B = cs_B;
            ro.seed = g.seed;
            const double r = kind == StatisticKind::wald
                                 ? wald_radius(p.model, p.data, fit, effdim, cs_delta, cal, cs_k, ro)
                                 : lr_radius(p.model, p.data, fit, effdim, cs_delta, cal, cs_k, ro);
            const ConfidenceSet set = make_confidence_set(kind, fit, r, cs_delta, cal);
            Json body = to_json(set);
            body["effective_dim"] = effdim.value;
            body["n"] = p.data.n();
            body["run"] = run_meta(g, "confset");
            emit(g.out, dump(document("confidence_set", body)), out);
        } else if (ed_cmd->parsed()) {
            EffDimReport report;
            if (ed_est == "empirical") {
                const Problem p = load_problem(ed_o, g.seed);
                report = effective_dim_empirical(fit_or_throw(p));
            } else if (ed_est == "oracle") {
                const auto process = build_process(ed_o);
                if (!process) throw MissingSampler("--estimator oracle needs --process");
                const LossModel model = ed_o.model.empty() ? default_model(*process)
                                                           : build_model(ed_o, process, generate(*process, 1, g.seed));
                report = effective_dim_oracle(model, *process, process->theta0, ed_mc_n, g.seed);
            } else {
                throw Error("unknown --estimator '" + ed_est + "' (expected empirical or oracle)");
            }
            Json body = to_json(report);
            body["run"] = run_meta(g, "effdim");
            emit(g.out, dump(document("effective_dimension", body)), out);
        } else if (gof_cmd->parsed()) {
            const Problem p = load_problem(gof_o, g.seed);
            const auto kind = test_kind_from_string(gof_test);
            const Vector theta0 = read_null(gof_null, p.model.dim());
            CriticalOptions co;
            co.rule = critical_rule_from_string(gof_rule);
            if (gof_cmd->count("--c") > 0) co.c = gof_c;
            co.value = gof_value;
            co.process = p.process ? &*p.process : nullptr;
            co.reps = gof_reps;
            co.seed = g.seed;
            co.solver = p.solver;
            if (kind == TestKind::rao) err << "rao test: statistic evaluated at the null, no fit performed\n";
            const TestReport report = run_test(kind, p.model, p.data, theta0, gof_alpha, co);
            if (gof_format == "csv") {
                std::ostringstream os;
                write_test_csv(os, report);
                emit(g.out, os.str(), out);
            } else if (gof_format == "json") {
                Json body = to_json(report);
                body["alpha"] = gof_alpha;
                body["run"] = run_meta(g, "gof");
                emit(g.out, dump(document("test_report", body)), out);
            } else {
                throw Error("unknown --format '" + gof_format + "' (expected json or csv)");
            }
        } else if (bs_cmd->parsed()) {
            const Problem p = load_problem(bs_o, g.seed);
            const FitResult fit = fit_or_throw(p);
            BootstrapConfig bc;
            bc.B = bs_B;
            bc.delta = bs_delta;
            bc.seed = g.seed;
            bc.solver = p.solver;
            if (bs_B < 100) err << "warning: B = " << bs_B << " is below 100\n";
            const auto q = bootstrap_quantile(p.model, p.data, fit, bc, statistic_kind_from_string(bs_kind));
            Json body{{"statistic", bs_kind}, {"delta", bs_delta}, {"B", bs_B},
                      {"quantile", q.quantile}, {"n_failed", q.n_failed}, {"n_used", q.n_used}};
            body["run"] = run_meta(g, "bootstrap");
            emit(g.out, dump(document("bootstrap_quantile", body)), out);
        } else if (ex_cmd->parsed()) {
            std::ostringstream csv;
            Json meta{{"name", ex_name}};
            if (ex_name == "coverage_table") {
                if (ex_reps) ex_cov.reps = ex_reps;
                if (ex_n) ex_cov.n = ex_n;
                if (ex_d) ex_cov.d = ex_d;
                if (!ex_levels.empty()) {
                    const Vector lv = parse_list(ex_levels, "levels");
                    ex_cov.levels.assign(lv.data(), lv.data() + lv.size());
                }
                if (!ex_models.empty()) ex_cov.models = parse_processes(ex_models);
                ex_cov.seed = g.seed;
                write_coverage_csv(csv, coverage_table(ex_cov));
                meta["d"] = ex_cov.d;
                meta["n"] = ex_cov.n;
                meta["reps"] = ex_cov.reps;
                meta["B"] = ex_cov.B;
                meta["calibration_reps"] = ex_cov.calibration_reps;
                meta["delta_column"] = "nominal coverage level";
            } else if (ex_name == "effdim_error") {
                if (ex_reps) ex_eff.reps = ex_reps;
                if (!ex_ngrid.empty()) {
                    const Vector v = parse_list(ex_ngrid, "n-grid");
                    ex_eff.n_grid.clear();
                    for (double x : v) ex_eff.n_grid.push_back(static_cast<std::size_t>(x));
                }
                if (!ex_dims.empty()) {
                    const Vector v = parse_list(ex_dims, "dims");
                    ex_eff.dims.clear();
                    for (double x : v) ex_eff.dims.push_back(static_cast<int>(x));
                }
                if (!ex_models.empty()) ex_eff.models = parse_processes(ex_models);
                ex_eff.seed = g.seed;
                write_effdim_error_csv(csv, effdim_error(ex_eff));
                meta["reps"] = ex_eff.reps;
            } else if (ex_name == "confset_shape") {
                if (ex_n) ex_shape.n = ex_n;
                ex_shape.seed = g.seed;
                const auto shapes = confset_shape(ex_shape);
                write_confset_shape_csv(csv, shapes);
                Json sets = Json::array();
                for (const auto& s : shapes)
                    sets.push_back({{"covariance", matrix_json(s.covariance)},
                                    {"center", vector_json(s.center)},
                                    {"shape", matrix_json(s.shape)},
                                    {"sq_radius", s.sq_radius}});
                meta["n"] = ex_shape.n;
                meta["sets"] = sets;
            } else {
                throw Error("unknown experiment '" + ex_name + "' (expected coverage_table, effdim_error or confset_shape)");
            }
            meta["run"] = run_meta(g, "experiment");
            emit(g.out, csv.str(), out);
            if (!g.out.empty() && g.out != "-") write_text(g.out + ".meta.json", dump(document("experiment", meta)));
        }
    } catch (const NonConverged& e) {
        err << "error: not converged: " << e.what() << '\n';
        return kNonConverged;
    } catch (const SingularHessian& e) {
        err << "error: singular Hessian: " << e.what() << '\n';
        return kSingular;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}

}  // namespace gsc::cli
