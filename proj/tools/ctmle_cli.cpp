// Command-line front end: simulate paths, fit models, and run Monte-Carlo
// experiment tables. Subcommands: simulate, estimate, experiment, fit-csv,
// resim, sweep-m. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 numerical failure.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctmle/csv.hpp"
#include "ctmle/harness.hpp"

using json = nlohmann::json;
using namespace ctmle;

namespace {

Eigen::VectorXd parse_vector(const std::string& csv, const std::string& what) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ConfigError(what + ": expected comma-separated numbers, got '" + csv + "'");
        }
    }
    if (vals.empty()) throw ConfigError(what + ": empty vector");
    Eigen::VectorXd out(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) out[static_cast<int>(i)] = vals[i];
    return out;
}

Scheme parse_scheme(const std::string& s) {
    if (s == "exact") return Scheme::Exact;
    if (s == "euler") return Scheme::Euler;
    if (s == "milstein") return Scheme::Milstein;
    throw ConfigError("unknown scheme '" + s + "' (expected exact, euler, milstein)");
}

Boundary parse_boundary(const std::string& s) {
    if (s == "reflect") return Boundary::Reflect;
    if (s == "absorb") return Boundary::Absorb;
    throw ConfigError("unknown boundary '" + s + "' (expected reflect, absorb)");
}

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Expand a flat key=value config file into --key=value arguments. Blank lines
// and '#' comments are skipped.
std::vector<std::string> load_config_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key=value at " + path + ":" +
                              std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: empty key at " + path + ":" + std::to_string(lineno));
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

// Shared estimation/simulation options gathered from flags.
struct CommonOpts {
    std::string model = "ou";
    std::string method = "ctmc";
    std::string theta_csv;
    std::string theta0_csv;
    std::string lower_csv;
    std::string upper_csv;
    int m = 300;
    double delta = 1.0 / 250.0;
    int n = 1250;
    int trials = 100;
    std::uint64_t seed = 0;
    std::string out;
    bool strict_grid = false;
    std::string boundary = "reflect";
    bool emit_json = false;
    std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    // Config-file values are injected as leading arguments; take-last lets
    // flags typed on the command line override them.
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--config", o.config_path,
                    "Flat key=value config file; command-line flags override it");
    cmd->add_option("--model", o.model, "Model name: gbm, ou, cir, ckls, hyperbolic");
    cmd->add_option("--m", o.m, "Number of chain states")->capture_default_str();
    cmd->add_option("--delta", o.delta, "Observation spacing in years")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", o.out, "Output CSV path");
    cmd->add_flag("--strict-grid", o.strict_grid, "Fail on grid-step condition violations");
    cmd->add_option("--boundary", o.boundary, "Boundary rows: reflect or absorb")
        ->capture_default_str();
    cmd->add_flag("--json", o.emit_json, "Print JSON diagnostics to stdout");
}

ParamVector make_start(const DiffusionModel& model, const CommonOpts& o) {
    ParamVector box = model.default_box();
    if (!o.lower_csv.empty()) box.lower = parse_vector(o.lower_csv, "--lower");
    if (!o.upper_csv.empty()) box.upper = parse_vector(o.upper_csv, "--upper");
    if (!o.theta0_csv.empty())
        box.values = parse_vector(o.theta0_csv, "--theta0");
    else
        box.values = 0.5 * (box.lower + box.upper);
    box.values = box.values.cwiseMax(box.lower).cwiseMin(box.upper);
    box.validate();
    if (box.dim() != model.dim)
        throw ConfigError("parameter dimension mismatch: model '" + model.name + "' has " +
                          std::to_string(model.dim) + " parameters");
    return box;
}

EstimatorOptions make_est_options(const CommonOpts& o) {
    EstimatorOptions opt;
    opt.m = o.m;
    opt.strict_grid = o.strict_grid;
    opt.boundary = parse_boundary(o.boundary);
    return opt;
}

void write_series_csv(const std::string& path, const std::vector<double>& series, double delta) {
    CsvTable t;
    t.header = {"time", "value"};
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::ostringstream time, value;
        time.precision(10);
        value.precision(17);
        time << static_cast<double>(i) * delta;
        value << series[i];
        t.rows.push_back({time.str(), value.str()});
    }
    write_csv(path, t);
}

std::vector<double> read_series(const std::string& path, const std::string& column,
                                int* dropped) {
    const CsvTable t = read_csv(path);
    if (!column.empty()) return numeric_column(t, column, dropped);
    if (t.header.size() != 1)
        throw ConfigError("input has " + std::to_string(t.header.size()) +
                          " columns; pick one with --column");
    return numeric_column(t, t.header[0], dropped);
}

json estimate_json(const EstimationResult& r) {
    json j;
    j["method"] = r.method;
    j["theta_hat"] = std::vector<double>(r.theta_hat.values.begin(), r.theta_hat.values.end());
    j["loglik"] = r.loglik;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["grad_norm"] = r.grad_norm;
    j["clamp_violations"] = r.clamp_violations;
    j["variance_floors"] = r.variance_floors;
    j["wall_time_sec"] = r.wall_time_sec;
    return j;
}

void write_estimate_csv(const std::string& path, const EstimationResult& r) {
    CsvTable t;
    t.header = {"method", "param", "value", "loglik", "iterations", "converged"};
    for (int i = 0; i < r.theta_hat.dim(); ++i) {
        std::ostringstream v, ll;
        v.precision(17);
        ll.precision(17);
        v << r.theta_hat.values[i];
        ll << r.loglik;
        t.rows.push_back({r.method, std::to_string(i), v.str(), ll.str(),
                          std::to_string(r.iterations), r.converged ? "1" : "0"});
    }
    write_csv(path, t);
}

int run(int argc, char** argv) {
    CLI::App app{"Diffusion parameter estimation via Markov chain approximation"};
    app.require_subcommand(1);

    // simulate -------------------------------------------------------------
    CommonOpts sim_o;
    std::string sim_scheme = "milstein", sim_positivity = "reflect";
    double sim_s0 = 0.0;
    int sim_substeps = 10;
    std::uint64_t sim_stream = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a sample path");
    add_common(sim_cmd, sim_o);
    sim_cmd->add_option("--theta", sim_o.theta_csv, "Model parameters")->required();
    sim_cmd->add_option("--s0", sim_s0, "Initial value")->required();
    sim_cmd->add_option("--n", sim_o.n, "Number of observations")->capture_default_str();
    sim_cmd->add_option("--scheme", sim_scheme, "exact, euler, or milstein")
        ->capture_default_str();
    sim_cmd->add_option("--substeps", sim_substeps, "Sub-steps per observation")
        ->capture_default_str();
    sim_cmd->add_option("--stream", sim_stream, "RNG stream index")->capture_default_str();
    sim_cmd->add_option("--positivity", sim_positivity, "reflect or truncate")
        ->capture_default_str();

    // estimate -------------------------------------------------------------
    CommonOpts est_o;
    std::string est_in, est_column;
    auto* est_cmd = app.add_subcommand("estimate", "Fit a model to a series");
    add_common(est_cmd, est_o);
    est_cmd->add_option("--method", est_o.method, "ctmc, exact, euler, kessler, shoji-ozaki")
        ->capture_default_str();
    est_cmd->add_option("--theta0", est_o.theta0_csv, "Starting parameters");
    est_cmd->add_option("--lower", est_o.lower_csv, "Lower parameter bounds");
    est_cmd->add_option("--upper", est_o.upper_csv, "Upper parameter bounds");
    est_cmd->add_option("--in", est_in, "Input CSV")->required();
    est_cmd->add_option("--column", est_column, "Column to fit (default: sole column)");

    // fit-csv --------------------------------------------------------------
    CommonOpts fit_o;
    std::string fit_in, fit_column;
    auto* fit_cmd =
        app.add_subcommand("fit-csv", "Fit a named CSV column, dropping missing values");
    add_common(fit_cmd, fit_o);
    fit_cmd->add_option("--method", fit_o.method, "ctmc, exact, euler, kessler, shoji-ozaki")
        ->capture_default_str();
    fit_cmd->add_option("--theta0", fit_o.theta0_csv, "Starting parameters");
    fit_cmd->add_option("--lower", fit_o.lower_csv, "Lower parameter bounds");
    fit_cmd->add_option("--upper", fit_o.upper_csv, "Upper parameter bounds");
    fit_cmd->add_option("--in", fit_in, "Input CSV")->required();
    fit_cmd->add_option("--column", fit_column, "Column name")->required();

    // experiment -----------------------------------------------------------
    CommonOpts exp_o;
    std::string exp_estimators = "ctmc,exact", exp_scheme = "exact";
    double exp_t_years = 5.0, exp_frequency = 250.0, exp_s0 = 0.0;
    int exp_threads = 0, exp_substeps = 10;
    auto* exp_cmd = app.add_subcommand("experiment", "Monte-Carlo bias/sd table");
    add_common(exp_cmd, exp_o);
    exp_cmd->add_option("--theta", exp_o.theta_csv, "True parameters")->required();
    exp_cmd->add_option("--s0", exp_s0, "Initial value")->required();
    exp_cmd->add_option("--trials", exp_o.trials, "Replications")->capture_default_str();
    exp_cmd->add_option("--t-years", exp_t_years, "Sample length in years")
        ->capture_default_str();
    exp_cmd->add_option("--frequency", exp_frequency, "Observations per year")
        ->capture_default_str();
    exp_cmd->add_option("--estimators", exp_estimators, "Comma-separated estimator list")
        ->capture_default_str();
    exp_cmd->add_option("--scheme", exp_scheme, "Path scheme")->capture_default_str();
    exp_cmd->add_option("--substeps", exp_substeps, "Sub-steps per observation")
        ->capture_default_str();
    exp_cmd->add_option("--threads", exp_threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    exp_cmd->add_option("--lower", exp_o.lower_csv, "Lower bounds of the admissible box");
    exp_cmd->add_option("--upper", exp_o.upper_csv, "Upper bounds of the admissible box");

    // resim ----------------------------------------------------------------
    CommonOpts re_o;
    std::string re_theta_hat, re_scheme = "exact";
    double re_s0 = 0.0;
    int re_substeps = 10;
    std::uint64_t re_stream = 0;
    auto* re_cmd =
        app.add_subcommand("resim", "Original vs re-simulated path at fitted parameters");
    add_common(re_cmd, re_o);
    re_cmd->add_option("--theta", re_o.theta_csv, "Original parameters")->required();
    re_cmd->add_option("--theta-hat", re_theta_hat, "Fitted parameters")->required();
    re_cmd->add_option("--s0", re_s0, "Initial value")->required();
    re_cmd->add_option("--n", re_o.n, "Number of observations")->capture_default_str();
    re_cmd->add_option("--scheme", re_scheme, "Path scheme")->capture_default_str();
    re_cmd->add_option("--substeps", re_substeps, "Sub-steps per observation")
        ->capture_default_str();
    re_cmd->add_option("--stream", re_stream, "RNG stream index")->capture_default_str();

    // sweep-m --------------------------------------------------------------
    CommonOpts sw_o;
    std::string sw_m_values = "50,100,200,300", sw_estimators = "ctmc", sw_scheme = "exact";
    double sw_t_years = 5.0, sw_frequency = 250.0, sw_s0 = 0.0;
    int sw_threads = 0;
    auto* sw_cmd = app.add_subcommand("sweep-m", "Convergence sweep over the state count");
    add_common(sw_cmd, sw_o);
    sw_cmd->add_option("--theta", sw_o.theta_csv, "True parameters")->required();
    sw_cmd->add_option("--s0", sw_s0, "Initial value")->required();
    sw_cmd->add_option("--trials", sw_o.trials, "Replications per m")->capture_default_str();
    sw_cmd->add_option("--m-values", sw_m_values, "Comma-separated state counts")
        ->capture_default_str();
    sw_cmd->add_option("--t-years", sw_t_years, "Sample length in years")->capture_default_str();
    sw_cmd->add_option("--frequency", sw_frequency, "Observations per year")
        ->capture_default_str();
    sw_cmd->add_option("--estimators", sw_estimators, "Comma-separated estimator list")
        ->capture_default_str();
    sw_cmd->add_option("--scheme", sw_scheme, "Path scheme")->capture_default_str();
    sw_cmd->add_option("--threads", sw_threads, "Worker threads (0 = hardware)")
        ->capture_default_str();

    // Splice config-file arguments in right after the subcommand name so the
    // user's own flags come later and win under the take-last policy.
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (!config_path.empty() && !args.empty()) {
        const auto extra = load_config_args(config_path);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::vector<const char*> cargv{argv[0]};
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad flags are configuration errors
    }

    if (sim_cmd->parsed()) {
        SimulationConfig cfg;
        cfg.model = find_model(sim_o.model);
        cfg.theta = parse_vector(sim_o.theta_csv, "--theta");
        if (cfg.theta.size() != cfg.model.dim)
            throw ConfigError("--theta: expected " + std::to_string(cfg.model.dim) + " values");
        cfg.s0 = sim_s0;
        cfg.delta = sim_o.delta;
        cfg.n = sim_o.n;
        cfg.substeps = sim_substeps;
        cfg.scheme = parse_scheme(sim_scheme);
        if (sim_positivity == "truncate")
            cfg.positivity = PositivityFix::FullTruncation;
        else if (sim_positivity != "reflect")
            throw ConfigError("--positivity: expected reflect or truncate");
        cfg.seed = sim_o.seed;
        cfg.stream = sim_stream;
        const auto path = simulate_path(cfg);
        if (!sim_o.out.empty()) write_series_csv(sim_o.out, path, cfg.delta);
        if (sim_o.emit_json) {
            json j{{"n", cfg.n},       {"delta", cfg.delta},         {"seed", cfg.seed},
                   {"first", path[0]}, {"last", path[cfg.n - 1]},    {"scheme", sim_scheme},
                   {"model", sim_o.model}};
            std::cout << j.dump(2) << "\n";
        } else if (sim_o.out.empty()) {
            for (double x : path) std::cout << x << "\n";
        }
        return 0;
    }

    if (est_cmd->parsed() || fit_cmd->parsed()) {
        const bool is_fit = fit_cmd->parsed();
        CommonOpts& o = is_fit ? fit_o : est_o;
        const DiffusionModel model = find_model(o.model);
        const ParamVector start = make_start(model, o);
        const EstimatorOptions opt = make_est_options(o);

        EstimationResult res;
        int dropped = 0, used = 0;
        if (is_fit) {
            const FitResult fit =
                fit_csv(fit_in, fit_column, model, o.method, o.delta, start, opt);
            res = fit.estimate;
            dropped = fit.rows_dropped;
            used = fit.n_used;
        } else {
            const auto series = read_series(est_in, est_column, &dropped);
            if (series.size() < 2) throw DataError("estimate: fewer than 2 valid rows");
            used = static_cast<int>(series.size());
            res = estimate(o.method, series, model, o.delta, start, opt);
        }
        if (!o.out.empty()) write_estimate_csv(o.out, res);
        if (o.emit_json) {
            json j = estimate_json(res);
            j["rows_dropped"] = dropped;
            j["rows_used"] = used;
            j["model"] = o.model;
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << o.method << " theta_hat:";
            for (int i = 0; i < res.theta_hat.dim(); ++i)
                std::cout << " " << res.theta_hat.values[i];
            std::cout << " loglik: " << res.loglik
                      << " converged: " << (res.converged ? "yes" : "no") << "\n";
        }
        return res.converged ? 0 : 4;
    }

    auto build_spec = [&](CommonOpts& o, double t_years, double frequency, double s0,
                          const std::string& estimators, const std::string& scheme, int threads,
                          int substeps) {
        ExperimentSpec spec;
        spec.model = find_model(o.model);
        spec.true_theta = parse_vector(o.theta_csv, "--theta");
        if (spec.true_theta.size() != spec.model.dim)
            throw ConfigError("--theta: expected " + std::to_string(spec.model.dim) + " values");
        spec.box = spec.model.default_box();
        if (!o.lower_csv.empty()) spec.box.lower = parse_vector(o.lower_csv, "--lower");
        if (!o.upper_csv.empty()) spec.box.upper = parse_vector(o.upper_csv, "--upper");
        spec.box.values = 0.5 * (spec.box.lower + spec.box.upper);
        spec.box.validate();
        spec.t_years = t_years;
        spec.frequency = frequency;
        spec.trials = o.trials;
        spec.estimators = split_names(estimators);
        spec.seed = o.seed;
        spec.s0 = s0;
        spec.scheme = parse_scheme(scheme);
        spec.substeps = substeps;
        spec.threads = threads;
        spec.est_options = make_est_options(o);
        return spec;
    };

    if (exp_cmd->parsed()) {
        const ExperimentSpec spec = build_spec(exp_o, exp_t_years, exp_frequency, exp_s0,
                                               exp_estimators, exp_scheme, exp_threads,
                                               exp_substeps);
        const TrialTable table = run_experiment(spec);
        const std::string base = exp_o.out.empty() ? "experiment" : exp_o.out;
        write_summary_csv(base + "_summary.csv", table);
        write_trials_csv(base + "_trials.csv", table); // raw results kept for auditing
        if (exp_o.emit_json) {
            json j;
            j["trials"] = spec.trials;
            j["n_obs"] = spec.n_obs();
            for (const auto& [method, fails] : table.failures) {
                j["failures"][method] = fails;
                if (table.l2.count(method)) j["l2"][method] = table.l2.at(method);
            }
            std::cout << j.dump(2) << "\n";
        } else {
            for (const auto& row : table.rows)
                std::cout << row.method << " theta_" << row.param << " mean " << row.mean
                          << " bias " << row.bias << " sd " << row.sd << "\n";
        }
        return 0;
    }

    if (re_cmd->parsed()) {
        SimulationConfig cfg;
        cfg.model = find_model(re_o.model);
        cfg.theta = parse_vector(re_o.theta_csv, "--theta");
        cfg.s0 = re_s0;
        cfg.delta = re_o.delta;
        cfg.n = re_o.n;
        cfg.substeps = re_substeps;
        cfg.scheme = parse_scheme(re_scheme);
        cfg.seed = re_o.seed;
        cfg.stream = re_stream;
        const Eigen::VectorXd theta_hat = parse_vector(re_theta_hat, "--theta-hat");
        if (theta_hat.size() != cfg.model.dim)
            throw ConfigError("--theta-hat: expected " + std::to_string(cfg.model.dim) +
                              " values");
        const auto [original, refit] = resimulate(cfg, theta_hat);
        CsvTable t;
        t.header = {"time", "original", "resimulated"};
        for (int i = 0; i < cfg.n; ++i) {
            std::ostringstream time, a, b;
            time.precision(10);
            a.precision(17);
            b.precision(17);
            time << i * cfg.delta;
            a << original[i];
            b << refit[i];
            t.rows.push_back({time.str(), a.str(), b.str()});
        }
        const std::string out = re_o.out.empty() ? "resim.csv" : re_o.out;
        write_csv(out, t);
        if (re_o.emit_json) {
            json j{{"out", out},
                   {"terminal_original", original.back()},
                   {"terminal_resimulated", refit.back()}};
            std::cout << j.dump(2) << "\n";
        }
        return 0;
    }

    if (sw_cmd->parsed()) {
        ExperimentSpec spec = build_spec(sw_o, sw_t_years, sw_frequency, sw_s0, sw_estimators,
                                         sw_scheme, sw_threads, 10);
        std::vector<int> m_values;
        for (const auto& name : split_names(sw_m_values)) m_values.push_back(std::stoi(name));
        if (m_values.empty()) throw ConfigError("--m-values: empty list");
        const auto sweep = sweep_m(spec, m_values);
        CsvTable t;
        t.header = {"m", "method", "l2", "failures"};
        json j;
        for (const auto& [m, table] : sweep) {
            for (const auto& [method, l2] : table.l2) {
                std::ostringstream v;
                v.precision(17);
                v << l2;
                const int fails =
                    table.failures.count(method) ? table.failures.at(method) : 0;
                t.rows.push_back({std::to_string(m), method, v.str(), std::to_string(fails)});
                j[std::to_string(m)][method] = l2;
            }
        }
        const std::string out = sw_o.out.empty() ? "sweep_m.csv" : sw_o.out;
        write_csv(out, t);
        if (sw_o.emit_json)
            std::cout << j.dump(2) << "\n";
        else
            for (const auto& row : t.rows)
                std::cout << "m=" << row[0] << " " << row[1] << " l2=" << row[2] << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
