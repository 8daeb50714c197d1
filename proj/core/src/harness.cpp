#include "ctmle/harness.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "ctmle/csv.hpp"
#include "ctmle/errors.hpp"

namespace ctmle {

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

Eigen::VectorXd random_start(const ParamVector& box, std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(seed, stream);
    Eigen::VectorXd x(box.dim());
    for (int i = 0; i < box.dim(); ++i)
        x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * rng.uniform();
    return x;
}

} // namespace

TrialTable run_experiment(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw ConfigError("run_experiment: trials must be >= 1");
    if (spec.estimators.empty()) throw ConfigError("run_experiment: estimator list is empty");
    if (spec.n_obs() < 2) throw ConfigError("run_experiment: T * frequency must give >= 2 points");

    const int n_methods = static_cast<int>(spec.estimators.size());
    std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials) * n_methods);

    auto run_trial = [&](int r) {
        SimulationConfig sim;
        sim.model = spec.model;
        sim.theta = spec.true_theta;
        sim.s0 = spec.s0;
        sim.delta = spec.delta();
        sim.n = spec.n_obs();
        sim.substeps = spec.substeps;
        sim.scheme = spec.scheme;
        sim.seed = spec.seed;
        sim.stream = 2 * static_cast<std::uint64_t>(r); // even: path, odd: start

        std::vector<double> path;
        std::string sim_error;
        try {
            path = simulate_path(sim);
        } catch (const std::exception& e) {
            sim_error = e.what();
        }
        const Eigen::VectorXd theta0 =
            random_start(spec.box, spec.seed, 2 * static_cast<std::uint64_t>(r) + 1);
        const ParamVector start = spec.box.projected(theta0);

        for (int k = 0; k < n_methods; ++k) {
            TrialRecord& rec = records[static_cast<std::size_t>(r) * n_methods + k];
            rec.trial = r;
            rec.method = spec.estimators[k];
            if (!sim_error.empty()) {
                rec.error = "simulation: " + sim_error;
                continue;
            }
            try {
                const EstimationResult est =
                    estimate(rec.method, path, spec.model, spec.delta(), start, spec.est_options);
                rec.ok = est.converged;
                if (!est.converged) rec.error = "optimizer did not converge";
                rec.theta_hat = est.theta_hat.values;
                rec.loglik = est.loglik;
                rec.iterations = est.iterations;
                rec.converged = est.converged;
            } catch (const std::exception& e) {
                rec.error = e.what();
            }
        }
    };

    int n_threads = spec.threads > 0 ? spec.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, spec.trials));
    if (n_threads == 1) {
        for (int r = 0; r < spec.trials; ++r) run_trial(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < spec.trials; r = next.fetch_add(1))
                    run_trial(r);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Aggregates over successful trials only; failures are reported.
    TrialTable table;
    table.raw = std::move(records);
    const int d = static_cast<int>(spec.true_theta.size());
    for (const auto& method : spec.estimators) {
        std::vector<const TrialRecord*> ok;
        int failed = 0;
        for (const auto& rec : table.raw) {
            if (rec.method != method) continue;
            if (rec.ok)
                ok.push_back(&rec);
            else
                ++failed;
        }
        table.failures[method] = failed;
        if (ok.empty()) continue;

        double l2_acc = 0.0;
        for (const auto* rec : ok)
            l2_acc += (spec.true_theta - rec->theta_hat).norm();
        table.l2[method] = l2_acc / static_cast<double>(ok.size());

        for (int i = 0; i < d; ++i) {
            double mean = 0.0;
            for (const auto* rec : ok) mean += rec->theta_hat[i];
            mean /= static_cast<double>(ok.size());
            double var = 0.0;
            for (const auto* rec : ok) {
                const double e = rec->theta_hat[i] - mean;
                var += e * e;
            }
            var = ok.size() > 1 ? var / static_cast<double>(ok.size() - 1) : 0.0;
            table.rows.push_back(
                {method, i, spec.true_theta[i], mean, mean - spec.true_theta[i], std::sqrt(var)});
        }
    }
    return table;
}

void write_summary_csv(const std::string& path, const TrialTable& table) {
    CsvTable out;
    out.header = {"method", "param", "true", "mean", "bias", "sd", "l2", "failures"};
    for (const auto& row : table.rows) {
        const auto l2_it = table.l2.find(row.method);
        const auto fail_it = table.failures.find(row.method);
        out.rows.push_back({row.method, std::to_string(row.param), format_double(row.true_value),
                            format_double(row.mean), format_double(row.bias), format_double(row.sd),
                            l2_it != table.l2.end() ? format_double(l2_it->second) : "",
                            fail_it != table.failures.end() ? std::to_string(fail_it->second) : "0"});
    }
    write_csv(path, out);
}

void write_trials_csv(const std::string& path, const TrialTable& table) {
    CsvTable out;
    out.header = {"trial", "method", "ok", "error", "loglik", "iterations", "theta_hat"};
    for (const auto& rec : table.raw) {
        std::string theta;
        for (int i = 0; i < rec.theta_hat.size(); ++i)
            theta += (i ? ";" : "") + format_double(rec.theta_hat[i]);
        out.rows.push_back({std::to_string(rec.trial), rec.method, rec.ok ? "1" : "0", rec.error,
                            format_double(rec.loglik), std::to_string(rec.iterations), theta});
    }
    write_csv(path, out);
}

FitResult fit_csv(const std::string& path, const std::string& column, const DiffusionModel& model,
                  const std::string& method, double delta, const ParamVector& theta0,
                  const EstimatorOptions& options) {
    const CsvTable table = read_csv(path);
    FitResult out;
    const std::vector<double> series = numeric_column(table, column, &out.rows_dropped);
    if (series.size() < 2)
        throw DataError("fit_csv: column '" + column + "' has fewer than 2 valid rows");
    out.n_used = static_cast<int>(series.size());
    out.estimate = estimate(method, series, model, delta, theta0, options);
    return out;
}

std::pair<std::vector<double>, std::vector<double>> resimulate(const SimulationConfig& original,
                                                               const Eigen::VectorXd& theta_hat) {
    SimulationConfig re = original;
    re.theta = theta_hat;
    return {simulate_path(original), simulate_path(re)};
}

std::map<int, TrialTable> sweep_m(ExperimentSpec spec, const std::vector<int>& m_values) {
    std::map<int, TrialTable> out;
    for (int m : m_values) {
        spec.est_options.m = m;
        out[m] = run_experiment(spec);
    }
    return out;
}

} // namespace ctmle
