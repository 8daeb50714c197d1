#ifndef CTMLE_HARNESS_HPP
#define CTMLE_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctmle/estimators.hpp"
#include "ctmle/models.hpp"
#include "ctmle/simulate.hpp"

namespace ctmle {

/// Monte-Carlo experiment: R independent trials, each simulating one path and
/// running every requested estimator on it with one shared randomized start.
struct ExperimentSpec {
    DiffusionModel model;
    Eigen::VectorXd true_theta;
    ParamVector box; // admissible set; randomized starts are uniform over it
    double t_years = 5.0;
    double frequency = 250.0; // observations per year, 1/delta
    int trials = 100;
    std::vector<std::string> estimators{"ctmc"};
    std::uint64_t seed = 0;
    double s0 = 0.0;
    Scheme scheme = Scheme::Milstein;
    int substeps = 10;
    int threads = 0; // 0 = hardware concurrency
    EstimatorOptions est_options;

    double delta() const { return 1.0 / frequency; }
    int n_obs() const { return static_cast<int>(t_years * frequency); } // rounded down
};

struct TrialRecord {
    int trial = 0;
    std::string method;
    bool ok = false;
    std::string error; // set when ok == false
    Eigen::VectorXd theta_hat;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct TrialTable {
    struct Row {
        std::string method;
        int param = 0;
        double true_value = 0.0;
        double mean = 0.0;
        double bias = 0.0;
        double sd = 0.0;
    };
    std::vector<Row> rows;                // estimators x parameters
    std::map<std::string, double> l2;     // mean of ||theta - theta_hat|| per method
    std::map<std::string, int> failures;  // per-trial estimator failures (excluded, reported)
    std::vector<TrialRecord> raw;         // ordered by (trial, method)
};

TrialTable run_experiment(const ExperimentSpec& spec);

/// Emit the aggregate table / the per-trial records as CSV.
void write_summary_csv(const std::string& path, const TrialTable& table);
void write_trials_csv(const std::string& path, const TrialTable& table);

struct FitResult {
    EstimationResult estimate;
    int rows_dropped = 0; // missing-value placeholders in the CSV
    int n_used = 0;
};

/// Fit a model to a numeric CSV column with the chosen method.
FitResult fit_csv(const std::string& path, const std::string& column, const DiffusionModel& model,
                  const std::string& method, double delta, const ParamVector& theta0,
                  const EstimatorOptions& options = {});

/// Re-simulate with the same seed but estimated coefficients; returns
/// (original path, re-simulated path).
std::pair<std::vector<double>, std::vector<double>> resimulate(const SimulationConfig& original,
                                                               const Eigen::VectorXd& theta_hat);

/// Convergence sweep over state counts; returns m -> aggregate table.
std::map<int, TrialTable> sweep_m(ExperimentSpec spec, const std::vector<int>& m_values);

} // namespace ctmle

#endif
