// Microbenchmarks for the CTMC likelihood kernel: cost per evaluation as a
// function of the grid size m and of the sample length n. The binned-count
// representation makes a single likelihood-plus-gradient pass O(m^2 + m b)
// in the grid, independent of n once the counts are formed.
#include <benchmark/benchmark.h>

#include "ctmle/grid.hpp"
#include "ctmle/likelihood.hpp"
#include "ctmle/models.hpp"
#include "ctmle/simulate.hpp"

namespace {

using namespace ctmle;

struct Fixture {
    DiffusionModel model = find_model("ou");
    Eigen::VectorXd theta;
    std::vector<double> path;
    double delta = 1.0 / 250.0;

    explicit Fixture(int n) {
        theta.resize(3);
        theta << 4.0, 0.2, 0.4;
        SimulationConfig cfg;
        cfg.model = model;
        cfg.theta = theta;
        cfg.s0 = 0.2;
        cfg.delta = delta;
        cfg.n = n;
        cfg.scheme = Scheme::Exact;
        cfg.seed = 42;
        path = simulate_path(cfg);
    }

    LikelihoodWorkspace workspace(int m) const {
        auto grid = build_grid(path, m, 0.10, model);
        return LikelihoodWorkspace(model, grid, count_matrix(bin_sample(path, grid, delta), m),
                                   delta);
    }
};

void bm_loglik_gradient_vs_m(benchmark::State& state) {
    static const Fixture fix(1250);
    const int m = static_cast<int>(state.range(0));
    LikelihoodWorkspace ws = fix.workspace(m);
    double bump = 0.0;
    for (auto _ : state) {
        Eigen::VectorXd th = fix.theta;
        th[2] += 1e-7 * (bump += 1.0); // defeat the theta cache
        benchmark::DoNotOptimize(ws.log_likelihood(th));
        benchmark::DoNotOptimize(ws.gradient(th));
    }
}
BENCHMARK(bm_loglik_gradient_vs_m)->Arg(50)->Arg(100)->Arg(200)->Arg(300)->Unit(benchmark::kMillisecond);

void bm_loglik_gradient_vs_n(benchmark::State& state) {
    const Fixture fix(static_cast<int>(state.range(0)));
    LikelihoodWorkspace ws = fix.workspace(300);
    double bump = 0.0;
    for (auto _ : state) {
        Eigen::VectorXd th = fix.theta;
        th[2] += 1e-7 * (bump += 1.0);
        benchmark::DoNotOptimize(ws.log_likelihood(th));
        benchmark::DoNotOptimize(ws.gradient(th));
    }
}
BENCHMARK(bm_loglik_gradient_vs_n)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void bm_count_matrix(benchmark::State& state) {
    const Fixture fix(static_cast<int>(state.range(0)));
    auto grid = build_grid(fix.path, 300, 0.10, fix.model);
    const auto binned = bin_sample(fix.path, grid, fix.delta);
    for (auto _ : state) benchmark::DoNotOptimize(count_matrix(binned, 300));
}
BENCHMARK(bm_count_matrix)->Arg(1000)->Arg(100000);

} // namespace

BENCHMARK_MAIN();
