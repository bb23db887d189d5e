// Serial reference kernels against their OpenMP counterparts.

#include <gsc/bootstrap.hpp>
#include <gsc/estimate.hpp>
#include <gsc/simdata.hpp>

#include <benchmark/benchmark.h>

using namespace gsc;

namespace {

struct Fixture {
    Process p = make_process(ProcessKind::logistic_wellspec, 10);
    Dataset data;
    LossModel model;
    explicit Fixture(std::size_t n) : data(generate(p, n, 1)), model(default_model(p).declared_for(data)) {}
};

void BM_aggregates_serial(benchmark::State& st) {
    Fixture f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(aggregates(f.model, f.data, f.p.theta0));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_aggregates_parallel(benchmark::State& st) {
    Fixture f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(aggregates_parallel(f.model, f.data, f.p.theta0, 256));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void bootstrap_bench(benchmark::State& st, Execution exec) {
    Fixture f(1000);
    const auto fit = fit_erm(f.model, f.data);
    BootstrapConfig cfg;
    cfg.B = static_cast<std::size_t>(st.range(0));
    cfg.seed = 3;
    cfg.exec = exec;
    for (auto _ : st) benchmark::DoNotOptimize(bootstrap_replicates(f.model, f.data, fit, cfg));
}

void BM_bootstrap_serial(benchmark::State& st) { bootstrap_bench(st, Execution::serial); }
void BM_bootstrap_parallel(benchmark::State& st) { bootstrap_bench(st, Execution::parallel); }

}  // namespace

BENCHMARK(BM_aggregates_serial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_aggregates_parallel)->Arg(10000)->Arg(100000);
BENCHMARK(BM_bootstrap_serial)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_parallel)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
