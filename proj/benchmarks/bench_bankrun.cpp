#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "bankrun/clearing.hpp"
#include "bankrun/htm_optimizer.hpp"
#include "bankrun/scenario.hpp"
#include "oracles.hpp"

using namespace bankrun;

namespace {

std::vector<oracle::RandomSheet> sheets(std::size_t n) {
    std::mt19937_64 rng(5);
    std::vector<oracle::RandomSheet> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_sheet(rng));
    return out;
}

std::vector<oracle::RandomShell> shells(std::size_t n) {
    std::mt19937_64 rng(6);
    std::vector<oracle::RandomShell> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_case2_shell(rng));
    return out;
}

void BM_ClearAlgorithm(benchmark::State& state) {
    const auto in = sheets(256);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& rs = in[i++ % in.size()];
        benchmark::DoNotOptimize(
            clear_algorithm(rs.sheet, InverseDemand::linear(rs.sheet.p, rs.b), rs.lambda_max));
    }
}
BENCHMARK(BM_ClearAlgorithm);

void BM_ClearFixedPoint(benchmark::State& state) {
    const auto in = sheets(256);
    FixedPointOptions opts;
    opts.tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& rs = in[i++ % in.size()];
        benchmark::DoNotOptimize(clear_fixed_point(
            rs.sheet, InverseDemand::linear(rs.sheet.p, rs.b), rs.lambda_max, opts));
    }
}
BENCHMARK(BM_ClearFixedPoint)->Arg(9)->Arg(13);

void BM_OptimalHtm(benchmark::State& state) {
    const auto in = shells(256);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& r = in[i++ % in.size()];
        benchmark::DoNotOptimize(optimal_htm(r.shell, r.p1, r.lambda_max, r.b));
    }
}
BENCHMARK(BM_OptimalHtm);

void BM_OptimalHtmOracle(benchmark::State& state) {
    const auto in = shells(32);
    const int grid = static_cast<int>(state.range(0));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& r = in[i++ % in.size()];
        benchmark::DoNotOptimize(optimal_htm_oracle(r.shell, r.p1, r.lambda_max, r.b, grid));
    }
}
BENCHMARK(BM_OptimalHtmOracle)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
    const auto recs = load_records(BANKRUN_SVB_CSV);
    std::vector<ImpactSpec> impacts;
    for (double b : {0.0001, 0.0002, 0.001, 0.002}) impacts.push_back({ImpactKind::Linear, b, 1.0});
    const std::vector<TransformChain> chains{{}, parse_chain("realize-ugl"),
                                             parse_chain("convert:0.4"), parse_chain("reallocate:0.4")};
    SweepOptions opts;
    opts.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(sweep(recs, {6.5, 7.0, 7.5, 8.0, 8.5}, impacts, chains, opts));
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
