#include "drw/linalg.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace drw;

namespace {

// random matrix with entries of mixed valuation, so pivots are not all units
Mat random_mat(int n, const Zpm& R, unsigned seed) {
    std::mt19937_64 rng(seed);
    Mat A(n, n);
    for (auto& x : A.a) x = R.mul(static_cast<std::int64_t>(rng() % R.q), R.ppow(static_cast<int>(rng() % 3)));
    return A;
}

void run_smith(benchmark::State& st, Exec exec) {
    const Zpm R(3, 6);
    const Mat A = random_mat(static_cast<int>(st.range(0)), R, 42);
    for (auto _ : st) benchmark::DoNotOptimize(smith(A, R, exec));
    st.SetComplexityN(st.range(0));
}

void BM_SmithSerial(benchmark::State& st) { run_smith(st, Exec::Serial); }
void BM_SmithParallel(benchmark::State& st) { run_smith(st, Exec::Parallel); }

}  // namespace

BENCHMARK(BM_SmithSerial)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SmithParallel)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
