#include <benchmark/benchmark.h>

#include "ltforge/fgl/law.hpp"
#include "ltforge/level/level.hpp"
#include "ltforge/level/quotient_tower.hpp"
#include "ltforge/ss/ledger.hpp"
#include "ltforge/tower/tower.hpp"
#include "ltforge/zeta/zeta.hpp"

using namespace ltforge;

static void BM_MultiplicativeASeries(benchmark::State& state) {
    const auto D = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        auto F = fgl::fgl_multiplicative(exact::CoefficientRing::integers(), D);
        benchmark::DoNotOptimize(F.a_series(7));
    }
}
BENCHMARK(BM_MultiplicativeASeries)->Arg(8)->Arg(16)->Arg(32);

static void BM_HondaHeight(benchmark::State& state) {
    const auto n = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fgl::a_height(fgl::honda_law(n, 3, 27)));
}
BENCHMARK(BM_HondaHeight)->DenseRange(1, 3);

static void BM_EnumerateDrinfeld(benchmark::State& state) {
    auto R = exact::CoefficientRing::nilpotent_extension(exact::CoefficientRing::prime_field(3), "e", 2);
    const auto n = static_cast<unsigned>(state.range(0));
    auto F = fgl::fgl_multiplicative(R, level::exact_check_degree(R, 3, 1, n));
    for (auto _ : state) benchmark::DoNotOptimize(level::enumerate_drinfeld(F, 1, n));
}
BENCHMARK(BM_EnumerateDrinfeld)->Arg(1)->Arg(2);

static void BM_QuotientTower(benchmark::State& state) {
    level::QuotientTowerOptions o;
    o.p = static_cast<unsigned long>(state.range(0));
    o.n = 2;
    o.depth = 2;
    for (auto _ : state) benchmark::DoNotOptimize(level::drinfeld_quotient_tower(o));
}
BENCHMARK(BM_QuotientTower)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_StrataLevel1(benchmark::State& state) {
    const auto n = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(tower::strata_level1(n, 2));
}
BENCHMARK(BM_StrataLevel1)->DenseRange(2, 6)->Unit(benchmark::kMillisecond);

static void BM_ParityCollapse(benchmark::State& state) {
    const auto n = static_cast<unsigned>(state.range(0));
    auto page = ss::two_copy_page(ss::window_page(n, 8));
    for (auto _ : state) benchmark::DoNotOptimize(ss::parity_collapse_check(page, 2 * n));
}
BENCHMARK(BM_ParityCollapse)->DenseRange(1, 6);

static void BM_SpecialValue(benchmark::State& state) {
    const long k = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(zeta::predicted_homotopy_order(zeta::BettiProfile::cp(2), k));
}
BENCHMARK(BM_SpecialValue)->Arg(4)->Arg(20)->Arg(60);

BENCHMARK_MAIN();
