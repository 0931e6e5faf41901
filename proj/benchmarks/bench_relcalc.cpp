#include <benchmark/benchmark.h>

#include "relcalc/domination.hpp"
#include "relcalc/limits.hpp"
#include "relcalc/random_gen.hpp"

using namespace relcalc;

namespace {

// One fixed draw per ambient dimension so the numbers across runs are
// comparable; the work being measured is the numerics, not the RNG.
LinearRelation fixed_relation(int dim) {
    Rng rng(12000 + dim);
    return random_relation(dim, dim, rng);
}

void bm_orthonormalize(benchmark::State& state) {
    int dim = static_cast<int>(state.range(0));
    Rng rng(500 + dim);
    Matrix v = gaussian_matrix(dim, dim, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(orthonormalize(v));
    }
}
BENCHMARK(bm_orthonormalize)->Arg(4)->Arg(8)->Arg(16);

void bm_adjoint(benchmark::State& state) {
    int dim = static_cast<int>(state.range(0));
    LinearRelation t = fixed_relation(dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(adjoint(t));
    }
}
BENCHMARK(bm_adjoint)->Arg(3)->Arg(6)->Arg(10);

void bm_product_star(benchmark::State& state) {
    int dim = static_cast<int>(state.range(0));
    LinearRelation t = fixed_relation(dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(product_star(t));
    }
}
BENCHMARK(bm_product_star)->Arg(3)->Arg(6)->Arg(10);

void bm_lebesgue(benchmark::State& state) {
    int dim = static_cast<int>(state.range(0));
    LinearRelation t = fixed_relation(dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lebesgue_decompose(t));
    }
}
BENCHMARK(bm_lebesgue)->Arg(3)->Arg(6)->Arg(10);

void bm_monotone_psd_limit(benchmark::State& state) {
    int dim = static_cast<int>(state.range(0));
    Rng rng(900 + dim);
    Matrix a = random_psd_matrix(dim, 1, 0.5, 4.0, rng);
    Schedule sched;
    sched.kind = Schedule::Kind::N;
    SequenceSpec seq = SequenceSpec::scaled(sched, operator_everywhere(a).relation());
    for (auto _ : state) {
        benchmark::DoNotOptimize(monotone_psd_limit(seq, Direction::Nondecreasing));
    }
}
BENCHMARK(bm_monotone_psd_limit)->Arg(3)->Arg(5)->Arg(8);

void bm_theorem_bridge(benchmark::State& state) {
    int dim = static_cast<int>(state.range(0));
    Rng rng(1300 + dim);
    DominatedPair pair = random_dominated_pair(dim, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(theorem_bridge_check(pair.a, pair.b));
    }
}
BENCHMARK(bm_theorem_bridge)->Arg(3)->Arg(5)->Arg(8);

void bm_pipeline(benchmark::State& state) {
    int dim = static_cast<int>(state.range(0));
    Rng rng(1700 + dim);
    LinearRelation base = structured_relation(dim, dim, dim - 1, 1, 1, 0.7, 2.0, rng);
    Schedule sched;
    sched.kind = Schedule::Kind::N;
    SequenceSpec seq = SequenceSpec::scaled(sched, base);
    for (auto _ : state) {
        benchmark::DoNotOptimize(relation_sequence_pipeline(seq));
    }
}
BENCHMARK(bm_pipeline)->Arg(3)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
