#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pbgfm/driver.hpp"
#include "pbgfm/gfm.hpp"
#include "pbgfm/stepping.hpp"

using namespace pbgfm;

namespace {

void BM_Step(benchmark::State& state, Scheme scheme) {
  const int side = static_cast<int>(state.range(0));
  auto p = kirkwood_problem(16.0 / (side - 1), 1.0);
  Field u = initial_condition(InitialKind::Zero, *p);
  SplitStepper stepper(p->op(), p->kappa_sq(), scheme);
  for (auto _ : state) stepper.step(u, 0.01);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p->grid().size()));
}

void BM_StepADI(benchmark::State& s) { BM_Step(s, Scheme::ADI); }
void BM_StepLOD(benchmark::State& s) { BM_Step(s, Scheme::LOD); }

// Batched Thomas sweep over `batch` independent lines of length len.
void BM_ThomasBatch(benchmark::State& state) {
  const std::size_t len = static_cast<std::size_t>(state.range(0)), batch = 64;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> w(len * batch), x(len * batch), x0(len * batch), cp(len * batch);
  for (auto& v : w) v = u(rng);
  for (auto& v : x0) v = u(rng);
  for (auto _ : state) {
    x = x0;
    solve_shifted_lines(w.data(), x.data(), cp.data(), batch, len, batch, 0.01);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len * batch));
}

void BM_NonlinearSubstep(benchmark::State& state) {
  double w = 2.5, acc = 0.0;
  for (auto _ : state) {
    acc += nonlinear_substep(w, 1.27, 0.01, 1.0);
    w = -w;
    benchmark::DoNotOptimize(acc);
  }
}

}  // namespace

BENCHMARK(BM_StepADI)->Arg(33)->Arg(49)->Arg(65)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StepLOD)->Arg(33)->Arg(49)->Arg(65)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThomasBatch)->Arg(33)->Arg(129);
BENCHMARK(BM_NonlinearSubstep);
BENCHMARK_MAIN();
