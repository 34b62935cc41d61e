#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "qwalk/continuum.hpp"
#include "qwalk/dqw.hpp"
#include "qwalk/expr.hpp"
#include "qwalk/symmetry.hpp"

using namespace qwalk;

namespace {

WalkJet make_jet(const char* th, const char* xi, const char* ze) {
  WalkJet j;
  j.theta_bar = Expr::parse(th);
  j.xi_bar = Expr::parse(xi);
  j.zeta = Expr::parse(ze);
  return j;
}

void BM_ExprEval(benchmark::State& state) {
  const Expr e = Expr::parse("1 + 0.1*sin(t - x) * exp(-x^2) + cos(2*pi*x)");
  double x = 0.0, acc = 0.0;
  for (auto _ : state) {
    acc += e.eval(0.3, x);
    x += 1e-3;
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExprEval);

void BM_ExprParse(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(Expr::parse("0.5*cos(t) + 0.3*sin(x) - 2^3^2/(1 + abs(x))"));
  }
}
BENCHMARK(BM_ExprParse);

// One walk step per iteration; range(0) sites, range(1) != 0 for a
// time-dependent coin (row recomputed every step).
void BM_WalkStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const WalkJet jet = state.range(1) ? make_jet("1 + 0.1*sin(t - x)", "0.5", "0")
                                     : make_jet("1 + 0.1*sin(x)", "0.5", "0");
  auto [walk, grid] = instantiate_walk(jet, 0.01, n, 0.0, 0.0, 1u << 30);
  SpinorField f(n, 0.0);
  f.minus[n / 2] = 1.0;
  WalkStepper stepper(walk, grid, f);
  for (auto _ : state) stepper.step();
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_WalkStep)->Args({1024, 0})->Args({1024, 1})->Args({8192, 0})->Args({8192, 1});

// Integration to t = 0.1 per iteration.
void BM_ContinuumRK4(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const WalkJet jet = state.range(1) ? make_jet("1 + 0.1*sin(t - x)", "0.5", "0")
                                     : make_jet("1", "0.5", "0.3");
  const double dx = 2 * std::numbers::pi / static_cast<double>(n);
  const ContinuumGrid g = make_continuum_grid(n, dx, 0.0, 0.0, 1.0, 0.5);
  SpinorField f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) f.minus[i] = std::exp(std::sin(g.x(i)));
  std::size_t steps = 0;
  for (auto _ : state) {
    const ContinuumRun r = integrate_dirac(f, jet, g, 0.1);
    steps += r.steps;
  }
  state.counters["steps"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ContinuumRK4)->Args({512, 0})->Args({512, 1})->Args({2048, 0})->Unit(benchmark::kMillisecond);

void BM_ApplyDB(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const WalkJet jet = make_jet("1.2", "0.5*cos(t) + 0.3*sin(x)", "sin(t) + sin(x - t)");
  const GaugeConnection b = connection_from_jet(jet);
  const double dx = 2 * std::numbers::pi / static_cast<double>(n);
  const ContinuumGrid g = make_continuum_grid(n, dx, 0.0, 0.0, 1.0, 0.5);
  const Window w = sample_window(
      [](double t, double x) { return std::pair<cplx, cplx>{std::cos(x - t), std::sin(x + t)}; },
      0.5, dx, g);
  for (auto _ : state) benchmark::DoNotOptimize(apply_DB(b, w, NullCoords{1, 1}, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ApplyDB)->Arg(1024)->Arg(4096);

}  // namespace
BENCHMARK_MAIN();
