// Serial references against the OpenMP kernels.
#include <benchmark/benchmark.h>

#include "quadric/circle.hpp"
#include "quadric/enumerate.hpp"
#include "quadric/expsums.hpp"

using namespace quadric;

namespace {

const QuotientPoint& x0() {
  static const auto p = base_point(1.1, 0.3, 0.2, (1 + 0.3 * 0.2) / 1.1);
  return p;
}

BoxSum box(double P, bool parallel) {
  SumOptions opt;
  opt.parallel = parallel;
  // constant observable: no zero coefficients for evaluate() to skip
  return BoxSum::uniform(QuadraticForm::diagonal({1, 2, -3}), standard_bump(), constant_observable(1), x0(), P, opt);
}

void BM_expsum_serial(benchmark::State& st) {
  const auto s = box(static_cast<double>(st.range(0)), false);
  for (auto _ : st) benchmark::DoNotOptimize(s.evaluate_serial(0.1234567));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * s.terms()));
}

void BM_expsum_parallel(benchmark::State& st) {
  const auto s = box(static_cast<double>(st.range(0)), true);
  for (auto _ : st) benchmark::DoNotOptimize(s.evaluate(0.1234567));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * s.terms()));
}

void BM_expsum_rational(benchmark::State& st) {
  const auto s = box(static_cast<double>(st.range(0)), true);
  for (auto _ : st) benchmark::DoNotOptimize(s.evaluate_rational(7, 31));
}

void BM_orbit_table(benchmark::State& st) {
  const auto f = disc_bump({0, 2}, 0.5);
  const bool parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(orbit_table(f, x0(), st.range(0), parallel));
}

void BM_enumerate(benchmark::State& st) {
  const auto F = QuadraticForm::diagonal({1, 1, 1, 1, -1});
  EnumerationOptions opt;
  opt.parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_zeros(F, static_cast<double>(st.range(0)), opt).count());
}

void BM_enumerate_naive(benchmark::State& st) {
  const auto F = QuadraticForm::diagonal({1, 1, -1});
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_zeros_naive(F, static_cast<double>(st.range(0))).count());
}

void BM_gauss_sum(benchmark::State& st) {
  const auto F = QuadraticForm(3, {2, 1, 0, 1, 2, 1, 0, 1, -3});
  const std::vector<std::int64_t> v{1, 2, 3}, shift{0, 0, 0};
  for (auto _ : st) benchmark::DoNotOptimize(gauss_sum(F, st.range(0), 1, v, shift));
}

void BM_farey_cover(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(farey_cover(st.range(0)).arcs.size());
}

}  // namespace

BENCHMARK(BM_expsum_serial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_expsum_parallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_expsum_rational)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_orbit_table)->Args({60, 0})->Args({60, 1})->Args({1000, 0})->Args({1000, 1});
BENCHMARK(BM_enumerate)->Args({30, 0})->Args({30, 1})->Args({60, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_enumerate_naive)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gauss_sum)->Arg(31)->Arg(101);
BENCHMARK(BM_farey_cover)->Arg(50)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
