#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gen.hpp"
#include "quadric/enumerate.hpp"

using namespace quadric;

namespace {

std::vector<std::vector<std::int64_t>> as_list(const QuadricPointSet& s) {
  std::vector<std::vector<std::int64_t>> out;
  for (std::size_t i = 0; i < s.count(); ++i) out.emplace_back(s.point(i).begin(), s.point(i).end());
  return out;
}

std::vector<QuadraticForm> corpus() {
  return {
      QuadraticForm::diagonal({1, -1}),
      QuadraticForm::diagonal({1, 1, -1}),
      QuadraticForm::diagonal({1, 2, -3}),
      QuadraticForm(3, {0, 1, 0, 1, 0, 0, 0, 0, -1}),   // 2xy - z^2
      QuadraticForm(3, {1, 0, 0, 0, 0, 1, 0, 1, 0}),    // trailing block [[0,1],[1,0]]
      QuadraticForm(3, {1, 1, 0, 1, -2, 1, 0, 1, 3}),   // coupled tail
      QuadraticForm(4, {2, 1, 0, 0, 1, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -3}),
      QuadraticForm::diagonal({1, 1, -1, -1}),
      QuadraticForm::diagonal({1, 1, 1, 1, -1}),
      QuadraticForm::diagonal({1, -1, 2, -2, 3}),
      QuadraticForm(5, {1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1, -1, 1, 0, 0, 0, 1, -2}),
  };
}

}  // namespace

TEST_CASE("enumerate examples") {
  CHECK(enumerate_zeros(QuadraticForm::diagonal({1, 1, -1}), 6).count() == 57);
  const auto s = enumerate_zeros(QuadraticForm::diagonal({1, -1}), 2);
  CHECK(s.count() == 5);
  const std::set<std::vector<std::int64_t>> want{{0, 0}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  const auto got = as_list(s);
  CHECK(std::set<std::vector<std::int64_t>>(got.begin(), got.end()) == want);
  for (const auto& F : corpus()) CHECK(enumerate_zeros(F, 1).count() == 1);
}

TEST_CASE("enumerate agrees with the naive scan on the corpus, P <= 12") {
  for (const auto& F : corpus()) {
    const double pmax = F.dim() >= 5 ? 8 : 12;
    for (double P = 1; P <= pmax; P += F.dim() >= 4 ? 2.5 : 1.5) {
      const auto fast = enumerate_zeros(F, P);
      const auto ref = enumerate_zeros_naive(F, P);
      CHECK_MESSAGE(fast.coords == ref.coords, F.describe() << " P=" << P);
    }
  }
}

TEST_CASE("serial and parallel enumeration give identical lists") {
  for (const auto& F : corpus()) {
    EnumerationOptions serial;
    serial.parallel = false;
    CHECK(enumerate_zeros(F, 7.5).coords == enumerate_zeros(F, 7.5, serial).coords);
  }
}

TEST_CASE("enumeration on random forms matches the naive scan") {
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = static_cast<std::size_t>(gen::integer(2, 4));
    std::vector<std::int64_t> m;
    while (true) {
      m = gen::symmetric(n, -4, 4);
      try {
        QuadraticForm F(n, m);
        break;
      } catch (const InvalidArgument&) {
      }
    }
    const QuadraticForm F(n, m);
    const double P = gen::real(1, 9);
    CHECK(enumerate_zeros(F, P).coords == enumerate_zeros_naive(F, P).coords);
  }
}

TEST_CASE("point set invariants") {
  for (const auto& F : corpus()) {
    const auto s = enumerate_zeros(F, 7);
    const auto pts = as_list(s);
    const std::set<std::vector<std::int64_t>> all(pts.begin(), pts.end());
    CHECK(all.size() == pts.size());
    for (const auto& x : pts) {
      CHECK(F.evaluate(x) == 0);
      CHECK(sup_norm(x) < 7);
      auto neg = x;
      for (auto& v : neg) v = -v;
      CHECK(all.count(neg) == 1);
    }
    CHECK(s.count() % 2 == 1);
  }
}

TEST_CASE("N_F is monotone in P") {
  const auto F = QuadraticForm::diagonal({1, 1, -1, -2});
  const auto s = enumerate_zeros(F, 20);
  std::vector<double> radii;
  for (double P = 1; P <= 20; P += 0.5) radii.push_back(P);
  const auto counts = counts_below(s, radii);
  for (std::size_t i = 0; i + 1 < counts.size(); ++i) CHECK(counts[i] <= counts[i + 1]);
  CHECK(counts.back() == static_cast<std::int64_t>(s.count()));
  for (std::size_t i = 0; i < radii.size(); i += 7)
    CHECK(counts[i] == static_cast<std::int64_t>(enumerate_zeros(F, radii[i]).count()));
}

TEST_CASE("work budget refusal carries the required budget") {
  EnumerationOptions opt;
  opt.work_budget = 1e3;
  try {
    enumerate_zeros(QuadraticForm::diagonal({1, 1, 1, 1, -1}), 100, opt);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.required_work > e.budget_work);
    CHECK(std::string(e.what()).find("requires") != std::string::npos);
  }
}

TEST_CASE("counting fit") {
  const std::vector<double> P{10, 20, 30, 40, 60};
  const auto fit = counting_fit(QuadraticForm::diagonal({1, 1, 1, 1, -1}), P);
  CHECK(fit.exponent_hat >= 2.75);
  CHECK(fit.exponent_hat <= 3.25);
  CHECK(fit.warning.empty());
  for (double r : fit.residuals) CHECK(std::isfinite(r));

  CHECK_THROWS_WITH(counting_fit(QuadraticForm::diagonal({1, 1, 1}), P), doctest::Contains("obstructed-or-too-small"));
  const std::vector<double> three{10, 20, 30};
  CHECK_THROWS_AS(counting_fit(QuadraticForm::diagonal({1, 1, 1, 1, -1}), three), InvalidArgument);

  const auto small = counting_fit(QuadraticForm::diagonal({1, 1, -1}), P);
  CHECK(small.warning == "n<5");

  std::vector<std::int64_t> cubes;
  for (double p : P) cubes.push_back(static_cast<std::int64_t>(p * p * p));
  const auto exact = fit_power_law(P, cubes);
  CHECK(exact.exponent_hat == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(exact.C_hat == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("shell counts") {
  const auto F3 = QuadraticForm::diagonal({1, 1, -1});
  CHECK(shell_count(F3, 6, 0.999) == 56);
  CHECK(shell_count(F3, 6, 0) == 0);
  CHECK(shell_count(QuadraticForm::diagonal({1, -1}), 2, 0.5) == 4);
}

TEST_CASE("shell is the exact set difference") {
  const auto F = QuadraticForm::diagonal({1, 2, -1, -1});
  const double P = 11;
  for (double delta : {0.1, 0.25, 0.5, 0.9}) {
    const auto outer = as_list(enumerate_zeros(F, P));
    const auto inner = as_list(enumerate_zeros(F, (1 - delta) * P));
    std::set<std::vector<std::int64_t>> diff(outer.begin(), outer.end());
    for (const auto& x : inner) diff.erase(x);
    const auto shell = as_list(shell_points(enumerate_zeros(F, P), delta));
    CHECK(std::set<std::vector<std::int64_t>>(shell.begin(), shell.end()) == diff);
    CHECK(shell_count(F, P, delta) == static_cast<std::int64_t>(diff.size()));
  }
}
