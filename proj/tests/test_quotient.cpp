#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "quadric/quadrature.hpp"
#include "quadric/quotient.hpp"

using namespace quadric;

namespace {

QuotientPoint random_point() {
  Mat2 g{gen::real(-2, 2), gen::real(-2, 2), gen::real(-2, 2), gen::real(-2, 2)};
  if (g.det() < 0) g.a = -g.a, g.b = -g.b;
  if (std::abs(g.det()) < 0.05) g.a += 1.0, g.d += 1.0;
  if (g.det() <= 0) return base_point(1.3, 0.4, -0.2, 0.7);
  return make_point(g);
}

// (3/pi) int over the disc |z - c| < w of phi(|z - c|/w) dx dy / y^2, in polar coordinates.
double disc_bump_mean_oracle(Complex c, double w) {
  const auto phi = standard_bump(0);
  const double y0 = c.imag();
  const double inner = integrate(
      [&](double rho) {
        return phi(rho / w) * rho *
               integrate([&](double th) { return 1.0 / std::pow(y0 + rho * std::sin(th), 2); }, 0.0,
                         2 * std::numbers::pi, 0.25);
      },
      0.0, w, w / 16);
  return 3.0 / std::numbers::pi * inner;
}

}  // namespace

TEST_CASE("reduce examples") {
  auto r = reduce({0.3, 2.0});
  CHECK(r.z == Complex(0.3, 2.0));
  CHECK(r.word_length == 0);
  r = reduce({2.3, 0.5});
  CHECK(r.z.real() == doctest::Approx(0.11765).epsilon(1e-4));
  CHECK(r.z.imag() == doctest::Approx(1.47059).epsilon(1e-5));
  CHECK(r.word_length == 3);
  r = reduce({5.0, 1.0});
  CHECK(std::abs(r.z - Complex(0, 1)) < 1e-15);
  CHECK(reduce({0.5, 1.0}).z == Complex(0.5, 1.0));
  CHECK_THROWS_AS(reduce({0.3, -1.0}), ConvergenceError);
  CHECK_THROWS_AS(reduce({0.3, 0.0}), ConvergenceError);
}

TEST_CASE("reduce lands in the fundamental domain, gamma maps the input, and is idempotent") {
  for (int i = 0; i < 2000; ++i) {
    const Complex z{gen::real(-50, 50), std::exp(gen::real(-8, 4))};
    const auto r = reduce(z);
    CHECK(std::abs(r.z.real()) <= 0.5 + 1e-10);
    CHECK(std::abs(r.z) >= 1 - 1e-10);
    CHECK(r.gamma.det() == doctest::Approx(1.0));
    CHECK(std::abs(r.gamma.act(z) - r.z) < 1e-8 * std::abs(r.z));
    const auto again = reduce(r.z);
    CHECK(again.z == r.z);
    CHECK(again.word_length == 0);
  }
}

TEST_CASE("horocycle examples") {
  const auto p = base_point(1, 0, 0, 1);
  CHECK(horocycle(p, 0).reduced_z == p.reduced_z);
  CHECK(std::abs(horocycle(p, 1).reduced_z - Complex(0, 1)) < 1e-15);
  CHECK(std::abs(horocycle(p, 0.5).reduced_z - Complex(0.5, 1)) < 1e-15);
  CHECK_THROWS_AS(horocycle(p, 2e9), InvalidArgument);
  CHECK_THROWS_AS(base_point(1, 0, 0, -1), InvalidArgument);
}

TEST_CASE("horocycle flow is additive and keeps det 1") {
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_point();
    const double s = gen::real(-1000, 1000), t = gen::real(-1000, 1000);
    const auto a = horocycle(horocycle(p, s), t);
    const auto b = horocycle(p, s + t);
    worst = std::max(worst, quotient_distance(a, b));
    CHECK(std::abs(a.g.det() - 1) < 1e-12);
    CHECK(std::abs(a.g.act({0, 1}) - a.reduced_z) < 1e-9 * std::abs(a.reduced_z));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("exp of sl2 elements") {
  const auto e = exp_sl2(kLieX, 2.5);
  CHECK(e.a == 1.0);
  CHECK(e.b == doctest::Approx(2.5));
  const auto y = exp_sl2(kLieY, 2.0);
  CHECK(y.a == doctest::Approx(std::exp(1.0)));
  CHECK(y.d == doctest::Approx(std::exp(-1.0)));
  const Sl2 k{0, -1, 1};  // rotation generator
  const auto r = exp_sl2(k, std::numbers::pi / 2);
  CHECK(r.a == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.c == doctest::Approx(1.0));
  for (int i = 0; i < 200; ++i) {
    const Sl2 A{gen::real(-2, 2), gen::real(-2, 2), gen::real(-2, 2)};
    CHECK(exp_sl2(A, 0.7).det() == doctest::Approx(1.0).epsilon(1e-12));
    // exp((s+t)A) = exp(sA) exp(tA)
    const auto lhs = exp_sl2(A, 0.3 + 0.4);
    const auto rhs = exp_sl2(A, 0.3) * exp_sl2(A, 0.4);
    CHECK(lhs.b == doctest::Approx(rhs.b).epsilon(1e-12));
  }
}

TEST_CASE("disc bump validation") {
  CHECK_NOTHROW(disc_bump({0, 2}, 0.5));
  CHECK_THROWS_AS(disc_bump({0.3, 2}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(disc_bump({0, 1.2}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(disc_bump({0, 2}, 0.3, 1), InvalidArgument);
}

TEST_CASE("zero-average projection") {
  const auto one = zero_average_projection(constant_observable(1.0), 10'000);
  CHECK(one.is_zero_average());
  for (const auto& p : sample_points(50)) CHECK(std::abs(one(p)) < 1e-12);

  const auto f = disc_bump({0, 2}, 0.5);
  const double m = disc_bump_mean_oracle({0, 2}, 0.5);
  REQUIRE(f.mean());
  CHECK(*f.mean() == doctest::Approx(m).epsilon(1e-10));
  const auto est = estimate_mean(f, 20'000);
  CHECK(std::abs(est.mean - m) < 1e-3 * std::max(1.0, m));
  const auto g = zero_average_projection(f, 20'000);
  CHECK(g.is_zero_average());
  CHECK(std::abs(estimate_mean(g, 20'000).mean) < 1e-3);
  CHECK(std::abs(estimate_mean(g, 40'000).mean) < 1e-3);
  // projecting again barely changes anything
  const auto h = zero_average_projection(g, 20'000);
  double change = 0;
  for (const auto& p : sample_points(500, 777)) change = std::max(change, std::abs(h(p) - g(p)));
  CHECK(change < 1e-3);

  CHECK_THROWS_AS(zero_average_projection(f, 5000), InvalidArgument);
  const Observable height("height", [](const QuotientPoint& p) { return p.reduced_z.imag(); }, 1e300);
  CHECK_THROWS_AS(zero_average_projection(height, 20'000), ConvergenceError);
}

TEST_CASE("frame harmonic has zero mean") {
  const auto f = disc_bump({0, 2}, 0.5, 2);
  CHECK(std::abs(estimate_mean(f, 40'000).mean) < 1e-3);
}

TEST_CASE("lie derivatives") {
  const auto c = constant_observable(3.0);
  const auto f = disc_bump({0, 2}, 0.5, 2);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_point();
    for (auto d : {LieDirection::X, LieDirection::Y, LieDirection::Z}) CHECK(lie_derivative(c, d, p) == 0.0);
    // X agrees with the derivative of the horocycle pullback
    const double h = 1e-5;
    const double fwd = (f(horocycle(p, h)) - f(p)) / h;
    const double bwd = (f(p) - f(horocycle(p, -h))) / h;
    const double x = lie_derivative(f, LieDirection::X, p);
    CHECK(std::abs(x - fwd) < 1e-3 * (1 + std::abs(x)));
    CHECK(std::abs(x - bwd) < 1e-3 * (1 + std::abs(x)));
  }
}

TEST_CASE("conjugation identity Y(u(t) f) = u(t)((Y + tX) f)") {
  const auto f = disc_bump({0.1, 1.7}, 0.35, 2);
  int nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    const double t = gen::real(-4, 4);
    // bias points towards the support so the check is not vacuous
    const auto p = horocycle(make_point(Mat2{std::sqrt(1.7), 0.1 / std::sqrt(1.7), 0, 1 / std::sqrt(1.7)} *
                                        exp_sl2({0, -1, 1}, gen::real(0, 3.14)) * exp_sl2(kLieY, gen::real(-0.3, 0.3))),
                             -t + gen::real(-0.2, 0.2));
    const double lhs = lie_derivative(pushforward(f, t), kLieY, p);
    const auto pt = horocycle(p, t);
    const double rhs = lie_derivative(f, kLieY + t * kLieX, pt);
    const double split = lie_derivative(f, kLieY, pt) + t * lie_derivative(f, kLieX, pt);
    CHECK(std::abs(lhs - rhs) < 1e-4 * (1 + t * t));
    CHECK(std::abs(lhs - split) < 1e-4 * (1 + t * t));
    nonzero += std::abs(lhs) > 1e-3;
  }
  CHECK(nonzero > 20);
}

TEST_CASE("twisted averages") {
  const auto p = base_point(1.1, 0.3, 0.2, 0.963636);
  const auto w = standard_bump();
  CHECK(std::abs(twisted_average(Observable("zero", [](const QuotientPoint&) { return 0.0; }, 0), p, w, 10, 0.3)) == 0.0);
  for (double P : {1.0, 5.0, 20.0}) {
    const auto v = twisted_average(constant_observable(1), p, w, P, 0);
    CHECK(v.real() == doctest::Approx(P * 0.443994).epsilon(1e-6));
    CHECK(v.imag() == 0.0);
  }
  TwistedAverageOptions tight;
  tight.max_evaluations = 100;
  CHECK_THROWS_AS(twisted_average(constant_observable(1), p, w, 1000, 50, tight), BudgetExceeded);
}

TEST_CASE("twisted average of a zero-average observable decays") {
  const auto f = zero_average_projection(disc_bump({0, 2}, 0.5), 20'000);
  const auto w = standard_bump();
  double small = 0, large = 0;
  for (int seed = 0; seed < 3; ++seed) {
    const auto p = base_point(1.0 + 0.13 * seed, 0.37 + 0.21 * seed, 0.29 - 0.07 * seed, 1.0);
    small += std::abs(twisted_average(f, p, w, 50, 0)) / 50;
    large += std::abs(twisted_average(f, p, w, 200, 0)) / 200;
  }
  CHECK(large < small);
}

TEST_CASE("orbit tables do not depend on threads") {
  const auto f = disc_bump({0, 2}, 0.5);
  const auto p = base_point(1.2, 0.7, -0.3, 0.658333);
  CHECK(orbit_table(f, p, 300, true) == orbit_table(f, p, 300, false));
  const auto tab = orbit_table(f, p, 5);
  CHECK(tab[5] == f(p));
  CHECK(tab[7] == f(horocycle(p, 2)));
}

TEST_CASE("growth of Y(u(t) f) is at most quadratic") {
  const auto f = disc_bump({0, 2}, 0.5);
  const std::vector<double> ts{0, 1, 2, 4, 8, 16, 32};
  const auto g = growth_profile(f, ts, 800);
  CHECK(g.slope <= 2.2);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::isfinite(g.sup[i]));
}
