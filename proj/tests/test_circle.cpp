#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "quadric/circle.hpp"

using namespace quadric;

namespace {

const Observable kZero("zero", [](const QuotientPoint&) { return 0.0; }, 0.0);

QuotientPoint generic_point(int k = 0) {
  const double a = 1.1 + 0.1 * k, c = 0.2 - 0.05 * k;
  return base_point(a, 0.3, c, (1.0 + 0.3 * c) / a);
}

Observable random_smooth() {
  const double w = gen::real(0.2, 0.45);
  const Complex c{gen::real(-0.5 + w, 0.5 - w), gen::real(1 + w, 2.5)};
  const auto b = disc_bump(c, w);
  const double off = gen::real(-0.5, 0.5);
  return Observable("rand", [b, off](const QuotientPoint& p) { return b(p) + off; }, 1.0 + std::abs(off));
}

}  // namespace

TEST_CASE("Farey cover examples") {
  const auto one = farey_cover(1);
  REQUIRE(one.arcs.size() == 1);
  CHECK(one.arcs[0].radius == 1.0);
  CHECK(one.covers());

  const auto three = farey_cover(3);
  REQUIRE(three.arcs.size() == 4);
  const std::vector<std::pair<int, int>> frac{{0, 1}, {1, 3}, {1, 2}, {2, 3}};
  const std::vector<double> radius{1.0 / 3, 1.0 / 9, 1.0 / 6, 1.0 / 9};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(three.arcs[i].a == frac[i].first);
    CHECK(three.arcs[i].q == frac[i].second);
    CHECK(three.arcs[i].radius == doctest::Approx(radius[i]));
  }
  CHECK(three.scanned);
  CHECK(three.covers());
  CHECK(farey_cover(5).arcs.size() == 10);
  CHECK_THROWS_AS(farey_cover(0), InvalidArgument);
  CHECK_THROWS_AS(farey_cover(1'000'001), InvalidArgument);
  CHECK_THROWS_AS(farey_cover(1'000'000), BudgetExceeded);
}

TEST_CASE("Farey cover: counts, reduced fractions, cover") {
  for (std::int64_t Q = 1; Q <= 60; ++Q) {
    const auto c = farey_cover(Q);
    std::int64_t tot = 0;
    for (std::int64_t q = 1; q <= Q; ++q) tot += euler_phi(q);
    CHECK(static_cast<std::int64_t>(c.arcs.size()) == tot);
    for (std::size_t i = 0; i < c.arcs.size(); ++i) {
      CHECK(gcd64(c.arcs[i].a, c.arcs[i].q) == 1);
      CHECK(c.arcs[i].a < c.arcs[i].q);
      if (i) CHECK(c.arcs[i - 1].center < c.arcs[i].center);
    }
    CHECK(c.covers());
    CHECK(c.scan_passed);
  }
}

TEST_CASE("locate examples") {
  auto l = locate(0.40, 3);
  CHECK(l.a == 1);
  CHECK(l.q == 2);
  l = locate(1.0 / 3.0, 3);
  CHECK(l.a == 1);
  CHECK(l.q == 3);
  CHECK(l.dist == 0.0);
  l = locate(0.001, 10);
  CHECK(l.a == 0);
  CHECK(l.q == 1);
  CHECK(locate(0.999, 10).q == 1);
  CHECK_THROWS_AS(locate(1.0, 3), InvalidArgument);
}

TEST_CASE("locate agrees with an exhaustive arc scan") {
  for (std::int64_t Q : {1, 2, 7, 13, 50}) {
    const auto cover = farey_cover(Q);
    for (int i = 0; i < 2000; ++i) {
      const double alpha = gen::real(0, 1);
      const auto l = locate(alpha, Q);
      std::int64_t best_q = Q + 1, best_a = -1;
      for (const auto& arc : cover.arcs)
        if (dist_to_int(alpha - arc.center) < arc.radius && (arc.q < best_q || (arc.q == best_q && arc.a < best_a))) {
          best_q = arc.q;
          best_a = arc.a;
        }
      CHECK(l.q == best_q);
      CHECK(l.a == best_a);
    }
  }
}

TEST_CASE("region examples") {
  const double P = 100, e = kDefaultEps0;
  CHECK(major_threshold(1, P, e) == doctest::Approx(1.0194e-4).epsilon(1e-4));
  CHECK(region_of(1e-5, 3, P, e) == Region::m1);
  CHECK(region_of(0.5, 3, P, e) == Region::m1);
  CHECK(region_of(1.0 / 3.0, 3, P, e) == Region::m1);
  CHECK(region_of(0.4, 3, P, e) == Region::m2);
  CHECK(default_Q(100) == 2);
  CHECK(default_Q(1) == 1);
  CHECK(default_Q(std::pow(2.0, 20)) == 2);
}

TEST_CASE("meas(m1) union against the closed form") {
  const auto m = meas_m1(3, 100, kDefaultEps0);
  const double t = std::pow(100.0, -2.0 + kDefaultEps0);
  CHECK(m.closed_form == doctest::Approx(2 * (1 + 1.0 / 4 + 2.0 / 9) * t).epsilon(1e-12));
  CHECK(m.closed_form < 3.01e-4);
  CHECK(std::abs(m.union_measure - m.closed_form) < 1e-10);
  for (std::int64_t Q = 1; Q <= 50; ++Q) {
    const auto r = meas_m1(Q, 1000, kDefaultEps0);
    CHECK(std::abs(r.union_measure - r.closed_form) < 1e-10);
  }
  // tiny P: intervals overlap, union is strictly smaller
  const auto big = meas_m1(5, 1.5, kDefaultEps0);
  CHECK(big.union_measure < big.closed_form);
  CHECK(big.union_measure <= 1.0);
}

TEST_CASE("delta identity examples") {
  const QuadraticForm F(2, {1, 0, 0, -1});
  const auto r = delta_identity_check(BoxSum::uniform(F, sharp_box(), constant_observable(1), generic_point(), 2));
  CHECK(r.direct == 5.0);
  CHECK(r.via_integral == 5.0);
  CHECK(r.zeros == 5);
  const auto z = delta_identity_check(BoxSum::uniform(F, standard_bump(), kZero, generic_point(), 5));
  CHECK(z.direct == 0.0);
  CHECK(z.via_integral == 0.0);
}

TEST_CASE("delta identity on random instances") {
  const auto F3 = QuadraticForm::diagonal({1, 1, -1});
  const auto r = delta_identity_check(BoxSum::uniform(F3, standard_bump(), random_smooth(), generic_point(1), 8));
  CHECK(std::abs(r.direct - r.via_integral) <= 1e-12 * std::abs(r.direct));
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = static_cast<std::size_t>(gen::integer(1, 3));
    QuadraticForm F(1, {1});
    try {
      F = QuadraticForm(n, gen::symmetric(n, -3, 3));
    } catch (const InvalidArgument&) {
      continue;
    }
    const double P = gen::real(2, n == 3 ? 14 : 32);
    const auto d = delta_identity_check(BoxSum::uniform(F, standard_bump(), random_smooth(), generic_point(i % 3), P));
    CHECK(std::abs(d.direct - d.via_integral) <= 1e-12 * std::max(1.0, std::abs(d.direct)));
  }
}

TEST_CASE("van der Corput differencing") {
  const QuadraticForm x2(1, {1});
  const BoxSum s1 = BoxSum::uniform(x2, standard_bump(), random_smooth(), generic_point(), 8);
  const auto id = vdc_difference(s1, 0.3, 1);
  CHECK(id.rearrangement_error < 1e-14);
  CHECK(id.holds);
  for (double alpha : {0.0, 0.17, 0.5, gen::real(0, 1)}) {
    const auto r = vdc_difference(s1, alpha, 2);
    CHECK(r.rearrangement_error < 1e-12);
    CHECK(r.holds);
  }
  for (int i = 0; i < 12; ++i) {
    const std::size_t n = static_cast<std::size_t>(gen::integer(1, 2));
    QuadraticForm F(1, {1});
    try {
      F = QuadraticForm(n, gen::symmetric(n, -4, 4));
    } catch (const InvalidArgument&) {
      continue;
    }
    const double P = gen::real(4, 16);
    const auto H = gen::integer(1, static_cast<std::int64_t>(P / 2));
    const BoxSum s = BoxSum::uniform(F, standard_bump(), random_smooth(), generic_point(i % 3), P);
    const auto r = vdc_difference(s, gen::real(0, 1), H);
    CHECK(r.rearrangement_error < 1e-12);
    CHECK(r.holds);
    CHECK(r.cs_lhs <= r.cs_rhs * (1 + 1e-12) + 1e-12);
    for (const auto& t : r.terms) CHECK(std::abs(std::abs(t.correlation) - std::abs(t.differenced)) < 1e-9 * (1 + std::abs(t.correlation)));
  }
  CHECK_THROWS_AS(vdc_difference(s1, 0.1, 5), InvalidArgument);
  CHECK_THROWS_AS(vdc_difference(s1, 0.1, 0), InvalidArgument);
}

TEST_CASE("lattice sum") {
  const QuadraticForm I1(1, {1});
  const auto hand = lattice_sum_check(I1, 10, 10, 0.5, 0.5, 0);
  CHECK(hand.lhs == doctest::Approx(6 + 5 / std::sqrt(6.0)).epsilon(1e-12));
  CHECK(std::abs(hand.lhs - 8.0412) < 1e-3);
  const QuadraticForm I2(2, {1, 0, 0, 1});
  const auto h0 = lattice_sum_check(I2, 7, 0, 0.3, 0.4, 0.2);
  CHECK(h0.lhs == doctest::Approx(64 * 1.2 * 1.2));
  CHECK(h0.ratio == 0.0);
  const auto dom = lattice_sum_check(I2, 9, 5, 0.3, 0.4, 1e9);
  CHECK(dom.ratio == doctest::Approx(std::pow(10.0 / 9.0, 2)).epsilon(1e-6));
  CHECK_THROWS_AS(lattice_sum_check(I1, 10, 11, 0.5, 0.5, 0), InvalidArgument);
  CHECK_THROWS_AS(lattice_sum_check(I1, 10, 1, 0, 0.5, 0), InvalidArgument);
  CHECK_THROWS_AS(lattice_sum_check(I1, 10, 1, 0.5, 1, 0), InvalidArgument);
}

TEST_CASE("arc integral") {
  const QuadraticForm F(2, {1, 0, 0, -1});
  const auto zero = arc_integral(BoxSum::uniform(F, standard_bump(), kZero, generic_point(), 6), 2, kDefaultEps0, 0.01);
  CHECK(zero.m1_mass == 0.0);
  CHECK(zero.m2_mass == 0.0);
  const BoxSum s = BoxSum::uniform(F, standard_bump(), random_smooth(), generic_point(), 8);
  const auto r = arc_integral(s, 3, kDefaultEps0, 0.01);
  CHECK(r.meas_m1 <= r.meas_bound * (1 + 1e-9));
  CHECK(r.meas_m1 > 0);
  CHECK(std::abs(r.integral - r.exact) < 1e-10 * (1 + std::abs(r.exact)));
  CHECK(r.m1_mass + r.m2_mass >= std::abs(r.exact) - 1e-10);
  const auto d = delta_identity_check(s);
  CHECK(r.exact.real() == doctest::Approx(d.direct).epsilon(1e-12));
  CHECK_THROWS_AS(arc_integral(s, 3, kDefaultEps0, 0.01, 10), BudgetExceeded);
}
