#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "quadric/quadrature.hpp"
#include "quadric/weights.hpp"

using namespace quadric;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto& r = gauss_legendre(32);
  double s = 0;
  for (double w : r.weights) s += w;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
  const double v = integrate([](double x) { return std::pow(x, 10); }, 0.0, 1.0, 1.0 / 8.0);
  CHECK(v == doctest::Approx(1.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("standard bump examples") {
  const auto w = standard_bump();
  CHECK(w(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(w(0.5) == doctest::Approx(std::exp(-4.0 / 3.0)).epsilon(1e-14));
  for (int j = 0; j <= w.j_max(); ++j) {
    CHECK(w.eval(1.0, j) == 0.0);
    CHECK(w.eval(-1.0, j) == 0.0);
    CHECK(w.eval(1.5, j) == 0.0);
  }
  CHECK_THROWS_AS(w.eval(0.0, 7), InvalidArgument);
  CHECK(bump_mass() == doctest::Approx(0.443993816168).epsilon(1e-10));
}

TEST_CASE("bump derivatives are finite-difference consistent") {
  // fourth-order central difference on step 1e-3, on the part of the grid where
  // the local length scale (1-x^2)^2 is at least ten steps
  const auto w = standard_bump();
  const double h = 1e-3;
  for (int j = 0; j < w.j_max(); ++j) {
    const double scale = 1 + derivative_norm(w, j + 1, kInfNorm);
    for (double x = -0.95; x <= 0.95; x += 0.01) {
      const double fd = (w.eval(x - 2 * h, j) - 8 * w.eval(x - h, j) + 8 * w.eval(x + h, j) - w.eval(x + 2 * h, j)) /
                        (12 * h);
      CHECK_MESSAGE(std::abs(fd - w.eval(x, j + 1)) < 1e-4 * scale, "j=" << j << " x=" << x);
    }
  }
}

TEST_CASE("rescaled weight chain rule and support") {
  const auto w = rescaled(standard_bump(), 0.2, 0.5);
  CHECK(w.a() == doctest::Approx(-0.3));
  CHECK(w.b() == doctest::Approx(0.7));
  CHECK(w(0.2) == doctest::Approx(std::exp(-1.0)));
  CHECK(w(0.8) == 0.0);
  CHECK(w.eval(0.4, 1) == doctest::Approx(standard_bump().eval(0.4, 1) / 0.5));
  CHECK_THROWS_AS(rescaled(standard_bump(), 0.8, 0.5), InvalidArgument);
}

TEST_CASE("sobolev norm examples") {
  CHECK(sobolev_norm(zero_weight(), 1.0, 3) == 0.0);
  CHECK(sobolev_norm(zero_weight(), kInfNorm, 2) == 0.0);
  CHECK(sobolev_norm(standard_bump(), kInfNorm, 0) == doctest::Approx(0.367879).epsilon(1e-5));
  const auto w2 = ProductWeight::uniform(standard_bump(), 2);
  CHECK(sobolev_norm(w2, kInfNorm, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-5));
  CHECK(sobolev_norm(standard_bump(), 1.0, 0) == doctest::Approx(bump_mass()).epsilon(1e-8));
  CHECK_THROWS_AS(sobolev_norm(standard_bump(), 1.0, 7), InvalidArgument);
  CHECK_THROWS_AS(sobolev_norm(sharp_box(), kInfNorm, 1), InvalidArgument);
}

TEST_CASE("L1 norm of the first derivative is twice the maximum") {
  // omega' changes sign once, so ||omega'||_1 = 2 omega(0)
  CHECK(derivative_norm(standard_bump(), 1, 1.0) == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("sobolev norm is nondecreasing in k and factorizes") {
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto w = ProductWeight::uniform(standard_bump(), n);
    for (double p : {1.0, kInfNorm}) {
      double prev = 0;
      for (int k = 0; k <= 4; ++k) {
        const double s = sobolev_norm(w, p, k);
        CHECK(s >= prev);
        prev = s;
      }
    }
  }
  // n = 2, k = 1: ||w||(1 + 2 ||w'||/||w||) in product form
  const auto b = standard_bump();
  const double n0 = derivative_norm(b, 0, kInfNorm), n1 = derivative_norm(b, 1, kInfNorm);
  CHECK(sobolev_norm(ProductWeight::uniform(b, 2), kInfNorm, 1) == doctest::Approx(n0 * n0 + 2 * n0 * n1));
}

TEST_CASE("split kernel support and reconstruction") {
  const auto w = standard_bump();
  for (double delta : {1.0, 0.5, 0.1}) {
    const auto K = heath_brown_kernel(w, delta);
    CHECK(K.omega_delta(1.0, 0.0) == 0.0);
    CHECK(K.omega_delta(-1.2, 0.3) == 0.0);
    CHECK(K.omega_delta(0.3, 1 + delta) == 0.0);
    CHECK(K.omega_delta(-0.3, -1 - delta) == 0.0);
    CHECK(K.reconstruct(0.0) == doctest::Approx(w(0)).epsilon(1e-9));
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const double x = -0.995 + 1.99 * i / 99.0;
      worst = std::max(worst, std::abs(K.reconstruct(x) - w(x)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("split kernel support on random points") {
  for (int i = 0; i < 2000; ++i) {
    const double delta = gen::real(0.01, 1.0);
    const auto K = heath_brown_kernel(standard_bump(), delta);
    const double x = gen::real(-3, 3), y = gen::real(-3, 3);
    if (std::abs(x) >= 1 || std::abs(y) >= 1 + delta) CHECK(K.omega_delta(x, y) == 0.0);
  }
}

TEST_CASE("split kernel derivative bound with delta-stable constant") {
  const auto w = standard_bump();
  for (int bx = 0; bx <= 2; ++bx) {
    for (int by = 0; by + bx <= 3; ++by) {
      const double S = sobolev_norm(w, kInfNorm, bx + by);
      double C0 = -1;
      for (double delta : {1.0, 0.5, 0.1, 0.01}) {
        const auto K = heath_brown_kernel(w, delta);
        const double C = K.derivative_constant(bx, by);
        CHECK(std::isfinite(C));
        if (C0 < 0) C0 = C;
        CHECK(C == doctest::Approx(C0));
        double mx = 0;
        for (double x = -0.99; x < 1; x += 0.03)
          for (double y = -1 - delta; y <= 1 + delta; y += 0.04 * (1 + delta))
            mx = std::max(mx, std::abs(K.omega_delta(x, y, bx, by)));
        CHECK(mx <= C * S);
      }
    }
  }
}

TEST_CASE("window function support and partition of unity") {
  const auto w = standard_bump();
  const double delta = 0.25;
  const auto K = heath_brown_kernel(w, delta);
  const std::vector<std::int64_t> y0{0, 1, -2};
  const std::vector<double> far{1.5, 0.0, 0.0}, near{0.2, -0.4, 1.1};
  CHECK(window_function(K, y0, far) == 0.0);
  CHECK(window_function(K, y0, near) != 0.0);
  const std::int64_t B = window_index_bound(delta);
  CHECK(B == 5);
  for (double x = -1.6; x <= 1.6; x += 0.1) {
    const std::vector<std::int64_t> big{B + 1};
    const std::vector<double> xs{x};
    CHECK(window_function(K, big, xs) == 0.0);
  }
  for (std::size_t n : {1u, 2u, 3u}) {
    const double P = 40;
    std::vector<double> x(n, 0.3 * P);
    CHECK(window_partition(K, x, P) == doctest::Approx(std::pow(w(0.3), n)).epsilon(1e-5));
  }
  for (int i = 0; i < 50; ++i) {
    const double P = gen::real(5, 100), t = gen::real(-1.2, 1.2);
    const std::vector<double> x{t * P};
    CHECK(std::abs(window_partition(K, x, P) - w(t)) < 1e-5);
  }
}

TEST_CASE("window derivatives are bounded by the weight norm") {
  const auto w = standard_bump();
  for (double delta : {0.5, 0.1}) {
    const auto K = heath_brown_kernel(w, delta);
    for (int j = 0; j <= 2; ++j) {
      const double S = sobolev_norm(w, kInfNorm, j);
      const double C = K.derivative_constant(j, 0);
      double mx = 0;
      for (std::int64_t y0 = -3; y0 <= 3; ++y0)
        for (double x = -1.5; x <= 1.5; x += 0.05) mx = std::max(mx, std::abs(K.window_1d(y0, x, j)));
      CHECK(mx <= C * S);
    }
  }
}

TEST_CASE("weights by name") {
  CHECK(weight_by_name("bump")(0) == doctest::Approx(std::exp(-1.0)));
  CHECK(weight_by_name("box")(0.99) == 1.0);
  CHECK(weight_by_name("plateau:0.1")(0.5) == 1.0);
  CHECK(weight_by_name("plateau:0.1")(0.99) < 1.0);
  CHECK_THROWS_AS(weight_by_name("nope"), InvalidArgument);
}
