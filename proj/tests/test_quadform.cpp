#include <doctest.h>

#include <sstream>

#include "gen.hpp"
#include "quadric/quadform.hpp"

using namespace quadric;

namespace {

IntMatrix mat(std::size_t n, std::initializer_list<long> v) {
  IntMatrix m(n);
  std::size_t k = 0;
  for (long x : v) m.a[k++] = x;
  return m;
}

IntMatrix diag_of(const std::vector<BigInt>& d) {
  IntMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

// #{x mod q : 4 L x = 0 mod q} by walking all residues.
std::int64_t brute_kernel(const QuadraticForm& F, std::int64_t q) {
  const std::size_t n = F.dim();
  std::vector<std::int64_t> x(n, 0);
  std::int64_t count = 0;
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      std::int64_t s = 0;
      for (std::size_t j = 0; j < n; ++j) s += 4 * F(i, j) * x[j];
      ok = mod_pos(s, q) == 0;
    }
    count += ok;
    std::size_t k = 0;
    while (k < n && ++x[k] == q) x[k++] = 0;
    if (k == n) break;
  }
  return count;
}

double ipow(double b, std::size_t e) {
  double r = 1;
  while (e--) r *= b;
  return r;
}

// Brute force, falling back to CRT over prime-power factors when q^n is large.
std::optional<std::int64_t> kernel_oracle(const QuadraticForm& F, std::int64_t q) {
  constexpr double kCap = 3e6;
  if (ipow(static_cast<double>(q), F.dim()) <= kCap) return brute_kernel(F, q);
  std::int64_t total = 1, m = q;
  for (std::int64_t p = 2; m > 1; ++p) {
    if (m % p) continue;
    std::int64_t pk = 1;
    while (m % p == 0) m /= p, pk *= p;
    if (pk == q || ipow(static_cast<double>(pk), F.dim()) > kCap) return std::nullopt;
    total *= brute_kernel(F, pk);
  }
  return total;
}

QuadraticForm random_form(std::size_t n, std::int64_t range) {
  while (true) {
    auto m = gen::symmetric(n, -range, range);
    try {
      return QuadraticForm(n, m);
    } catch (const InvalidArgument&) {
    }
  }
}

}  // namespace

TEST_CASE("evaluate examples") {
  const std::vector<std::int64_t> a{3, 3}, b{3, 4, 5}, c{1, 1, 1};
  CHECK(QuadraticForm::diagonal({1, -1}).evaluate(a) == 0);
  CHECK(QuadraticForm::diagonal({1, 1, -1}).evaluate(b) == 0);
  CHECK(QuadraticForm::diagonal({1, 1, -1}).evaluate(c) == 1);
}

TEST_CASE("evaluate rejects wrong length") {
  const std::vector<std::int64_t> x{1, 2, 3};
  CHECK_THROWS_AS(QuadraticForm::diagonal({1, -1}).evaluate(x), DimensionMismatch);
}

TEST_CASE("evaluate promotes past 64 bits") {
  const auto F = QuadraticForm::diagonal({1000000, 1000000});
  const std::vector<std::int64_t> x{4'000'000'000LL, 4'000'000'000LL};
  const BigInt v = F.evaluate(x);
  CHECK(v == BigInt(2) * BigInt(1000000) * BigInt(4'000'000'000LL) * BigInt(4'000'000'000LL));
}

TEST_CASE("evaluate is even in x") {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = static_cast<std::size_t>(gen::integer(2, 6));
    const auto F = random_form(n, 50);
    auto x = gen::vec(n, -1000, 1000);
    auto y = x;
    for (auto& v : y) v = -v;
    CHECK(F.evaluate(x) == F.evaluate(y));
  }
}

TEST_CASE("form construction errors") {
  CHECK_THROWS_AS(QuadraticForm(2, {1, 2, 3, 4}), InvalidArgument);  // not symmetric
  CHECK_THROWS_AS(QuadraticForm(2, {1, 1, 1, 1}), InvalidArgument);  // singular
  CHECK_THROWS_AS(QuadraticForm(2, {1, 0, 0}), DimensionMismatch);   // wrong size
  CHECK_THROWS_AS(QuadraticForm::diagonal({2'000'000, 1}), InvalidArgument);
}

TEST_CASE("read_form parses a text block") {
  std::istringstream in("3\n1 0 0\n0 1 0\n0 0 -1\n");
  const auto F = read_form(in);
  CHECK(F.dim() == 3);
  CHECK(F(2, 2) == -1);
  CHECK(F.det() == -1);
  std::istringstream bad("2\n1 2\n3 4\n");
  CHECK_THROWS_AS(read_form(bad), InvalidArgument);
}

TEST_CASE("smith normal form examples") {
  CHECK(smith_normal_form(IntMatrix::identity(2)).D == IntMatrix::identity(2));
  CHECK(smith_normal_form(mat(2, {2, 0, 0, 3})).D == mat(2, {1, 0, 0, 6}));
  CHECK(smith_normal_form(mat(2, {2, 1, 1, 2})).D == mat(2, {1, 0, 0, 3}));
  CHECK(smith_normal_form(IntMatrix(3)).D == IntMatrix(3));
}

TEST_CASE("smith normal form: S D T = M, unimodular, divisibility chain") {
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(gen::integer(1, 5));
    IntMatrix m(n);
    for (auto& v : m.a) v = gen::integer(-9, 9);
    const auto snf = smith_normal_form(m);
    REQUIRE(snf.S * snf.D * snf.T == m);
    CHECK(abs(determinant(snf.S)) == 1);
    CHECK(abs(determinant(snf.T)) == 1);
    const auto d = snf.invariants();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) CHECK(snf.D(i, j) == 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      CHECK(d[i] >= 0);
      if (d[i] == 0) CHECK(d[i + 1] == 0);
      else CHECK(d[i + 1] % d[i] == 0);
    }
    BigInt prod = 1;
    for (const auto& v : d) prod *= v;
    CHECK(prod == abs(determinant(m)));
  }
}

TEST_CASE("smith invariants of 2L multiply to |det 2L|") {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = static_cast<std::size_t>(gen::integer(2, 5));
    const auto F = random_form(n, 20);
    BigInt prod = 1;
    for (const auto& v : F.smith()) prod *= v;
    BigInt twon = 1;
    for (std::size_t i = 0; i < n; ++i) twon *= 2;
    CHECK(prod == abs(F.det()) * twon);
    CHECK(diag_of(F.smith()).n == n);
  }
}

TEST_CASE("kernel_count examples") {
  CHECK(kernel_count(QuadraticForm::diagonal({1, 1, -1}), 1) == 1);
  CHECK(kernel_count(QuadraticForm(1, {1}), 4) == 4);
  CHECK(kernel_count(QuadraticForm::diagonal({1, 1}), 3) == 1);
}

TEST_CASE("kernel_count matches brute force for q <= 200, n <= 4") {
  int checked = 0;
  for (std::size_t n = 2; n <= 4; ++n) {
    for (int f = 0; f < 4; ++f) {
      const auto F = random_form(n, 12);
      for (std::int64_t q = 1; q <= 200; ++q) {
        const auto oracle = kernel_oracle(F, q);
        if (!oracle) continue;
        CHECK(kernel_count(F, q) == *oracle);
        ++checked;
      }
    }
  }
  CHECK(checked > 1500);
}

TEST_CASE("local solubility examples") {
  const auto def = local_solubility(QuadraticForm::diagonal({1, 1, 1}));
  CHECK_FALSE(def.real_soluble);
  CHECK_FALSE(def.globally_unobstructed);

  const auto F5 = QuadraticForm::diagonal({1, 1, 1, 1, -1});
  const std::vector<std::int64_t> two{2};
  const auto rep = local_solubility(F5, two, 6);
  CHECK(rep.p_reports.at(0).soluble);
  CHECK(rep.globally_unobstructed);
  // the search itself also finds a liftable zero mod 2^6
  const auto direct = padic_search(F5, 2, 6);
  CHECK(direct.status == PadicStatus::soluble);

  const auto hyp = local_solubility(QuadraticForm::diagonal({1, -1}));
  CHECK(hyp.real_soluble);
  for (const auto& p : hyp.p_reports) CHECK(p.soluble);
  CHECK(hyp.globally_unobstructed);
}

TEST_CASE("local obstruction at p = 3 for x^2 + y^2 - 3 z^2") {
  const auto F = QuadraticForm::diagonal({1, 1, -3});
  const auto rep = padic_search(F, 3, default_depth(F, 3));
  CHECK(rep.status == PadicStatus::insoluble);
  CHECK_FALSE(rep.soluble);
  const auto full = local_solubility(F);
  CHECK(full.real_soluble);
  CHECK_FALSE(full.globally_unobstructed);
}

TEST_CASE("sum of four squares is anisotropic at 2") {
  const auto rep = padic_search(QuadraticForm::diagonal({1, 1, 1, 1}), 2, 7);
  CHECK(rep.status == PadicStatus::insoluble);
}

TEST_CASE("report consistency: globally_unobstructed = real and all primes") {
  int decided = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = static_cast<std::size_t>(gen::integer(2, 4));
    const auto F = random_form(n, 6);
    try {
      const auto rep = local_solubility(F);
      bool all = rep.real_soluble;
      for (const auto& p : rep.p_reports) all = all && p.soluble;
      CHECK(rep.globally_unobstructed == all);
      CHECK(rep.real_soluble == is_indefinite(F));
      ++decided;
    } catch (const Inconclusive& e) {
      CHECK(e.prime >= 2);
    }
  }
  CHECK(decided >= 30);
}

TEST_CASE("form report json has the documented keys") {
  const auto F = QuadraticForm::diagonal({1, 1, -1});
  const auto js = form_report_json(F, local_solubility(F));
  for (const char* key : {"\"n\"", "\"det\"", "\"smith\"", "\"real_soluble\"", "\"p_reports\""})
    CHECK(js.find(key) != std::string::npos);
}
