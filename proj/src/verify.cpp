#include "quadric/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "quadric/circle.hpp"
#include "quadric/enumerate.hpp"
#include "quadric/experiments.hpp"
#include "quadric/expsums.hpp"

namespace quadric {

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : r_(seed) {}
  std::int64_t integer(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(r_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(r_); }
  std::mt19937_64& engine() { return r_; }

  QuadraticForm form(std::size_t n, std::int64_t range, bool diagonal) {
    for (;;) {
      std::vector<std::int64_t> L(n * n, 0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
          if (i == j || !diagonal) L[i * n + j] = L[j * n + i] = integer(-range, range);
      try {
        return QuadraticForm(n, L);
      } catch (const InvalidArgument&) {
      }
    }
  }

  // bump on a random disc inside the domain, plus a constant
  Observable observable() {
    const double w = real(0.2, 0.45);
    const Complex c{real(-0.5 + w, 0.5 - w), real(1 + w, 2.5)};
    const auto b = disc_bump(c, w, 2 * static_cast<int>(integer(0, 1)));
    const double off = real(-0.5, 0.5);
    return Observable("smooth", [b, off](const QuotientPoint& p) { return b(p) + off; }, 1.0 + std::abs(off));
  }

  QuotientPoint point() {
    const double a = real(0.6, 1.6), b = real(-0.8, 0.8), c = real(-0.6, 0.6);
    return base_point(a, b, c, (1 + b * c) / a);
  }

 private:
  std::mt19937_64 r_;
};

// 1
Outcome gauss_cancellation() {
  Rng rng(101);
  std::size_t total = 0, forms = 0;
  double worst = 0;
  bool all = true;
  for (std::size_t n = 1; n <= 4; ++n)
    for (int k = 0; k < 10; ++k) {
      const bool diag = k % 2 == 0;
      const auto F = rng.form(n, 6, diag);
      // non-diagonal rank 4 sums cost q^3 each; keep those to q <= 60
      const std::int64_t qmax = (!diag && n == 4) ? 60 : 200;
      const auto rep = cancellation_certificate(F, qmax, 130, rng.engine()());
      total += rep.samples.size();
      ++forms;
      all = all && rep.all_hold;
      for (const auto& s : rep.samples) worst = std::max(worst, s.ratio * s.ratio / s.kernel);
    }
  return {all && total >= 5000, std::to_string(total) + " samples over " + std::to_string(forms) +
                                    " forms, max |S|^2/(q^n kernel) = " + fmt("%.12f", worst)};
}

// 2
Outcome counting_asymptotic() {
  const std::vector<double> P{10, 20, 30, 40, 60};
  const auto fit = counting_fit(QuadraticForm::diagonal({1, 1, 1, 1, -1}), P);
  return {fit.exponent_hat >= 2.75 && fit.exponent_hat <= 3.25,
          "exponent_hat = " + fmt("%.4f", fit.exponent_hat) + ", C_hat = " + fmt("%.4f", fit.C_hat)};
}

// 3
Outcome delta_identity() {
  Rng rng(303);
  double worst = 0;
  int instances = 0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = static_cast<std::size_t>(1 + k % 3);
    const auto F = k % 4 == 0 ? QuadraticForm::diagonal(std::vector<std::int64_t>(n, 1)) : rng.form(n, 4, k % 2 == 1);
    const double P = n == 3 ? rng.real(4, 20) : rng.real(4, 32);
    const auto w = k % 5 == 0 ? sharp_box() : standard_bump();
    const auto f = k % 7 == 0 ? constant_observable(1.0) : rng.observable();
    const auto r = delta_identity_check(BoxSum::uniform(F, w, f, rng.point(), P));
    const double err = r.direct == r.via_integral ? 0.0 : std::abs(r.direct - r.via_integral) / std::abs(r.direct);
    worst = std::max(worst, err);
    ++instances;
  }
  return {worst <= 1e-12, std::to_string(instances) + " instances, max relative gap " + fmt("%.3e", worst)};
}

// 4
Outcome reconstruction() {
  const auto w = standard_bump();
  double grid_err = 0, split_err = 0;
  for (double delta : {1.0, 0.5, 0.1}) {
    const SplitKernel K(w, delta);
    for (int i = 0; i <= 240; ++i) {
      const double x = -1.2 + 0.01 * i;
      grid_err = std::max(grid_err, std::abs(K.reconstruct(x) - w(x)));
    }
  }
  Rng rng(404);
  int cases = 0;
  for (double delta : {1.0, 0.5, 0.1})
    for (std::size_t n : {1, 2}) {
      const auto F = rng.form(n, 3, false);
      const double P = n == 1 ? 32.0 : 16.0;
      const BoxSum s = BoxSum::uniform(F, w, rng.observable(), rng.point(), P);
      for (int k = 0; k < 3; ++k) {
        const double alpha = rng.real(0, 1);
        const Complex direct = s.evaluate(alpha).value;
        const Complex split = split_exp_sum(s, SplitKernel(w, delta), alpha);
        split_err = std::max(split_err, std::abs(split - direct) / std::abs(direct));
        ++cases;
      }
    }
  return {grid_err < 1e-6 && split_err < 1e-6, "max reconstruction error " + fmt("%.3e", grid_err) +
                                                   ", split sum relative error " + fmt("%.3e", split_err) + " over " +
                                                   std::to_string(cases) + " sums"};
}

// 5
Outcome van_der_corput() {
  Rng rng(505);
  double worst = 0;
  bool cs = true;
  int cases = 0;
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = static_cast<std::size_t>(1 + k % 2);
    const auto F = rng.form(n, 4, false);
    const double P = rng.real(2, 16);
    const auto H = rng.integer(1, std::max<std::int64_t>(1, std::min<std::int64_t>(8, static_cast<std::int64_t>(P / 2))));
    const BoxSum s = BoxSum::uniform(F, standard_bump(), rng.observable(), rng.point(), P);
    const auto r = vdc_difference(s, rng.real(0, 1), H);
    worst = std::max(worst, r.rearrangement_error);
    cs = cs && r.holds;
    ++cases;
  }
  return {worst <= 1e-12 && cs, std::to_string(cases) + " instances, max rearrangement error " + fmt("%.3e", worst) +
                                    (cs ? ", Cauchy-Schwarz step holds" : ", Cauchy-Schwarz step FAILED")};
}

// 6
Outcome poisson() {
  const auto w = standard_bump();
  struct Case {
    double width, mid;
    std::int64_t q, r;
    double c;
  };
  const std::vector<Case> corpus{{10, 0, 1, 0, 0},    {10, 0, 3, 1, 0},     {6, 0.3, 2, 1, 0.25},
                                 {8, -1.7, 5, 3, 0.1}, {12, 2.2, 4, 0, -0.4}, {5, 0, 7, 6, 0.5}};
  double worst = 0;
  for (const auto& k : corpus) {
    auto g = [&](double x) { return w((x - k.mid) / k.width); };
    worst = std::max(worst, poisson_check(g, k.mid - k.width, k.mid + k.width, k.q, k.r, k.c).residual);
  }
  return {worst < 1e-8, std::to_string(corpus.size()) + " cases, max residual " + fmt("%.3e", worst)};
}

// 7
Outcome conjugation() {
  Rng rng(707);
  const auto f = disc_bump({0.1, 1.7}, 0.35, 2);
  double worst = 0;
  int nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    const double t = rng.real(-4, 4);
    // half the points are steered into the support after the flow so the check is not vacuous
    QuotientPoint p = rng.point();
    if (i % 2 == 0)
      p = horocycle(make_point(Mat2{std::sqrt(1.7), 0.1 / std::sqrt(1.7), 0, 1 / std::sqrt(1.7)} *
                               exp_sl2({0, -1, 1}, rng.real(0, 3.14)) * exp_sl2(kLieY, rng.real(-0.3, 0.3))),
                    -t + rng.real(-0.2, 0.2));
    const double lhs = lie_derivative(pushforward(f, t), kLieY, p);
    const double rhs = lie_derivative(f, kLieY + t * kLieX, horocycle(p, t));
    worst = std::max(worst, std::abs(lhs - rhs) / (1 + t * t));
    nonzero += std::abs(lhs) > 1e-3;
  }
  return {worst < 1e-4, "100 points, max |lhs - rhs| / (1 + t^2) = " + fmt("%.3e", worst) + ", " +
                            std::to_string(nonzero) + " with |lhs| > 1e-3"};
}

// 8
Outcome l2_grouping() {
  const auto hand =
      l2_identity(BoxSum::uniform(QuadraticForm(1, {1}), sharp_box(), constant_observable(1), base_point(1.1, 0.3, 0.2, (1 + 0.06) / 1.1), 3));
  Rng rng(808);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t n = static_cast<std::size_t>(1 + k % 3);
    const auto F = k < 3 ? QuadraticForm::diagonal({1, -1}) : rng.form(n, 4, k % 2 == 0);
    const double P = n == 3 ? rng.real(3, 5) : rng.real(3, 8);
    const auto r = l2_identity(BoxSum::uniform(F, standard_bump(), rng.observable(), rng.point(), P));
    worst = std::max(worst, std::abs(r.lhs - r.rhs) / std::abs(r.rhs));
  }
  return {hand.lhs == 9.0 && hand.rhs == 9.0 && worst <= 1e-10,
          "hand case lhs = " + fmt("%.0f", hand.lhs) + ", 10 instances max relative gap " + fmt("%.3e", worst)};
}

// 9
Outcome lattice_sum() {
  const auto hand = lattice_sum_check(QuadraticForm(1, {1}), 10, 10, 0.5, 0.5, 0);
  Rng rng(909);
  const std::vector<QuadraticForm> forms{QuadraticForm(1, {1}), QuadraticForm(1, {3}), QuadraticForm::diagonal({1, 1}),
                                         QuadraticForm(2, {2, 1, 1, -3}), QuadraticForm::diagonal({1, -1})};
  double worst = 0;  // max of ratio / 32^n
  double worst_ratio = 0;
  for (int k = 0; k < 200; ++k) {
    const auto& L = forms[static_cast<std::size_t>(k) % forms.size()];
    const std::int64_t P = rng.integer(2, L.dim() == 1 ? 200 : 40);
    const double H = k % 10 == 0 ? 0.0 : rng.real(0, static_cast<double>(P));
    const double z = (k % 3 == 0 ? -1 : 1) * std::exp(rng.real(std::log(1e-4), std::log(0.99)));
    const double delta = rng.real(0.05, 0.95);
    const double C = k % 4 == 0 ? 0.0 : std::exp(rng.real(std::log(1e-3), std::log(10.0)));
    const auto r = lattice_sum_check(L, P, H, z, delta, C);
    worst_ratio = std::max(worst_ratio, r.ratio);
    worst = std::max(worst, r.ratio / std::pow(32.0, static_cast<double>(L.dim())));
  }
  return {std::abs(hand.lhs - 8.0412) < 1e-3 && worst <= 1.0,
          "hand value " + fmt("%.6f", hand.lhs) + ", 200 grid points, max ratio " + fmt("%.4f", worst_ratio) +
              " (max ratio/32^n " + fmt("%.4f", worst) + ")"};
}

// 10
Outcome equidistribution() {
  ExperimentConfig cfg;
  cfg.P_schedule = {10, 60};
  const auto avg = sparse_average(cfg);
  bool ok = avg.zero_average;
  std::ostringstream d;
  for (std::size_t b = 0; b < 3; ++b) {
    double a10 = 0, a60 = 0;
    for (const auto& r : avg.records)
      if (r.base == b) (r.P == 10 ? a10 : a60) = std::abs(r.avg_sharp);
    ok = ok && a60 < a10;
    d << "x0#" << b << ": " << fmt("%.3e", a10) << " -> " << fmt("%.3e", a60) << "; ";
  }
  ExperimentConfig control = cfg;
  control.observable = "const:1";
  control.project = false;
  bool exact = true;
  for (const auto& r : sparse_average(control).records) exact = exact && r.avg_sharp == 1.0 && r.control_avg == 1.0;
  d << (exact ? "control f = 1 stays at exactly 1" : "control f = 1 deviates from 1");
  return {ok && exact, d.str()};
}

// 11
Outcome farey() {
  std::mt19937_64 r(1111);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t located = 0, tried = 0;
  for (std::int64_t Q = 1; Q <= 50; ++Q)
    for (int k = 0; k < 100'000; ++k) {
      const double alpha = u(r);
      ++tried;
      const auto l = locate(alpha, Q);
      if (l.q >= 1 && l.q <= Q && gcd64(l.a, l.q) == 1 &&
          dist_to_int(alpha - static_cast<double>(l.a) / static_cast<double>(l.q)) <
              1.0 / (static_cast<double>(l.q) * static_cast<double>(Q)) * (1 + 1e-12))
        ++located;
    }
  double worst = 0;
  for (std::int64_t Q : {1, 2, 3, 7, 20, 50})
    for (double P : {100.0, 1000.0, 1e4}) {
      const auto m = meas_m1(Q, P, kDefaultEps0);
      worst = std::max(worst, std::abs(m.union_measure - m.closed_form) / m.closed_form);
    }
  return {located == tried && worst <= 1e-10, std::to_string(located) + "/" + std::to_string(tried) +
                                                  " located; meas(m1) max relative gap " + fmt("%.3e", worst)};
}

struct Spec {
  const char* name;
  double limit;
  std::function<Outcome()> run;
};

const std::vector<Spec>& specs() {
  static const std::vector<Spec> s{
      {"Gauss-sum cancellation", 120, gauss_cancellation},
      {"counting asymptotic", 180, counting_asymptotic},
      {"delta-function identity", 60, delta_identity},
      {"smooth partition reconstruction", 120, reconstruction},
      {"van der Corput rearrangement", 60, van_der_corput},
      {"Poisson residuals", 30, poisson},
      {"Lie conjugation identity", 30, conjugation},
      {"L2 grouping identity", 60, l2_grouping},
      {"lattice-sum inequality", 30, lattice_sum},
      {"equidistribution trend", 600, equidistribution},
      {"Farey cover", 30, farey},
  };
  return s;
}

}  // namespace

CriterionResult run_criterion(int id) {
  if (id < 1 || id > kCriterionCount) throw InvalidArgument("criterion id must lie in [1, 11]");
  const auto& spec = specs()[static_cast<std::size_t>(id - 1)];
  CriterionResult r;
  r.id = id;
  r.name = spec.name;
  r.limit_seconds = spec.limit;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto o = spec.run();
    r.check_held = o.ok;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.check_held = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = r.check_held && r.seconds < r.limit_seconds;
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& which) {
  std::vector<CriterionResult> out;
  if (which.empty())
    for (int i = 1; i <= kCriterionCount; ++i) out.push_back(run_criterion(i));
  else
    for (int i : which) out.push_back(run_criterion(i));
  return out;
}

std::string format_result(const CriterionResult& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s %2d  %-32s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
  std::string s = buf;
  s += r.detail;
  std::snprintf(buf, sizeof buf, " (%.1f s, limit %.0f s)", r.seconds, r.limit_seconds);
  s += buf;
  return s;
}

}  // namespace quadric
