#include "quadric/weights.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "quadric/common.hpp"
#include "quadric/quadrature.hpp"

namespace quadric {

namespace {

constexpr int kBumpPolyLimit = 16;

using Poly = std::vector<double>;  // coefficients, lowest degree first

Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = static_cast<double>(k) * p[k];
  return d;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly poly_add(Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

double poly_eval(const Poly& p, double x) {
  double r = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
  return r;
}

// P_{j+1} = P_j' (1-x^2)^2 + 4 j x P_j (1-x^2) - 2 x P_j
const std::vector<Poly>& bump_polys() {
  static const std::vector<Poly> table = [] {
    std::vector<Poly> t{{1.0}};
    const Poly one_minus_x2{1.0, 0.0, -1.0};
    const Poly sq = poly_mul(one_minus_x2, one_minus_x2);
    for (int j = 0; j < kBumpPolyLimit; ++j) {
      const Poly& p = t.back();
      Poly next = poly_mul(poly_derivative(p), sq);
      next = poly_add(next, poly_mul(Poly{0.0, 4.0 * j}, poly_mul(p, one_minus_x2)));
      next = poly_add(next, poly_mul(Poly{0.0, -2.0}, p));
      t.push_back(std::move(next));
    }
    return t;
  }();
  return table;
}

double bump_derivative(double x, int j) {
  if (!(std::abs(x) < 1.0)) return 0.0;
  const double s = 1.0 - x * x;
  const double expo = -1.0 / s - 2.0 * j * std::log(s);
  return poly_eval(bump_polys()[static_cast<std::size_t>(j)], x) * std::exp(expo);
}

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// h(t) = exp(-1/t) for t > 0; the smooth step s(t) = h(t)/(h(t)+h(1-t)).
double smooth_step(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  const double h0 = std::exp(-1.0 / t), h1 = std::exp(-1.0 / (1.0 - t));
  return h0 / (h0 + h1);
}

}  // namespace

WeightFunction::WeightFunction(std::string name, double a, double b, int j_max, Eval eval)
    : name_(std::move(name)), a_(a), b_(b), j_max_(j_max), eval_(std::move(eval)) {
  if (!(a < b) || a < -1.0 - 1e-15 || b > 1.0 + 1e-15)
    throw InvalidArgument("weight support must be an interval inside [-1, 1]");
  if (j_max < 0) throw InvalidArgument("weight j_max must be nonnegative");
}

double WeightFunction::eval(double x, int j) const {
  if (j < 0 || j > j_max_)
    throw InvalidArgument("derivative order " + std::to_string(j) + " exceeds j_max " +
                          std::to_string(j_max_) + " of weight '" + name_ + "'");
  if (x < a_ || x > b_ || !eval_) return 0.0;
  return eval_(x, j);
}

WeightFunction standard_bump(int j_max) {
  if (j_max > kBumpPolyLimit) throw InvalidArgument("standard bump supports j_max <= 16");
  return WeightFunction("bump", -1.0, 1.0, j_max, [](double x, int j) { return bump_derivative(x, j); });
}

double bump_mass() {
  static const double mass =
      integrate([](double x) { return bump_derivative(x, 0); }, -1.0, 1.0, 1.0 / 8.0);
  return mass;
}

WeightFunction zero_weight(int j_max) {
  return WeightFunction("zero", -1.0, 1.0, j_max, [](double, int) { return 0.0; });
}

WeightFunction rescaled(const WeightFunction& w, double center, double half_width) {
  if (!(half_width > 0)) throw InvalidArgument("rescaled: half_width must be positive");
  const double a = center + half_width * w.a(), b = center + half_width * w.b();
  return WeightFunction(w.name() + "@scaled", a, b, w.j_max(), [w, center, half_width](double x, int j) {
    return w.eval((x - center) / half_width, j) / std::pow(half_width, j);
  });
}

WeightFunction sharp_box() {
  return WeightFunction("box", -1.0, 1.0, 0, [](double x, int) { return std::abs(x) < 1.0 ? 1.0 : 0.0; });
}

WeightFunction plateau(double delta) {
  if (!(delta > 0 && delta <= 1)) throw InvalidArgument("plateau: delta must lie in (0, 1]");
  return WeightFunction("plateau:" + std::to_string(delta), -1.0, 1.0, 0,
                        [delta](double x, int) { return smooth_step((1.0 - std::abs(x)) / delta); });
}

WeightFunction weight_by_name(const std::string& name) {
  if (name == "bump") return standard_bump();
  if (name == "box") return sharp_box();
  if (name == "zero") return zero_weight();
  if (name.rfind("plateau:", 0) == 0) return plateau(std::stod(name.substr(8)));
  throw InvalidArgument("unknown weight '" + name + "'");
}

ProductWeight::ProductWeight(std::vector<WeightFunction> factors) : factors_(std::move(factors)) {}

ProductWeight ProductWeight::uniform(const WeightFunction& w, std::size_t n) {
  return ProductWeight(std::vector<WeightFunction>(n, w));
}

int ProductWeight::j_max() const {
  int j = kBumpPolyLimit;
  for (const auto& f : factors_) j = std::min(j, f.j_max());
  return j;
}

double ProductWeight::eval(std::span<const double> x) const {
  if (x.size() != factors_.size()) throw DimensionMismatch("product weight: point has wrong dimension");
  double r = 1;
  for (std::size_t i = 0; i < x.size() && r != 0.0; ++i) r *= factors_[i].eval(x[i], 0);
  return r;
}

double ProductWeight::eval(std::span<const double> x, std::span<const int> beta) const {
  if (x.size() != factors_.size() || beta.size() != factors_.size())
    throw DimensionMismatch("product weight: point or multi-index has wrong dimension");
  double r = 1;
  for (std::size_t i = 0; i < x.size() && r != 0.0; ++i) r *= factors_[i].eval(x[i], beta[i]);
  return r;
}

double derivative_norm(const WeightFunction& w, int j, double p) {
  if (j > w.j_max()) throw InvalidArgument("derivative_norm: order exceeds j_max");
  const double a = w.a(), b = w.b();
  constexpr int kGrid = 4096;
  const double h = (b - a) / kGrid;
  std::vector<double> v(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) v[static_cast<std::size_t>(i)] = w.eval(a + i * h, j);

  if (p <= 0) {
    // grid maximum, then golden-section refinement around the best few cells
    std::vector<int> idx(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i) idx[static_cast<std::size_t>(i)] = i;
    const int keep = 8;
    std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](int l, int r) {
      return std::abs(v[static_cast<std::size_t>(l)]) > std::abs(v[static_cast<std::size_t>(r)]);
    });
    double best = std::abs(v[static_cast<std::size_t>(idx[0])]);
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int k = 0; k < keep; ++k) {
      double lo = std::max(a, a + (idx[static_cast<std::size_t>(k)] - 1) * h);
      double hi = std::min(b, a + (idx[static_cast<std::size_t>(k)] + 1) * h);
      double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
      double fc = std::abs(w.eval(c, j)), fd = std::abs(w.eval(d, j));
      for (int it = 0; it < 60; ++it) {
        if (fc > fd) {
          hi = d, d = c, fd = fc;
          c = hi - g * (hi - lo);
          fc = std::abs(w.eval(c, j));
        } else {
          lo = c, c = d, fc = fd;
          d = lo + g * (hi - lo);
          fd = std::abs(w.eval(d, j));
        }
      }
      best = std::max({best, fc, fd});
    }
    return best;
  }
  if (p != 1.0) throw InvalidArgument("derivative_norm: p must be 1 or infinity");

  // Split at sign changes so each piece integrates a smooth one-signed function.
  std::vector<double> cuts{a};
  for (int i = 0; i < kGrid; ++i) {
    const double l = v[static_cast<std::size_t>(i)], r = v[static_cast<std::size_t>(i) + 1];
    if ((l < 0 && r > 0) || (l > 0 && r < 0)) {
      double lo = a + i * h, hi = lo + h, flo = l;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi), fm = w.eval(mid, j);
        if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
        else hi = mid;
      }
      cuts.push_back(0.5 * (lo + hi));
    } else if (r == 0.0) {
      cuts.push_back(a + (i + 1) * h);
    }
  }
  cuts.push_back(b);
  CompensatedSum total;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total.add(std::abs(integrate([&](double x) { return w.eval(x, j); }, cuts[k], cuts[k + 1], (b - a) / 64.0)));
  return total.value();
}

double sobolev_norm(const ProductWeight& w, double p, int k) {
  if (k < 0) throw InvalidArgument("sobolev_norm: k must be nonnegative");
  if (k > w.j_max()) throw InvalidArgument("sobolev_norm: k exceeds the weight's J_max");
  const std::size_t n = w.dim();
  // per-factor norms; the product structure makes each term factorize
  std::vector<std::vector<double>> norms(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j <= k; ++j) norms[i].push_back(derivative_norm(w.factor(i), j, p));
  // dp[s] = sum over beta of the first i coordinates with |beta| = s
  std::vector<double> dp(static_cast<std::size_t>(k) + 1, 0.0);
  dp[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> next(dp.size(), 0.0);
    for (int s = 0; s <= k; ++s)
      for (int j = 0; s + j <= k; ++j)
        next[static_cast<std::size_t>(s + j)] += dp[static_cast<std::size_t>(s)] * norms[i][static_cast<std::size_t>(j)];
    dp = std::move(next);
  }
  double total = 0;
  for (double x : dp) total += x;
  return n == 0 ? 0.0 : total;
}

double sobolev_norm(const WeightFunction& w, double p, int k) {
  return sobolev_norm(ProductWeight({w}), p, k);
}

SplitKernel::SplitKernel(WeightFunction base, double delta)
    : base_(std::move(base)), delta_(delta) {
  if (!(delta > 0 && delta <= 1)) throw InvalidArgument("split kernel: delta must lie in (0, 1]");
  const double m = bump_mass();
  rho_ = WeightFunction("rho", -1.0, 1.0, kDefaultJMax, [m](double x, int j) { return bump_derivative(x, j) / m; });
}

int SplitKernel::max_order() const { return std::min(base_.j_max(), rho_.j_max()); }

double SplitKernel::omega_delta(double x, double y, int bx, int by) const {
  if (bx + by > max_order()) throw InvalidArgument("split kernel: derivative order too high");
  if (!(std::abs(x) < 1.0)) return 0.0;
  const double u = y + delta_ * x;
  double total = 0, dpow = 1;
  for (int i = 0; i <= bx; ++i) {
    total += binom(bx, i) * dpow * base_.eval(u, i + by) * rho_.eval(x, bx - i);
    dpow *= delta_;
  }
  return total;
}

double SplitKernel::reconstruct(double x) const {
  // integrand vanishes unless |x - y| < delta
  const double lo = x - delta_, hi = x + delta_;
  const double v = integrate([&](double y) { return omega_delta((x - y) / delta_, y); }, lo, hi,
                             std::min(1.0 / 8.0, (hi - lo) / 16.0));
  return v / delta_;
}

double SplitKernel::derivative_constant(int bx, int by) const {
  if (bx + by > max_order()) throw InvalidArgument("split kernel: derivative order too high");
  (void)by;
  double c = 0;
  for (int i = 0; i <= bx; ++i) c += binom(bx, i) * derivative_norm(rho_, bx - i, kInfNorm);
  return c;
}

double SplitKernel::window_1d(std::int64_t y0, double x, int j) const {
  const double lo = std::max(-0.5, x - 1.0), hi = std::min(0.5, x + 1.0);
  if (!(hi > lo)) return 0.0;
  const double yd = static_cast<double>(y0);
  return integrate([&](double t) { return omega_delta(x - t, delta_ * (yd + t), j, 0); }, lo, hi, 1.0 / 8.0);
}

SplitKernel heath_brown_kernel(const WeightFunction& w, double delta) { return SplitKernel(w, delta); }

double window_function(const SplitKernel& kernel, std::span<const std::int64_t> y0, std::span<const double> x) {
  if (y0.size() != x.size()) throw DimensionMismatch("window_function: y0 and x differ in dimension");
  double r = 1;
  for (std::size_t i = 0; i < x.size() && r != 0.0; ++i) r *= kernel.window_1d(y0[i], x[i]);
  return r;
}

double window_derivative(const SplitKernel& kernel, std::span<const std::int64_t> y0, std::span<const double> x,
                         std::span<const int> beta) {
  if (y0.size() != x.size() || beta.size() != x.size())
    throw DimensionMismatch("window_derivative: dimension mismatch");
  double r = 1;
  for (std::size_t i = 0; i < x.size() && r != 0.0; ++i) r *= kernel.window_1d(y0[i], x[i], beta[i]);
  return r;
}

std::int64_t window_index_bound(double delta) {
  return static_cast<std::int64_t>(std::ceil((1.0 + delta) / delta + 0.5)) - 1;
}

double window_partition(const SplitKernel& kernel, std::span<const double> x, double P) {
  const double scale = P * kernel.delta();
  const std::int64_t bound = window_index_bound(kernel.delta());
  // The sum over y0 in Z^n factorizes over coordinates.
  double r = 1;
  for (double xi : x) {
    const double s = xi / scale;
    const auto lo = std::max<std::int64_t>(-bound, static_cast<std::int64_t>(std::floor(s - 2)));
    const auto hi = std::min<std::int64_t>(bound, static_cast<std::int64_t>(std::ceil(s + 2)));
    CompensatedSum acc;
    for (std::int64_t y = lo; y <= hi; ++y) acc.add(kernel.window_1d(y, s - static_cast<double>(y)));
    r *= acc.value();
  }
  return r;
}

}  // namespace quadric
