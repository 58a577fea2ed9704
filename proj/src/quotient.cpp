#include "quadric/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "quadric/quadrature.hpp"

namespace quadric {

namespace {

constexpr double kThreeOverPi = 3.0 / std::numbers::pi;

// Additive recurrence with the generalized golden ratio for d = 3 (root of x^4 = x + 1).
constexpr double kPhi3 = 1.2207440846057596;
constexpr double kAlpha[3] = {1.0 / kPhi3, 1.0 / (kPhi3 * kPhi3), 1.0 / (kPhi3 * kPhi3 * kPhi3)};

double frac(double x) { return x - std::floor(x); }

struct QmcSample {
  QuotientPoint p;
  double density;  // (3/pi) / sqrt(1 - x^2), the Jacobian of the map from the unit cube
};

// g = n(x) a(y) k(theta) with (x, y) in the fundamental domain.
QmcSample qmc_sample(std::size_t k) {
  const double kk = static_cast<double>(k) + 1.0;
  const double u = frac(0.5 + kk * kAlpha[0]);
  const double v = frac(0.5 + kk * kAlpha[1]);
  const double w = frac(0.5 + kk * kAlpha[2]);
  const double x = u - 0.5;
  const double r = std::sqrt(1.0 - x * x);
  const double s = std::max(v, 1e-300) / r;  // s = 1/y in (0, 1/r]
  const double y = 1.0 / s;
  const double th = std::numbers::pi * w;
  const double sy = std::sqrt(y);
  const Mat2 na{sy, x / sy, 0.0, 1.0 / sy};
  const Mat2 kt{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)};
  QmcSample out;
  out.p.g = na * kt;
  out.p.reduced_z = {x, y};
  out.p.reduction_word_length = 0;
  out.density = kThreeOverPi / r;
  return out;
}

// a b + c d with the rounding error of both products recovered by fma
double dot2(double a, double b, double c, double d) {
  const double p = a * b, q = c * d;
  const double ep = std::fma(a, b, -p), eq = std::fma(c, d, -q);
  const double s = p + q;
  const double z = s - p;
  const double es = (p - (s - z)) + (q - z);
  return s + (es + ep + eq);
}

double hyperbolic_distance(Complex z, Complex w) {
  const double num = std::norm(z - w);
  return std::acosh(1.0 + num / (2.0 * z.imag() * w.imag()));
}

}  // namespace

Mat2 horocycle_matrix(double t) { return {1.0, t, 0.0, 1.0}; }

Sl2 lie_element(LieDirection d) {
  switch (d) {
    case LieDirection::X: return kLieX;
    case LieDirection::Y: return kLieY;
    case LieDirection::Z: return kLieZ;
  }
  return {};
}

Mat2 exp_sl2(const Sl2& A, double s) {
  // (sA)^2 = delta I with delta = s^2 (h^2 + e f)
  const double h = s * A.h, e = s * A.e, f = s * A.f;
  const double delta = h * h + e * f;
  double c, k;  // exp = c I + k (sA)
  if (delta > 1e-16) {
    const double r = std::sqrt(delta);
    c = std::cosh(r), k = std::sinh(r) / r;
  } else if (delta < -1e-16) {
    const double r = std::sqrt(-delta);
    c = std::cos(r), k = std::sin(r) / r;
  } else {
    c = 1.0 + delta / 2.0, k = 1.0 + delta / 6.0;
  }
  return {c + k * h, k * e, k * f, c - k * h};
}

Reduction reduce(Complex z) {
  if (!(z.imag() > 0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw ConvergenceError("reduce: point is not in the upper half-plane");
  Reduction r;
  r.z = z;
  for (int step = 0; step < kMaxReductionSteps; ++step) {
    if (std::abs(r.z.real()) > 0.5) {
      const double n = std::nearbyint(r.z.real());
      r.z -= n;
      r.gamma = Mat2{1.0, -n, 0.0, 1.0} * r.gamma;
      ++r.word_length;
    }
    if (std::norm(r.z) < 1.0) {
      r.z = -1.0 / r.z;
      r.gamma = Mat2{0.0, -1.0, 1.0, 0.0} * r.gamma;
      ++r.word_length;
      if (!(r.z.imag() > 0) || !std::isfinite(r.z.imag()))
        throw ConvergenceError("reduce: imaginary part underflowed");
      continue;
    }
    return r;
  }
  throw ConvergenceError("reduce: no convergence in 10^4 steps");
}

double QuotientPoint::frame_angle() const { return std::atan2(g.c, g.d); }

QuotientPoint make_point(const Mat2& g) {
  const double det = g.det();
  if (!(det > 0) || !std::isfinite(det)) throw InvalidArgument("quotient point: matrix must have positive determinant");
  const double s = 1.0 / std::sqrt(det);
  Mat2 h{g.a * s, g.b * s, g.c * s, g.d * s};
  const auto red = reduce(h.act(Complex(0.0, 1.0)));
  QuotientPoint p;
  // gamma has integer entries that can be large while gamma h is O(1); the
  // products are formed with a compensated dot product to limit cancellation.
  const Mat2& y = red.gamma;
  p.g = {dot2(y.a, h.a, y.b, h.c), dot2(y.a, h.b, y.b, h.d), dot2(y.c, h.a, y.d, h.c), dot2(y.c, h.b, y.d, h.d)};
  const double s2 = 1.0 / std::sqrt(p.g.det());
  p.g = {p.g.a * s2, p.g.b * s2, p.g.c * s2, p.g.d * s2};
  // read z back from the representative rather than the iterated value
  p.reduced_z = p.g.act(Complex(0.0, 1.0));
  p.reduction_word_length = red.word_length;
  return p;
}

QuotientPoint horocycle(const QuotientPoint& p, double t) {
  if (!(std::abs(t) <= 1e9)) throw InvalidArgument("horocycle: |t| must be at most 1e9");
  return make_point(p.g * horocycle_matrix(t));
}

QuotientPoint translate(const QuotientPoint& p, const Sl2& A, double s) { return make_point(p.g * exp_sl2(A, s)); }

double quotient_distance(const QuotientPoint& p, const QuotientPoint& q) {
  const Complex z = p.reduced_z, w = q.reduced_z;
  double best = hyperbolic_distance(z, w);
  // boundary identifications of the fundamental domain
  for (Complex c : {z + 1.0, z - 1.0, -1.0 / z, -1.0 / z + 1.0, -1.0 / z - 1.0})
    best = std::min(best, hyperbolic_distance(c, w));
  return best;
}

Observable::Observable(std::string name, Fn fn, double sup_bound)
    : name_(std::move(name)), fn_(std::move(fn)), sup_(sup_bound) {}

Observable Observable::with_mean(double m) const {
  Observable o = *this;
  o.mean_ = m;
  return o;
}

Observable Observable::flagged_zero_average() const {
  Observable o = *this;
  o.zero_average_ = true;
  return o;
}

Observable Observable::minus(double m) const {
  Observable o = *this;
  o.offset_ += m;
  if (o.mean_) o.mean_ = *o.mean_ - m;
  return o;
}

Observable constant_observable(double value) {
  return Observable("const:" + std::to_string(value), [value](const QuotientPoint&) { return value; }, std::abs(value))
      .with_mean(value);
}

Observable disc_bump(Complex center, double width, int frame_harmonic) {
  if (!(width > 0)) throw InvalidArgument("disc_bump: width must be positive");
  if (frame_harmonic % 2 != 0) throw InvalidArgument("disc_bump: frame harmonic must be even (g and -g agree)");
  if (!(std::abs(center.real()) + width <= 0.5) || !(std::abs(center) - width >= 1.0))
    throw InvalidArgument("disc_bump: disc must lie inside the fundamental domain");
  const auto bump = standard_bump(0);
  const int m = frame_harmonic;
  // no commas: the name ends up in CSV cells
  char buf[96];
  std::snprintf(buf, sizeof buf, "bump[c=%g%+gi w=%g m=%d]", center.real(), center.imag(), width, m);
  const std::string name = buf;
  // mean: the disc sits inside the domain, so integrate in polar coordinates
  // about the center; int_0^{2 pi} (y0 + r sin t)^-2 dt = 2 pi y0 / (y0^2 - r^2)^{3/2}
  double mean = 0.0;
  if (m == 0) {
    const double y0 = center.imag();
    mean = 6.0 * y0 *
           integrate([&](double r) { return bump(r / width) * r / std::pow(y0 * y0 - r * r, 1.5); }, 0.0, width,
                     width / 64);
  }
  return Observable(
             std::move(name),
             [center, width, m, bump](const QuotientPoint& p) {
               const double r = std::abs(p.reduced_z - center) / width;
               if (r >= 1.0) return 0.0;
               const double v = bump(r);
               return m == 0 ? v : v * std::cos(m * p.frame_angle());
             },
             std::exp(-1.0))
      .with_mean(mean);
}

Observable observable_by_name(const std::string& name, Complex center, double width) {
  if (name == "bump") return disc_bump(center, width);
  if (name.rfind("bump:m=", 0) == 0) return disc_bump(center, width, std::stoi(name.substr(7)));
  if (name.rfind("const:", 0) == 0) return constant_observable(std::stod(name.substr(6)));
  throw InvalidArgument("unknown observable '" + name + "'");
}

std::vector<QuotientPoint> sample_points(std::size_t count, std::size_t offset) {
  std::vector<QuotientPoint> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(qmc_sample(offset + k).p);
  return out;
}

MeanEstimate estimate_mean(const Observable& f, std::size_t samples) {
  if (samples < 16) throw InvalidArgument("estimate_mean: too few samples");
  const std::size_t quarter = samples / 4;
  CompensatedSum acc;
  double coarse = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const auto s = qmc_sample(k);
    const double v = f(s.p) * s.density;
    if (!std::isfinite(v)) throw ConvergenceError("estimate_mean: observable is not finite on the domain");
    acc.add(v);
    if (k + 1 == quarter) coarse = acc.value() / static_cast<double>(quarter);
  }
  MeanEstimate m;
  m.mean = acc.value() / static_cast<double>(samples);
  m.coarse = coarse;
  m.samples = samples;
  if (!std::isfinite(m.mean) || std::abs(m.mean - m.coarse) > 0.01 * (1.0 + std::abs(m.mean)))
    throw ConvergenceError("estimate_mean: estimate does not settle (observable unbounded?)");
  return m;
}

Observable zero_average_projection(const Observable& f, std::size_t samples) {
  if (samples < 10'000) throw InvalidArgument("zero_average_projection: need at least 1e4 samples");
  // a cached mean is exact (constants); otherwise estimate it
  const double m = f.mean() ? *f.mean() : estimate_mean(f, samples).mean;
  return f.with_mean(m).minus(m).flagged_zero_average();
}

double lie_derivative(const Observable& f, const Sl2& A, const QuotientPoint& p, double h) {
  return (f(translate(p, A, h)) - f(translate(p, A, -h))) / (2.0 * h);
}

double lie_derivative(const Observable& f, LieDirection d, const QuotientPoint& p, double h) {
  return lie_derivative(f, lie_element(d), p, h);
}

Observable pushforward(const Observable& f, double t) {
  return Observable(
      f.name() + "@u(" + std::to_string(t) + ")", [f, t](const QuotientPoint& p) { return f(horocycle(p, t)); },
      f.sup_bound());
}

Complex twisted_average(const Observable& f, const QuotientPoint& p, const WeightFunction& w, double P, double c,
                        const TwistedAverageOptions& opt) {
  if (!(P >= 1)) throw InvalidArgument("twisted_average: P must be >= 1");
  // f(p u(t)) moves at unit hyperbolic speed, so the panel is capped in absolute
  // terms as well as relative to P and the twist frequency.
  const double panel = std::min({P / 8.0, P / (8.0 * (1.0 + std::abs(c))), 0.25, 1.0 / (8.0 * (1.0 + std::abs(c)))});
  const double lo = P * w.a(), hi = P * w.b();
  const double evals = std::ceil((hi - lo) / panel) * kDefaultNodes;
  if (evals > opt.max_evaluations) throw BudgetExceeded("twisted_average", evals, opt.max_evaluations);
  return integrate(
      [&](double t) -> Complex {
        const double wt = w(t / P);
        if (wt == 0.0) return Complex{};
        return wt * f(horocycle(p, t)) * expi(c * t);
      },
      lo, hi, panel);
}

std::vector<double> orbit_values(const Observable& f, const QuotientPoint& p, std::span<const double> times,
                                 bool parallel) {
  std::vector<double> out(times.size());
  const auto n = static_cast<std::ptrdiff_t>(times.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(horocycle(p, times[static_cast<std::size_t>(i)]));
  return out;
}

std::vector<double> orbit_table(const Observable& f, const QuotientPoint& p, std::int64_t B, bool parallel) {
  std::vector<double> times(static_cast<std::size_t>(2 * B + 1));
  for (std::int64_t k = -B; k <= B; ++k) times[static_cast<std::size_t>(k + B)] = static_cast<double>(k);
  return orbit_values(f, p, times, parallel);
}

GrowthProfile growth_profile(const Observable& f, std::span<const double> ts, std::size_t grid) {
  GrowthProfile g;
  const auto pts = sample_points(grid);
  for (double t : ts) {
    const auto ft = pushforward(f, t);
    double sup = 0;
    for (const auto& p : pts) sup = std::max(sup, std::abs(lie_derivative(ft, kLieY, p)));
    g.t.push_back(t);
    g.sup.push_back(sup);
  }
  // least squares slope of log sup on log(1 + |t|)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    if (!(g.sup[i] > 0)) continue;
    const double x = std::log1p(std::abs(g.t[i])), y = std::log(g.sup[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++m;
  }
  const double den = static_cast<double>(m) * sxx - sx * sx;
  g.slope = (m >= 2 && den > 0) ? (static_cast<double>(m) * sxy - sx * sy) / den : 0.0;
  return g;
}

QuotientPoint base_point(double a, double b, double c, double d) { return make_point({a, b, c, d}); }

}  // namespace quadric
