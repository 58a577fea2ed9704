#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadric/common.hpp"
#include "quadric/weights.hpp"

namespace quadric {

/// 2x2 real matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;

  double det() const { return a * d - b * c; }
  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  /// Mobius action on the upper half-plane.
  Complex act(Complex z) const { return (a * z + b) / (c * z + d); }
};

Mat2 horocycle_matrix(double t);  // u(t) = [[1, t], [0, 1]]

/// Traceless 2x2 matrix [[h, e], [f, -h]]; the Lie algebra sl(2, R).
struct Sl2 {
  double h = 0, e = 0, f = 0;
  friend Sl2 operator+(const Sl2& x, const Sl2& y) { return {x.h + y.h, x.e + y.e, x.f + y.f}; }
  friend Sl2 operator*(double s, const Sl2& x) { return {s * x.h, s * x.e, s * x.f}; }
};

inline constexpr Sl2 kLieY{0.5, 0, 0};
inline constexpr Sl2 kLieX{0, 1, 0};
inline constexpr Sl2 kLieZ{0, 0, 1};

enum class LieDirection { X, Y, Z };
Sl2 lie_element(LieDirection d);

/// exp(s A) in closed form.
Mat2 exp_sl2(const Sl2& A, double s = 1.0);

struct Reduction {
  Complex z;
  int word_length = 0;
  Mat2 gamma;  // element of SL(2, Z) with gamma . z_in = z
};

inline constexpr int kMaxReductionSteps = 10'000;

/// Modular reduction into |Re z| <= 1/2, |z| >= 1: translate when |Re z| > 1/2,
/// invert when |z| < 1. Throws ConvergenceError on degenerate input.
Reduction reduce(Complex z);

/// A point of SL(2, Z) \ SL(2, R), stored through its reduced representative g,
/// so z = g . i lies in the standard fundamental domain.
struct QuotientPoint {
  Mat2 g;
  Complex reduced_z;
  int reduction_word_length = 0;

  /// Frame angle theta of g = n(x) a(y) k(theta); defined mod pi.
  double frame_angle() const;
};

/// Renormalize g to det 1 (throws if det <= 0) and reduce.
QuotientPoint make_point(const Mat2& g);

/// The class of g u(t), freshly reduced. Requires |t| <= 1e9.
QuotientPoint horocycle(const QuotientPoint& p, double t);

/// The class of g exp(s A).
QuotientPoint translate(const QuotientPoint& p, const Sl2& A, double s);

/// Hyperbolic-plane distance between the reduced base points.
double quotient_distance(const QuotientPoint& p, const QuotientPoint& q);

using ProductPoint = std::vector<QuotientPoint>;

/// A real function on the quotient.
class Observable {
 public:
  using Fn = std::function<double(const QuotientPoint&)>;

  Observable() = default;
  Observable(std::string name, Fn fn, double sup_bound);

  double operator()(const QuotientPoint& p) const { return fn_(p) - offset_; }

  const std::string& name() const { return name_; }
  /// Upper bound for |f|.
  double sup_bound() const { return sup_ + std::abs(offset_); }
  std::optional<double> mean() const { return mean_; }
  bool is_zero_average() const { return zero_average_; }

  Observable with_mean(double m) const;
  Observable minus(double m) const;
  Observable flagged_zero_average() const;

 private:
  std::string name_;
  Fn fn_;
  double sup_ = 0;
  double offset_ = 0;
  std::optional<double> mean_;
  bool zero_average_ = false;
};

Observable constant_observable(double value);

/// phi(|z - center| / width) * cos(m theta) with phi the standard bump profile.
/// The open disc must lie inside the fundamental domain and m must be even so
/// the function is well defined on the quotient. The mean is attached exactly
/// (radial quadrature), so projection needs no sampling.
Observable disc_bump(Complex center, double width, int frame_harmonic = 0);

/// Observable from a config spec: "bump" (center 2i, width 0.5), "const:<v>",
/// with optional center and width overrides.
Observable observable_by_name(const std::string& name, Complex center = {0.0, 2.0}, double width = 0.5);

struct MeanEstimate {
  double mean = 0;
  double coarse = 0;  // same estimator on the first quarter of the samples
  std::size_t samples = 0;
};

/// Quasi-Monte Carlo mean over the fundamental domain with density
/// (3/pi) dx dy / y^2 and a uniform frame angle. Throws ConvergenceError when the
/// estimate is non-finite or moves by more than 1% between N/4 and N samples
/// (an unbounded observable).
MeanEstimate estimate_mean(const Observable& f, std::size_t samples);

/// f - mean(f), flagged zero-average. Requires samples >= 1e4.
Observable zero_average_projection(const Observable& f, std::size_t samples = 20'000);

inline constexpr double kLieStep = 1e-4;

/// A f(g) = d/ds f(g exp(s A)) at s = 0, central difference with step h.
double lie_derivative(const Observable& f, const Sl2& A, const QuotientPoint& p, double h = kLieStep);
double lie_derivative(const Observable& f, LieDirection d, const QuotientPoint& p, double h = kLieStep);

/// (u(t) . f)(g) = f(g u(t)).
Observable pushforward(const Observable& f, double t);

struct TwistedAverageOptions {
  double max_evaluations = 5e7;
};

/// int w(t/P) f(p u(t)) e(c t) dt by composite Gauss-Legendre.
Complex twisted_average(const Observable& f, const QuotientPoint& p, const WeightFunction& w, double P, double c,
                        const TwistedAverageOptions& opt = {});

/// f(p u(t)) for each t. Parallel over t; the result does not depend on threads.
std::vector<double> orbit_values(const Observable& f, const QuotientPoint& p, std::span<const double> times,
                                 bool parallel = true);

/// f(p u(k)) for integer k in [-B, B], indexed k + B.
std::vector<double> orbit_table(const Observable& f, const QuotientPoint& p, std::int64_t B, bool parallel = true);

struct GrowthProfile {
  std::vector<double> t;
  std::vector<double> sup;  // grid sup of |Y (u(t) . f)|
  double slope = 0;         // log-log slope of sup against 1 + |t|
};

/// Sup over a fixed quasi-random grid of |Y(u(t) . f)| for each t.
GrowthProfile growth_profile(const Observable& f, std::span<const double> ts, std::size_t grid = 2000);

/// Quasi-random points of the quotient (fundamental domain x frame), deterministic.
std::vector<QuotientPoint> sample_points(std::size_t count, std::size_t offset = 0);

/// A base point from four matrix entries.
QuotientPoint base_point(double a, double b, double c, double d);

}  // namespace quadric
