#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace quadric {

inline constexpr int kDefaultJMax = 6;

/// A smooth weight supported in [a, b] inside [-1, 1] with derivatives up to j_max.
class WeightFunction {
 public:
  using Eval = std::function<double(double x, int j)>;

  WeightFunction() = default;
  WeightFunction(std::string name, double a, double b, int j_max, Eval eval);

  /// j-th derivative at x; zero outside [a, b]. Throws for j outside [0, j_max].
  double eval(double x, int j = 0) const;
  double operator()(double x) const { return eval(x, 0); }

  double a() const { return a_; }
  double b() const { return b_; }
  int j_max() const { return j_max_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  double a_ = -1, b_ = 1;
  int j_max_ = 0;
  Eval eval_;
};

/// omega(x) = exp(-1/(1-x^2)) on (-1,1). Derivatives come from the exact
/// recursion omega^(j) = P_j(x) / (1-x^2)^(2j) * omega(x).
WeightFunction standard_bump(int j_max = kDefaultJMax);

/// integral of the standard bump over (-1, 1).
double bump_mass();

/// The zero weight (for degenerate tests).
WeightFunction zero_weight(int j_max = kDefaultJMax);

/// x -> w((x - center)/half_width); support must stay inside [-1, 1].
WeightFunction rescaled(const WeightFunction& w, double center, double half_width);

/// Indicator of (-1, 1). Only j = 0 is available.
WeightFunction sharp_box();

/// Smooth plateau: 1 on [-1+delta, 1-delta], smooth step down to 0 at +-1.
/// Values only (j_max = 0); used to compare against the sharp cutoff.
WeightFunction plateau(double delta);

/// Look up a weight by config name: "bump", "box", "plateau:<delta>".
WeightFunction weight_by_name(const std::string& name);

/// w(x) = prod_i w_i(x_i).
class ProductWeight {
 public:
  ProductWeight() = default;
  explicit ProductWeight(std::vector<WeightFunction> factors);
  static ProductWeight uniform(const WeightFunction& w, std::size_t n);

  std::size_t dim() const { return factors_.size(); }
  const WeightFunction& factor(std::size_t i) const { return factors_[i]; }
  int j_max() const;

  double eval(std::span<const double> x) const;
  /// Mixed partial derivative d^beta w at x.
  double eval(std::span<const double> x, std::span<const int> beta) const;

 private:
  std::vector<WeightFunction> factors_;
};

/// L^p norm (p = 1 or p = infinity, encoded as p <= 0) of w^(j).
double derivative_norm(const WeightFunction& w, int j, double p);

inline constexpr double kInfNorm = 0.0;

/// S_{p,k}(w): sum over |beta| <= k of ||d^beta w||_p. Throws if k > j_max.
double sobolev_norm(const ProductWeight& w, double p, int k);
double sobolev_norm(const WeightFunction& w, double p, int k);

/// omega_delta(x, y) = omega(y + delta x) rho(x), rho the normalized standard bump.
/// Reconstruction: delta^{-1} int omega_delta((x - y)/delta, y) dy = omega(x).
class SplitKernel {
 public:
  SplitKernel(WeightFunction base, double delta);

  double delta() const { return delta_; }
  const WeightFunction& base() const { return base_; }
  /// Largest total derivative order available (bx + by <= max_order()).
  int max_order() const;

  /// d_x^bx d_y^by omega_delta(x, y).
  double omega_delta(double x, double y, int bx = 0, int by = 0) const;

  /// delta^{-1} int omega_delta((x - y)/delta, y) dy by quadrature.
  double reconstruct(double x) const;

  /// C(bx, by) with |d^beta omega_delta| <= C * S_{inf,|beta|}(omega): the
  /// explicit constant sum_i binom(bx,i) ||rho^(bx-i)||_inf, independent of delta.
  double derivative_constant(int bx, int by) const;

  /// One-dimensional window int_{-1/2}^{1/2} d^j/dx^j omega_delta(x - t, delta (y0 + t)) dt.
  double window_1d(std::int64_t y0, double x, int j = 0) const;

 private:
  WeightFunction base_;
  WeightFunction rho_;
  double delta_;
};

SplitKernel heath_brown_kernel(const WeightFunction& w, double delta);

/// W_{delta,y0}(x) = prod_i window_1d(y0_i, x_i).
double window_function(const SplitKernel& kernel, std::span<const std::int64_t> y0,
                       std::span<const double> x);
double window_derivative(const SplitKernel& kernel, std::span<const std::int64_t> y0,
                         std::span<const double> x, std::span<const int> beta);

/// Largest |y0_i| that can give a nonzero window: |y0| < (1+delta)/delta + 1/2.
std::int64_t window_index_bound(double delta);

/// sum over y0 of W_{delta,y0}((x - P delta y0)/(P delta)); equals w(x/P).
double window_partition(const SplitKernel& kernel, std::span<const double> x, double P);

}  // namespace quadric
