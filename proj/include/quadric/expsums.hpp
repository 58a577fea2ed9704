#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quadric/quadform.hpp"
#include "quadric/quotient.hpp"
#include "quadric/weights.hpp"

namespace quadric {

struct SumOptions {
  double work_budget = 2e9;
  bool parallel = true;
};

struct ExpSumValue {
  Complex value;
  std::int64_t terms = 0;
  double abs_sum = 0;  // sum of |w f| over the box, an upper bound for |value|
  double alpha = 0;
  double P = 0;
  std::string form;
  std::string observable;

  std::string to_json() const;
};

/// The data of S(alpha) = sum_x w(x/P) f(u(x) x0) e(alpha F(x)) with w and f
/// products over coordinates. Per-coordinate coefficients
/// c_i(k) = w_i(k/P) f_i(x0_i u(k)) are tabulated once for |k| < P.
class BoxSum {
 public:
  BoxSum(QuadraticForm F, ProductWeight w, std::vector<Observable> f, ProductPoint x0, double P,
         SumOptions opt = {});

  /// Same weight, observable and base point in every coordinate.
  static BoxSum uniform(const QuadraticForm& F, const WeightFunction& w, const Observable& f,
                        const QuotientPoint& x0, double P, SumOptions opt = {});

  const QuadraticForm& form() const { return F_; }
  std::size_t dim() const { return F_.dim(); }
  std::int64_t radius() const { return B_; }
  double P() const { return P_; }
  const ProductWeight& weight() const { return w_; }
  const std::vector<Observable>& observables() const { return f_; }
  const ProductPoint& base() const { return x0_; }
  const SumOptions& options() const { return opt_; }

  double coefficient(std::size_t i, std::int64_t k) const;
  double coefficient(std::span<const std::int64_t> x) const;
  double terms() const;

  /// S(alpha), parallel over the first coordinate with a fixed chunking, so
  /// the result is bit-identical for any thread count.
  ExpSumValue evaluate(double alpha) const;
  /// Plain serial loop over the box; the reference for evaluate().
  Complex evaluate_serial(double alpha) const;
  /// S(a/q) with phases reduced exactly in integers.
  Complex evaluate_rational(std::int64_t a, std::int64_t q) const;

  /// (m, A_m) with A_m = sum_{F(x) = m} c(x), sorted by m; zero groups dropped.
  std::vector<std::pair<std::int64_t, double>> grouped() const;
  /// S(alpha) = sum_m A_m e(alpha m) from grouped coefficients.
  static Complex evaluate_grouped(std::span<const std::pair<std::int64_t, double>> groups, double alpha);

  /// Walk the box calling fn(x, c(x)) for every point with c(x) != 0, in lexicographic order.
  void for_each(const std::function<void(std::span<const std::int64_t>, double)>& fn) const;

 private:
  QuadraticForm F_;
  ProductWeight w_;
  std::vector<Observable> f_;
  ProductPoint x0_;
  double P_;
  std::int64_t B_;
  SumOptions opt_;
  std::vector<std::vector<double>> table_;  // table_[i][k + B]
};

/// weighted_exp_sum(F, w, f, x0, P, alpha) in one call.
ExpSumValue weighted_exp_sum(const QuadraticForm& F, const WeightFunction& w, const Observable& f,
                             const QuotientPoint& x0, double P, double alpha, SumOptions opt = {});

/// e(alpha m) with the product alpha m split exactly before reduction mod 1.
Complex phase(double alpha, std::int64_t m);

/// S(alpha) recomputed through the window partition:
/// sum over y0 of sum over x of W_{delta,y0}((x - P delta y0)/(P delta)) f(u(x) x0) e(alpha F(x)).
/// The weight of s must be a product of the kernel's base weight.
Complex split_exp_sum(const BoxSum& s, const SplitKernel& kernel, double alpha);

/// S_q(a, v) = sum_{x mod q} e_q(a (F(x) + shift . x) + v . x).
/// Diagonal L factorizes into one-dimensional sums; otherwise the sum is
/// enumerated over the first n-1 coordinates with the last one tabulated
/// (BudgetExceeded when L is not diagonal and q^n > 1e8).
Complex gauss_sum(const QuadraticForm& F, std::int64_t q, std::int64_t a, std::span<const std::int64_t> v,
                  std::span<const std::int64_t> shift);
/// Every residue, one at a time. Reference for gauss_sum.
Complex gauss_sum_naive(const QuadraticForm& F, std::int64_t q, std::int64_t a, std::span<const std::int64_t> v,
                        std::span<const std::int64_t> shift);

struct GaussSample {
  std::int64_t q = 1, a = 0;
  std::vector<std::int64_t> v, shift;
  double abs = 0;
  double ratio = 0;         // |S| / q^(n/2)
  double kernel = 1;        // kernel_count(F, q)
  bool holds = true;        // ratio^2 <= kernel + 1e-9
  std::uint64_t v_hash() const;
};

struct CancellationReport {
  std::vector<GaussSample> samples;
  double max_ratio = 0;
  bool all_hold = true;
};

/// One sample at modulus q: a uniform unit, v uniform mod q, shift = 2N L y0
/// mod q for random N in [1, 5] and y0 in [-3, 3]^n.
GaussSample draw_gauss_sample(const QuadraticForm& F, std::int64_t q, std::mt19937_64& rng);

/// Largest q <= q_max that gauss_sum accepts for F.
std::int64_t gauss_q_cap(const QuadraticForm& F, std::int64_t q_max);

/// Random (q, a, v, shift) with q <= q_max, gcd(a, q) = 1, checked against the
/// exact inequality |S_q|^2 <= q^n kernel_count(F, q). q = 1 is always included.
CancellationReport cancellation_certificate(const QuadraticForm& F, std::int64_t q_max, std::size_t samples,
                                            std::uint64_t seed = 1);

inline constexpr int kMaxTaylorDegree = 40;

struct TaylorTerm {
  std::vector<int> beta;
  Complex c;
};

/// Coefficients of e(F(y)) = exp(2 pi i F(y)) up to total degree `degree`.
/// Only even degrees occur. Throws for degree > 40.
std::vector<TaylorTerm> taylor_coefficients(const QuadraticForm& F, int degree);

/// Coefficients of e(z F(y)) = sum c_beta z^(|beta|/2) y^beta (|beta| even,
/// so negative z is fine).
std::vector<TaylorTerm> taylor_split(const QuadraticForm& F, double z, int degree);

/// Truncation degree floor(k / eps), made even.
int taylor_degree(double k, double eps);

Complex taylor_eval(std::span<const TaylorTerm> terms, std::span<const double> y);

struct IntegralOptions {
  double max_nodes = 5e7;  // product-grid size for the direct path
};

/// I(z, v) = int W_{delta,y0}(t/N) f(u(t) x1) e(z F(t) - v . t) dt over R^n by a
/// product Gauss-Legendre grid. n <= 3.
Complex exp_integral(const SplitKernel& kernel, std::span<const std::int64_t> y0, const QuadraticForm& F,
                     const std::vector<Observable>& f, const ProductPoint& x1, double N, double z,
                     std::span<const double> v, const IntegralOptions& opt = {});

/// Same integral via the Taylor expansion of e(z F): each term is a product of
/// one-dimensional twisted integrals.
Complex exp_integral_taylor(const SplitKernel& kernel, std::span<const std::int64_t> y0, const QuadraticForm& F,
                            const std::vector<Observable>& f, const ProductPoint& x1, double N, double z,
                            std::span<const double> v, int degree);

struct PoissonResult {
  double lhs_abs = 0;
  double residual = 0;
  std::int64_t frequencies = 0;  // number of v used on the dual side
};

/// |sum_m g(qm + r) e(c(qm + r)) - q^{-1} sum_v ghat(v/q - c) e(rv/q)| with
/// ghat(xi) = int g(x) e(-x xi) dx by quadrature. g is supported in [lo, hi].
/// The dual sum runs outward until max(8, 2q) consecutive terms are negligible
/// (below 1e-13 (1 + int|g|)); more than 2e5 terms or 5e7 integrand
/// evaluations throws BudgetExceeded.
PoissonResult poisson_check(const std::function<double(double)>& g, double lo, double hi, std::int64_t q,
                            std::int64_t r, double c = 0.0);

struct L2Identity {
  double lhs = 0;  // sum_m |A_m|^2 = int_0^1 |S(z)|^2 dz
  double rhs = 0;  // sum over pairs with F(x) = F(x') of c(x) c(x')
};

L2Identity l2_identity(const BoxSum& s);

}  // namespace quadric
