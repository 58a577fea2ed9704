#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace quadric {

using BigInt = boost::multiprecision::cpp_int;
using Complex = std::complex<double>;

// Error hierarchy. Every failure surfaced by the library derives from Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

/// A computation would exceed its configured work budget.
struct BudgetExceeded : Error {
  BudgetExceeded(const std::string& what, double required, double budget)
      : Error(what + ": requires ~" + std::to_string(required) + " steps, budget is " +
              std::to_string(budget)),
        required_work(required),
        budget_work(budget) {}
  double required_work;
  double budget_work;
};

struct ConvergenceError : Error {
  using Error::Error;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// e(theta) = exp(2 pi i theta), with theta reduced mod 1 before the trig call.
inline Complex expi(double theta) {
  double r = theta - std::floor(theta);
  return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

/// e_q(k) = exp(2 pi i k / q), reduced exactly in integers.
inline Complex expq(std::int64_t k, std::int64_t q) {
  std::int64_t r = k % q;
  if (r < 0) r += q;
  const double t = static_cast<double>(r) / static_cast<double>(q);
  return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
}

/// Neumaier-compensated accumulator for real sums.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Compensated accumulator for complex sums (componentwise Neumaier).
class ComplexAccumulator {
 public:
  void add(Complex z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  void add(const ComplexAccumulator& other) {
    re_.add(other.re_);
    im_.add(other.im_);
  }
  Complex value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

/// Distance from x to the nearest integer.
inline double dist_to_int(double x) { return std::abs(x - std::nearbyint(x)); }

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b != 0) {
    const std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::int64_t mod_pos(std::int64_t a, std::int64_t q) {
  std::int64_t r = a % q;
  return r < 0 ? r + q : r;
}

/// Largest integer strictly below P (the coordinate bound of the box |x| < P).
inline std::int64_t box_radius(double P) {
  return static_cast<std::int64_t>(std::ceil(P)) - 1;
}

}  // namespace quadric
