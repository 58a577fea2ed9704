#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadric/common.hpp"

namespace quadric {

/// Square integer matrix, row-major, with arbitrary-precision entries.
struct IntMatrix {
  std::size_t n = 0;
  std::vector<BigInt> a;

  IntMatrix() = default;
  explicit IntMatrix(std::size_t size) : n(size), a(size * size) {}
  static IntMatrix identity(std::size_t size);

  BigInt& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  friend IntMatrix operator*(const IntMatrix& x, const IntMatrix& y);
  friend bool operator==(const IntMatrix& x, const IntMatrix& y) = default;
};

BigInt determinant(const IntMatrix& m);

/// M = S * D * T with S, T unimodular and D diagonal with d1 | d2 | ... | dn.
struct SmithDecomposition {
  IntMatrix S;
  IntMatrix D;
  IntMatrix T;
  std::vector<BigInt> invariants() const;
};

/// Deterministic Smith normal form. Pivot: smallest nonzero magnitude in the
/// active block, ties broken in row-major order.
SmithDecomposition smith_normal_form(const IntMatrix& m);

/// Integral quadratic form F(x) = x^T L x with L symmetric and non-singular.
class QuadraticForm {
 public:
  static constexpr std::int64_t kMaxEntry = 1'000'000;

  /// Throws InvalidArgument unless L is square, symmetric, bounded and non-singular.
  QuadraticForm(std::size_t n, std::vector<std::int64_t> entries);

  static QuadraticForm diagonal(std::span<const std::int64_t> diag);
  static QuadraticForm diagonal(std::initializer_list<std::int64_t> diag);

  std::size_t dim() const { return n_; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return L_[i * n_ + j]; }
  std::span<const std::int64_t> entries() const { return L_; }
  bool is_diagonal() const;
  const BigInt& det() const { return det_; }
  /// Invariant factors of 2L.
  const std::vector<BigInt>& smith() const { return smith_; }
  IntMatrix as_matrix() const;

  /// x^T L x, exact. Uses checked 64-bit arithmetic and promotes on overflow.
  BigInt evaluate(std::span<const std::int64_t> x) const;
  /// Fast path for callers that have bounded |x| so the value fits in 64 bits.
  std::int64_t evaluate_i64(std::span<const std::int64_t> x) const;

  std::string describe() const;

 private:
  std::size_t n_;
  std::vector<std::int64_t> L_;
  BigInt det_;
  std::vector<BigInt> smith_;
};

/// Parse "n" followed by n rows of n integers.
QuadraticForm read_form(std::istream& in);
QuadraticForm read_form_file(const std::string& path);

/// #{x mod q : 2(2L) x = 0 mod q} = prod_i gcd(q, d_i), d_i the invariants of 4L.
BigInt kernel_count(const QuadraticForm& F, std::int64_t q);

enum class PadicStatus { soluble, insoluble, inconclusive };

struct PrimeReport {
  std::int64_t prime = 0;
  bool soluble = false;
  int depth = 0;
  PadicStatus status = PadicStatus::inconclusive;
  /// "n>=5", "hensel", "no-primitive-zero" or "inconclusive".
  std::string certificate;
  std::vector<std::int64_t> witness;  // primitive zero mod p^k that lifts, when found
};

struct LocalSolubilityReport {
  std::size_t n = 0;
  bool real_soluble = false;
  std::vector<PrimeReport> p_reports;
  bool globally_unobstructed = false;
};

/// Primes dividing 2 det(L) (trial division, probable-prime cofactor) plus all p <= 20.
std::vector<std::int64_t> default_primes(const QuadraticForm& F);

/// Default Hensel depth 2 v_p(2 det) + 3.
int default_depth(const QuadraticForm& F, std::int64_t p);

/// Level-by-level search for a primitive zero mod p^k satisfying the Hensel
/// condition v_p(F(x)) > 2 v_p(grad F(x)). An empty candidate set at any level
/// certifies insolubility over Q_p.
PrimeReport padic_search(const QuadraticForm& F, std::int64_t p, int depth,
                         double budget = 5e7);

struct Inconclusive : Error {
  Inconclusive(std::int64_t p, const std::string& what) : Error(what), prime(p) {}
  std::int64_t prime;
};

/// Real and p-adic solubility. For n >= 5 every prime is reported soluble
/// (isotropy of non-degenerate forms in five or more variables over Q_p);
/// otherwise padic_search decides. Throws Inconclusive when the search
/// neither finds a liftable zero nor rules one out.
LocalSolubilityReport local_solubility(const QuadraticForm& F, std::span<const std::int64_t> primes,
                                       std::optional<int> depth = std::nullopt);
LocalSolubilityReport local_solubility(const QuadraticForm& F);

/// True iff L has eigenvalues of both signs (Sylvester's criterion, exact).
bool is_indefinite(const QuadraticForm& F);

/// JSON object {n, det, smith, real_soluble, p_reports}.
std::string form_report_json(const QuadraticForm& F, const LocalSolubilityReport& rep);

}  // namespace quadric
