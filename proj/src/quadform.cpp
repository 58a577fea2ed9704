#include "quadric/quadform.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include <boost/multiprecision/miller_rabin.hpp>
#include <json.hpp>

namespace quadric {

IntMatrix IntMatrix::identity(std::size_t size) {
  IntMatrix m(size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1;
  return m;
}

IntMatrix operator*(const IntMatrix& x, const IntMatrix& y) {
  if (x.n != y.n) throw DimensionMismatch("matrix product: size mismatch");
  IntMatrix r(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.n; ++k) {
      if (x(i, k) == 0) continue;
      for (std::size_t j = 0; j < x.n; ++j) r(i, j) += x(i, k) * y(k, j);
    }
  return r;
}

// Fraction-free Bareiss elimination.
BigInt determinant(const IntMatrix& m) {
  const std::size_t n = m.n;
  if (n == 0) return 1;
  IntMatrix a = m;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a(swap_row, k) == 0) ++swap_row;
      if (swap_row == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(swap_row, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      }
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

std::vector<BigInt> SmithDecomposition::invariants() const {
  std::vector<BigInt> d(D.n);
  for (std::size_t i = 0; i < D.n; ++i) d[i] = D(i, i);
  return d;
}

namespace {

// Working state for the Smith reduction. Invariant: M == S * A * T.
struct SmithState {
  IntMatrix S, A, T;
  std::size_t n;

  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < n; ++c) std::swap(A(i, c), A(j, c));
    for (std::size_t r = 0; r < n; ++r) std::swap(S(r, i), S(r, j));
  }
  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t r = 0; r < n; ++r) std::swap(A(r, i), A(r, j));
    for (std::size_t c = 0; c < n; ++c) std::swap(T(i, c), T(j, c));
  }
  // row_i += k * row_j
  void add_row(std::size_t i, std::size_t j, const BigInt& k) {
    for (std::size_t c = 0; c < n; ++c) A(i, c) += k * A(j, c);
    for (std::size_t r = 0; r < n; ++r) S(r, j) -= k * S(r, i);
  }
  // col_i += k * col_j
  void add_col(std::size_t i, std::size_t j, const BigInt& k) {
    for (std::size_t r = 0; r < n; ++r) A(r, i) += k * A(r, j);
    for (std::size_t c = 0; c < n; ++c) T(j, c) -= k * T(i, c);
  }
  void negate_row(std::size_t i) {
    for (std::size_t c = 0; c < n; ++c) A(i, c) = -A(i, c);
    for (std::size_t r = 0; r < n; ++r) S(r, i) = -S(r, i);
  }
};

}  // namespace

SmithDecomposition smith_normal_form(const IntMatrix& m) {
  const std::size_t n = m.n;
  SmithState st{IntMatrix::identity(n), m, IntMatrix::identity(n), n};
  for (std::size_t t = 0; t < n; ++t) {
    for (;;) {
      // Pivot: smallest |a_ij| != 0 over the active block, row-major ties.
      std::size_t pi = n, pj = n;
      BigInt best = 0;
      for (std::size_t i = t; i < n; ++i)
        for (std::size_t j = t; j < n; ++j) {
          const BigInt& v = st.A(i, j);
          if (v == 0) continue;
          BigInt av = abs(v);
          if (pi == n || av < best) {
            best = av;
            pi = i;
            pj = j;
          }
        }
      if (pi == n) break;  // remaining block is zero
      st.swap_rows(t, pi);
      st.swap_cols(t, pj);
      const BigInt piv = st.A(t, t);
      bool clean = true;
      for (std::size_t i = t + 1; i < n; ++i) {
        if (st.A(i, t) == 0) continue;
        BigInt q = st.A(i, t) / piv;  // truncating division
        if (q != 0) st.add_row(i, t, -q);
        if (st.A(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (st.A(t, j) == 0) continue;
        BigInt q = st.A(t, j) / piv;
        if (q != 0) st.add_col(j, t, -q);
        if (st.A(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      // Divisibility: fold an offending row into the pivot row and repeat.
      bool divides = true;
      for (std::size_t i = t + 1; i < n && divides; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (st.A(i, j) % piv != 0) {
            st.add_row(t, i, BigInt(1));
            divides = false;
            break;
          }
      if (divides) break;
    }
    if (st.A(t, t) < 0) st.negate_row(t);
  }
  return {std::move(st.S), std::move(st.A), std::move(st.T)};
}

// ---------------------------------------------------------------------------

QuadraticForm::QuadraticForm(std::size_t n, std::vector<std::int64_t> entries)
    : n_(n), L_(std::move(entries)) {
  if (n_ == 0) throw InvalidArgument("quadratic form: dimension must be positive");
  if (L_.size() != n_ * n_) throw DimensionMismatch("quadratic form: expected n*n entries");
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      const auto v = L_[i * n_ + j];
      if (v != L_[j * n_ + i]) throw InvalidArgument("quadratic form: matrix is not symmetric");
      if (v > kMaxEntry || v < -kMaxEntry)
        throw InvalidArgument("quadratic form: entry exceeds 1e6 in magnitude");
    }
  const IntMatrix L = as_matrix();
  det_ = determinant(L);
  if (det_ == 0) throw InvalidArgument("quadratic form: matrix is singular");
  IntMatrix twoL = L;
  for (auto& v : twoL.a) v *= 2;
  smith_ = smith_normal_form(twoL).invariants();
}

QuadraticForm QuadraticForm::diagonal(std::span<const std::int64_t> diag) {
  const std::size_t n = diag.size();
  std::vector<std::int64_t> e(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = diag[i];
  return QuadraticForm(n, std::move(e));
}

QuadraticForm QuadraticForm::diagonal(std::initializer_list<std::int64_t> diag) {
  return diagonal(std::span<const std::int64_t>(diag.begin(), diag.size()));
}

bool QuadraticForm::is_diagonal() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j && L_[i * n_ + j] != 0) return false;
  return true;
}

IntMatrix QuadraticForm::as_matrix() const {
  IntMatrix m(n_);
  for (std::size_t i = 0; i < n_ * n_; ++i) m.a[i] = L_[i];
  return m;
}

BigInt QuadraticForm::evaluate(std::span<const std::int64_t> x) const {
  if (x.size() != n_) throw DimensionMismatch("evaluate: vector length differs from form dimension");
  std::int64_t acc = 0;
  bool overflow = false;
  for (std::size_t i = 0; i < n_ && !overflow; ++i) {
    std::int64_t row = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      std::int64_t prod;
      if (__builtin_mul_overflow(L_[i * n_ + j], x[j], &prod) ||
          __builtin_add_overflow(row, prod, &row)) {
        overflow = true;
        break;
      }
    }
    std::int64_t term;
    if (overflow || __builtin_mul_overflow(x[i], row, &term) ||
        __builtin_add_overflow(acc, term, &acc))
      overflow = true;
  }
  if (!overflow) return acc;
  BigInt big = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    BigInt row = 0;
    for (std::size_t j = 0; j < n_; ++j) row += BigInt(L_[i * n_ + j]) * x[j];
    big += BigInt(x[i]) * row;
  }
  return big;
}

std::int64_t QuadraticForm::evaluate_i64(std::span<const std::int64_t> x) const {
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    std::int64_t row = 0;
    const std::int64_t* Li = &L_[i * n_];
    for (std::size_t j = 0; j < n_; ++j) row += Li[j] * x[j];
    acc += x[i] * row;
  }
  return acc;
}

std::string QuadraticForm::describe() const {
  std::ostringstream os;
  os << n_;
  for (std::size_t i = 0; i < n_; ++i) {
    os << (i == 0 ? ":" : ";");
    for (std::size_t j = 0; j < n_; ++j) os << (j ? "," : "") << L_[i * n_ + j];
  }
  return os.str();
}

QuadraticForm read_form(std::istream& in) {
  long long n = 0;
  if (!(in >> n) || n <= 0 || n > 64) throw InvalidArgument("form file: bad dimension line");
  const auto un = static_cast<std::size_t>(n);
  std::vector<std::int64_t> e(un * un);
  for (auto& v : e) {
    long long x;
    if (!(in >> x)) throw InvalidArgument("form file: expected n*n integer entries");
    v = x;
  }
  return QuadraticForm(un, std::move(e));
}

QuadraticForm read_form_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open form file '" + path + "'");
  return read_form(in);
}

BigInt kernel_count(const QuadraticForm& F, std::int64_t q) {
  if (q < 1) throw InvalidArgument("kernel_count: q must be positive");
  BigInt count = 1;
  const BigInt bq = q;
  for (const BigInt& d : F.smith()) count *= boost::multiprecision::gcd(bq, 2 * d);
  return count;
}

// ---------------------------------------------------------------------------
// Local solubility

namespace {

int valuation(BigInt v, std::int64_t p) {
  if (v == 0) return std::numeric_limits<int>::max();
  int k = 0;
  while (v % p == 0) {
    v /= p;
    ++k;
  }
  return k;
}

int valuation128(__int128 v, std::int64_t p, int cap) {
  if (v == 0) return cap;
  int k = 0;
  while (k < cap && v % p == 0) {
    v /= p;
    ++k;
  }
  return k;
}

}  // namespace

bool is_indefinite(const QuadraticForm& F) {
  const std::size_t n = F.dim();
  bool pos = true, neg = true;
  for (std::size_t k = 1; k <= n; ++k) {
    IntMatrix minor(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) minor(i, j) = F(i, j);
    const BigInt d = determinant(minor);
    if (d <= 0) pos = false;
    const BigInt signed_d = (k % 2 == 0) ? d : BigInt(-d);
    if (signed_d <= 0) neg = false;
  }
  return !pos && !neg;
}

std::vector<std::int64_t> default_primes(const QuadraticForm& F) {
  std::vector<std::int64_t> primes = {2, 3, 5, 7, 11, 13, 17, 19};
  BigInt m = abs(2 * F.det());
  for (std::int64_t p = 2; p <= 1'000'000 && m > 1; ++p) {
    if (m % p != 0) continue;
    primes.push_back(p);
    while (m % p == 0) m /= p;
  }
  if (m > 1) {
    if (!boost::multiprecision::miller_rabin_test(m, 25) ||
        m > BigInt(std::numeric_limits<std::int64_t>::max()))
      throw Error("default_primes: determinant has an unfactored cofactor " + m.str());
    primes.push_back(static_cast<std::int64_t>(m));
  }
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  return primes;
}

int default_depth(const QuadraticForm& F, std::int64_t p) {
  return 2 * valuation(2 * F.det(), p) + 3;
}

PrimeReport padic_search(const QuadraticForm& F, std::int64_t p, int depth, double budget) {
  if (p < 2) throw InvalidArgument("padic_search: p must be a prime >= 2");
  if (depth < 1) throw InvalidArgument("padic_search: depth must be >= 1");
  const std::size_t n = F.dim();
  PrimeReport rep;
  rep.prime = p;
  rep.depth = depth;

  // moduli beyond this would overflow the 128-bit evaluation
  constexpr std::int64_t kMaxModulus = 1'000'000'000'000LL;

  auto Fval = [&](const std::vector<std::int64_t>& x) {
    __int128 acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      __int128 row = 0;
      for (std::size_t j = 0; j < n; ++j) row += static_cast<__int128>(F(i, j)) * x[j];
      acc += row * x[i];
    }
    return acc;
  };
  // Hensel check at level j: min valuation e of 2Lx (mod p^j) with 2e+1 <= j.
  auto hensel_ok = [&](const std::vector<std::int64_t>& x, int level) {
    int e = level;
    for (std::size_t i = 0; i < n; ++i) {
      __int128 g = 0;
      for (std::size_t j = 0; j < n; ++j) g += static_cast<__int128>(2 * F(i, j)) * x[j];
      e = std::min(e, valuation128(g, p, level));
    }
    return e < level && 2 * e + 1 <= level;
  };

  double work = std::pow(static_cast<double>(p), static_cast<double>(n));
  if (work > budget) throw BudgetExceeded("padic_search: level-1 enumeration", work, budget);

  // Level 1: primitive zeros mod p.
  std::vector<std::vector<std::int64_t>> cand;
  std::vector<std::int64_t> x(n, 0);
  for (;;) {
    bool primitive = std::any_of(x.begin(), x.end(), [](auto v) { return v != 0; });
    if (primitive) {
      const __int128 v = Fval(x);
      if (v % p == 0) {
        if (hensel_ok(x, 1)) {
          rep.soluble = true;
          rep.status = PadicStatus::soluble;
          rep.certificate = "hensel";
          rep.witness = x;
          return rep;
        }
        cand.push_back(x);
      }
    }
    std::size_t i = 0;
    while (i < n && ++x[i] == p) x[i++] = 0;
    if (i == n) break;
  }

  std::int64_t pj = p;
  for (int level = 1;; ++level) {
    if (cand.empty()) {
      rep.soluble = false;
      rep.status = PadicStatus::insoluble;
      rep.certificate = "no-primitive-zero";
      rep.depth = level;
      return rep;
    }
    if (level == depth) break;
    const double step_work = static_cast<double>(cand.size()) * work;
    if (step_work > budget) break;  // inconclusive under budget
    if (pj > kMaxModulus / p) break;
    std::vector<std::vector<std::int64_t>> next;
    std::vector<std::int64_t> t(n, 0);
    const std::int64_t pnext = pj * p;
    for (const auto& base : cand) {
      std::fill(t.begin(), t.end(), 0);
      for (;;) {
        std::vector<std::int64_t> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = base[i] + pj * t[i];
        if (Fval(y) % pnext == 0) {
          if (hensel_ok(y, level + 1)) {
            rep.soluble = true;
            rep.status = PadicStatus::soluble;
            rep.certificate = "hensel";
            rep.witness = y;
            return rep;
          }
          next.push_back(std::move(y));
        }
        std::size_t i = 0;
        while (i < n && ++t[i] == p) t[i++] = 0;
        if (i == n) break;
      }
    }
    cand = std::move(next);
    pj = pnext;
  }
  rep.soluble = false;
  rep.status = PadicStatus::inconclusive;
  rep.certificate = "inconclusive";
  return rep;
}

LocalSolubilityReport local_solubility(const QuadraticForm& F, std::span<const std::int64_t> primes,
                                       std::optional<int> depth) {
  if (primes.empty()) throw InvalidArgument("local_solubility: prime list is empty");
  if (depth && *depth < 1) throw InvalidArgument("local_solubility: depth must be >= 1");
  LocalSolubilityReport rep;
  rep.n = F.dim();
  rep.real_soluble = is_indefinite(F);
  for (std::int64_t p : primes) {
    const int k = depth.value_or(default_depth(F, p));
    PrimeReport pr;
    if (F.dim() >= 5) {
      pr.prime = p;
      pr.depth = k;
      pr.soluble = true;
      pr.status = PadicStatus::soluble;
      pr.certificate = "n>=5";
    } else {
      try {
        pr = padic_search(F, p, k);
      } catch (const BudgetExceeded& e) {
        throw Inconclusive(p, std::string("local_solubility: p=") + std::to_string(p) + ": " + e.what());
      }
      if (pr.status == PadicStatus::inconclusive)
        throw Inconclusive(p, "local_solubility: inconclusive at p=" + std::to_string(p) +
                                  " depth " + std::to_string(k));
    }
    rep.p_reports.push_back(std::move(pr));
  }
  rep.globally_unobstructed =
      rep.real_soluble && std::all_of(rep.p_reports.begin(), rep.p_reports.end(),
                                      [](const PrimeReport& r) { return r.soluble; });
  return rep;
}

LocalSolubilityReport local_solubility(const QuadraticForm& F) {
  const auto primes = default_primes(F);
  return local_solubility(F, primes);
}

namespace {

nlohmann::json big_to_json(const BigInt& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return static_cast<std::int64_t>(v);
  return v.str();
}

}  // namespace

std::string form_report_json(const QuadraticForm& F, const LocalSolubilityReport& rep) {
  nlohmann::json j;
  j["n"] = F.dim();
  j["det"] = big_to_json(F.det());
  nlohmann::json smith = nlohmann::json::array();
  for (const auto& d : F.smith()) smith.push_back(big_to_json(d));
  j["smith"] = smith;
  j["real_soluble"] = rep.real_soluble;
  nlohmann::json prs = nlohmann::json::array();
  for (const auto& pr : rep.p_reports) {
    prs.push_back({{"prime", pr.prime},
                   {"soluble", pr.soluble},
                   {"depth", pr.depth},
                   {"certificate", pr.certificate}});
  }
  j["p_reports"] = prs;
  j["globally_unobstructed"] = rep.globally_unobstructed;
  return j.dump();
}

}  // namespace quadric
