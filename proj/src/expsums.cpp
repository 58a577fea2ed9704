#include "quadric/expsums.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "quadric/quadrature.hpp"

namespace quadric {

namespace {

double ipow(double b, std::size_t e) {
  double r = 1;
  while (e--) r *= b;
  return r;
}

// (a * b) mod q for 0 <= a, b < q
std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t q) {
  return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % q);
}

// cos/sin of 2 pi k / q for k in [0, q)
struct RootTable {
  explicit RootTable(std::int64_t q) : q(q), z(static_cast<std::size_t>(q)) {
    for (std::int64_t k = 0; k < q; ++k) z[static_cast<std::size_t>(k)] = expq(k, q);
  }
  Complex operator()(std::int64_t k) const { return z[static_cast<std::size_t>(mod_pos(k, q))]; }
  std::int64_t q;
  std::vector<Complex> z;
};

// Advance x lexicographically inside [lo, hi]^n from position `from`; false when done.
bool odometer(std::vector<std::int64_t>& x, std::size_t from, std::int64_t lo, std::int64_t hi) {
  for (std::size_t k = x.size(); k-- > from;) {
    if (x[k] < hi) {
      ++x[k];
      return true;
    }
    x[k] = lo;
  }
  return false;
}

}  // namespace

Complex phase(double alpha, std::int64_t m) {
  const double md = static_cast<double>(m);
  const double p = alpha * md;
  const double err = std::fma(alpha, md, -p);
  return expi((p - std::floor(p)) + err);
}

std::string ExpSumValue::to_json() const {
  nlohmann::json j;
  j["value"] = {{"re", value.real()}, {"im", value.imag()}};
  j["abs"] = std::abs(value);
  j["terms"] = terms;
  j["abs_sum"] = abs_sum;
  j["params"] = {{"alpha", alpha}, {"P", P}, {"form", form}, {"observable", observable}};
  return j.dump(2);
}

BoxSum::BoxSum(QuadraticForm F, ProductWeight w, std::vector<Observable> f, ProductPoint x0, double P,
               SumOptions opt)
    : F_(std::move(F)), w_(std::move(w)), f_(std::move(f)), x0_(std::move(x0)), P_(P), opt_(opt) {
  const std::size_t n = F_.dim();
  if (w_.dim() != n || f_.size() != n || x0_.size() != n)
    throw DimensionMismatch("exp sum: weight, observables and base points must have one entry per variable");
  if (!(P >= 1)) throw InvalidArgument("exp sum: P must be >= 1");
  B_ = box_radius(P);
  const double work = terms();
  if (work > opt_.work_budget) throw BudgetExceeded("exp sum over the box", work, opt_.work_budget);
  std::int64_t lmax = 0;
  for (auto v : F_.entries()) lmax = std::max(lmax, std::abs(v));
  if (static_cast<double>(n * n) * static_cast<double>(lmax) * static_cast<double>(B_) * static_cast<double>(B_) > 9e18)
    throw InvalidArgument("exp sum: F values would overflow 64 bits");
  table_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto orbit = orbit_table(f_[i], x0_[i], B_, opt_.parallel);
    table_[i].resize(orbit.size());
    for (std::int64_t k = -B_; k <= B_; ++k) {
      const auto idx = static_cast<std::size_t>(k + B_);
      const double wv = w_.factor(i)(static_cast<double>(k) / P_);
      table_[i][idx] = wv == 0.0 ? 0.0 : wv * orbit[idx];
    }
  }
}

BoxSum BoxSum::uniform(const QuadraticForm& F, const WeightFunction& w, const Observable& f, const QuotientPoint& x0,
                       double P, SumOptions opt) {
  const std::size_t n = F.dim();
  return BoxSum(F, ProductWeight::uniform(w, n), std::vector<Observable>(n, f), ProductPoint(n, x0), P, opt);
}

double BoxSum::coefficient(std::size_t i, std::int64_t k) const {
  if (k < -B_ || k > B_) return 0.0;
  return table_[i][static_cast<std::size_t>(k + B_)];
}

double BoxSum::coefficient(std::span<const std::int64_t> x) const {
  if (x.size() != dim()) throw DimensionMismatch("exp sum: point has wrong dimension");
  double c = 1;
  for (std::size_t i = 0; i < x.size() && c != 0.0; ++i) c *= coefficient(i, x[i]);
  return c;
}

double BoxSum::terms() const { return ipow(static_cast<double>(2 * B_ + 1), dim()); }

void BoxSum::for_each(const std::function<void(std::span<const std::int64_t>, double)>& fn) const {
  const std::size_t n = dim();
  std::vector<std::int64_t> x(n, -B_);
  do {
    const double c = coefficient(x);
    if (c != 0.0) fn(x, c);
  } while (odometer(x, 0, -B_, B_));
}

ExpSumValue BoxSum::evaluate(double alpha) const {
  const std::size_t n = dim();
  const std::int64_t B = B_;
  const auto chunks = static_cast<std::ptrdiff_t>(2 * B + 1);
  std::vector<ComplexAccumulator> part(static_cast<std::size_t>(chunks));
  std::vector<CompensatedSum> abspart(static_cast<std::size_t>(chunks));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(chunks), 0);
#pragma omp parallel for schedule(dynamic) if (opt_.parallel)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    std::vector<std::int64_t> x(n, -B);
    x[0] = static_cast<std::int64_t>(c) - B;
    const double head = coefficient(0, x[0]);
    if (head == 0.0) continue;
    auto& acc = part[static_cast<std::size_t>(c)];
    auto& abs_acc = abspart[static_cast<std::size_t>(c)];
    do {
      double coef = head;
      for (std::size_t i = 1; i < n && coef != 0.0; ++i) coef *= coefficient(i, x[i]);
      if (coef == 0.0) continue;
      acc.add(coef * phase(alpha, F_.evaluate_i64(x)));
      abs_acc.add(std::abs(coef));
      ++counts[static_cast<std::size_t>(c)];
    } while (odometer(x, 1, -B, B));
  }
  ComplexAccumulator total;
  CompensatedSum abs_total;
  ExpSumValue out;
  for (std::size_t c = 0; c < part.size(); ++c) {
    total.add(part[c]);
    abs_total.add(abspart[c]);
    out.terms += counts[c];
  }
  out.value = total.value();
  out.abs_sum = abs_total.value();
  out.alpha = alpha;
  out.P = P_;
  out.form = F_.describe();
  out.observable = f_.empty() ? "" : f_[0].name();
  return out;
}

Complex BoxSum::evaluate_serial(double alpha) const {
  const std::size_t n = dim();
  std::vector<std::int64_t> x(n, -B_);
  Complex total{};
  do {
    double coef = 1;
    for (std::size_t i = 0; i < n; ++i) coef *= table_[i][static_cast<std::size_t>(x[i] + B_)];
    const double ph = alpha * static_cast<double>(F_.evaluate_i64(x));
    total += coef * std::polar(1.0, kTwoPi * (ph - std::floor(ph)));
  } while (odometer(x, 0, -B_, B_));
  return total;
}

Complex BoxSum::evaluate_rational(std::int64_t a, std::int64_t q) const {
  if (q < 1) throw InvalidArgument("evaluate_rational: q must be >= 1");
  const RootTable root(q);
  ComplexAccumulator acc;
  const std::int64_t am = mod_pos(a, q);
  for_each([&](std::span<const std::int64_t> x, double c) {
    acc.add(c * root(mulmod(am, mod_pos(F_.evaluate_i64(x), q), q)));
  });
  return acc.value();
}

std::vector<std::pair<std::int64_t, double>> BoxSum::grouped() const {
  std::vector<std::pair<std::int64_t, double>> raw;
  for_each([&](std::span<const std::int64_t> x, double c) { raw.emplace_back(F_.evaluate_i64(x), c); });
  std::stable_sort(raw.begin(), raw.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<std::pair<std::int64_t, double>> out;
  for (std::size_t i = 0; i < raw.size();) {
    CompensatedSum s;
    std::size_t j = i;
    for (; j < raw.size() && raw[j].first == raw[i].first; ++j) s.add(raw[j].second);
    if (s.value() != 0.0) out.emplace_back(raw[i].first, s.value());
    i = j;
  }
  return out;
}

Complex BoxSum::evaluate_grouped(std::span<const std::pair<std::int64_t, double>> groups, double alpha) {
  ComplexAccumulator acc;
  for (const auto& [m, A] : groups) acc.add(A * phase(alpha, m));
  return acc.value();
}

ExpSumValue weighted_exp_sum(const QuadraticForm& F, const WeightFunction& w, const Observable& f,
                             const QuotientPoint& x0, double P, double alpha, SumOptions opt) {
  return BoxSum::uniform(F, w, f, x0, P, opt).evaluate(alpha);
}

Complex split_exp_sum(const BoxSum& s, const SplitKernel& kernel, double alpha) {
  const std::size_t n = s.dim();
  for (std::size_t i = 0; i < n; ++i)
    if (s.weight().factor(i).name() != kernel.base().name())
      throw InvalidArgument("split_exp_sum: sum weight must be the kernel's base weight");
  const std::int64_t B = s.radius(), Y = window_index_bound(kernel.delta());
  const double scale = s.P() * kernel.delta();
  // orbit values f_i(x0_i u(k)) and windows T_i[y0][k]
  std::vector<std::vector<double>> orbit(n);
  for (std::size_t i = 0; i < n; ++i) orbit[i] = orbit_table(s.observables()[i], s.base()[i], B, s.options().parallel);
  const auto width = static_cast<std::size_t>(2 * B + 1);
  std::vector<std::vector<double>> window(static_cast<std::size_t>(2 * Y + 1), std::vector<double>(width));
  std::vector<std::pair<std::int64_t, std::int64_t>> range(static_cast<std::size_t>(2 * Y + 1), {1, 0});
  for (std::int64_t y = -Y; y <= Y; ++y) {
    auto& row = window[static_cast<std::size_t>(y + Y)];
    auto& rg = range[static_cast<std::size_t>(y + Y)];
    for (std::int64_t k = -B; k <= B; ++k) {
      const double v = kernel.window_1d(y, static_cast<double>(k) / scale - static_cast<double>(y));
      row[static_cast<std::size_t>(k + B)] = v;
      if (v != 0.0) {
        if (rg.first > rg.second) rg.first = k;
        rg.second = k;
      }
    }
  }
  ComplexAccumulator total;
  std::vector<std::int64_t> y0(n, -Y);
  do {
    bool empty = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rg = range[static_cast<std::size_t>(y0[i] + Y)];
      empty = empty || rg.first > rg.second;
    }
    if (empty) continue;
    ComplexAccumulator part;
    std::vector<std::int64_t> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = range[static_cast<std::size_t>(y0[i] + Y)].first;
    for (;;) {
      double c = 1;
      for (std::size_t i = 0; i < n && c != 0.0; ++i)
        c *= window[static_cast<std::size_t>(y0[i] + Y)][static_cast<std::size_t>(x[i] + B)] *
             orbit[i][static_cast<std::size_t>(x[i] + B)];
      if (c != 0.0) part.add(c * phase(alpha, s.form().evaluate_i64(x)));
      std::size_t k = n;
      while (k-- > 0) {
        const auto& rg = range[static_cast<std::size_t>(y0[k] + Y)];
        if (x[k] < rg.second) {
          ++x[k];
          break;
        }
        x[k] = rg.first;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
    total.add(part);
  } while (odometer(y0, 0, -Y, Y));
  return total.value();
}

// ---------------------------------------------------------------- Gauss sums

namespace {

void check_gauss_args(const QuadraticForm& F, std::int64_t q, std::int64_t a, std::span<const std::int64_t> v,
                      std::span<const std::int64_t> shift) {
  if (q < 1) throw InvalidArgument("gauss_sum: q must be >= 1");
  if (gcd64(a, q) != 1) throw InvalidArgument("gauss_sum: gcd(a, q) must be 1");
  if (v.size() != F.dim() || shift.size() != F.dim()) throw DimensionMismatch("gauss_sum: v and shift need n entries");
}

// a (F(x) + shift . x) + v . x mod q, computed exactly
std::int64_t gauss_phase(const QuadraticForm& F, std::int64_t q, std::int64_t a, std::span<const std::int64_t> v,
                         std::span<const std::int64_t> shift, std::span<const std::int64_t> x) {
  const std::size_t n = F.dim();
  std::int64_t quad = 0, lin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t row = 0;
    for (std::size_t j = 0; j < n; ++j) row = (row + mulmod(mod_pos(F(i, j), q), x[j], q)) % q;
    quad = (quad + mulmod(row, x[i], q)) % q;
    lin = (lin + mulmod(mod_pos(shift[i], q), x[i], q)) % q;
  }
  const std::int64_t av = mulmod(mod_pos(a, q), (quad + lin) % q, q);
  std::int64_t vx = 0;
  for (std::size_t i = 0; i < n; ++i) vx = (vx + mulmod(mod_pos(v[i], q), x[i], q)) % q;
  return (av + vx) % q;
}

}  // namespace

Complex gauss_sum_naive(const QuadraticForm& F, std::int64_t q, std::int64_t a, std::span<const std::int64_t> v,
                        std::span<const std::int64_t> shift) {
  check_gauss_args(F, q, a, v, shift);
  const double work = ipow(static_cast<double>(q), F.dim());
  if (work > 1e8) throw BudgetExceeded("gauss_sum_naive", work, 1e8);
  const RootTable root(q);
  ComplexAccumulator acc;
  std::vector<std::int64_t> x(F.dim(), 0);
  do {
    acc.add(root(gauss_phase(F, q, a, v, shift, x)));
  } while (odometer(x, 0, 0, q - 1));
  return acc.value();
}

Complex gauss_sum(const QuadraticForm& F, std::int64_t q, std::int64_t a, std::span<const std::int64_t> v,
                  std::span<const std::int64_t> shift) {
  check_gauss_args(F, q, a, v, shift);
  const std::size_t n = F.dim();
  if (q == 1) return {1.0, 0.0};
  const RootTable root(q);
  const std::int64_t am = mod_pos(a, q);
  if (F.is_diagonal()) {
    Complex prod{1.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t lq = mulmod(am, mod_pos(F(i, i), q), q);
      const std::int64_t bq = (mulmod(am, mod_pos(shift[i], q), q) + mod_pos(v[i], q)) % q;
      ComplexAccumulator acc;
      for (std::int64_t t = 0; t < q; ++t) acc.add(root((mulmod(lq, mulmod(t, t, q), q) + mulmod(bq, t, q)) % q));
      prod *= acc.value();
    }
    return prod;
  }
  const double work = ipow(static_cast<double>(q), n);
  if (work > 1e8) throw BudgetExceeded("gauss_sum: non-diagonal form", work, 1e8);
  // Sum over the last coordinate depends on the prefix only through the linear
  // coefficient beta, so tabulate G[beta] = sum_t e_q(beta t + a L_nn t^2).
  const std::size_t last = n - 1;
  const std::int64_t lnn = mulmod(am, mod_pos(F(last, last), q), q);
  std::vector<Complex> G(static_cast<std::size_t>(q));
  for (std::int64_t beta = 0; beta < q; ++beta) {
    ComplexAccumulator acc;
    for (std::int64_t t = 0; t < q; ++t) acc.add(root((mulmod(beta, t, q) + mulmod(lnn, mulmod(t, t, q), q)) % q));
    G[static_cast<std::size_t>(beta)] = acc.value();
  }
  ComplexAccumulator total;
  std::vector<std::int64_t> x(n, 0);  // x[last] stays 0
  for (;;) {
    const std::int64_t ph = gauss_phase(F, q, a, v, shift, x);
    std::int64_t cross = 0;
    for (std::size_t j = 0; j < last; ++j) cross = (cross + mulmod(mod_pos(F(last, j), q), x[j], q)) % q;
    const std::int64_t beta =
        (mulmod(am, (2 * cross + mod_pos(shift[last], q)) % q, q) + mod_pos(v[last], q)) % q;
    total.add(root(ph) * G[static_cast<std::size_t>(beta)]);
    std::size_t k = last;
    while (k-- > 0) {
      if (x[k] < q - 1) {
        ++x[k];
        break;
      }
      x[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return total.value();
}

std::uint64_t GaussSample::v_hash() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over v then shift
  auto mix = [&](std::int64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>(x >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (auto x : v) mix(x);
  for (auto x : shift) mix(x);
  return h;
}

std::int64_t gauss_q_cap(const QuadraticForm& F, std::int64_t q_max) {
  std::int64_t q_cap = q_max;
  if (!F.is_diagonal())
    while (q_cap > 1 && ipow(static_cast<double>(q_cap), F.dim()) > 1e8) --q_cap;
  return q_cap;
}

GaussSample draw_gauss_sample(const QuadraticForm& F, std::int64_t q, std::mt19937_64& rng) {
  if (q < 1) throw InvalidArgument("draw_gauss_sample: q must be >= 1");
  const std::size_t n = F.dim();
  auto uni = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  GaussSample g;
  g.q = q;
  do g.a = uni(0, q - 1);
  while (gcd64(g.a, q) != 1);
  g.v.resize(n);
  g.shift.resize(n);
  const std::int64_t N = uni(1, 5);
  std::vector<std::int64_t> y0(n);
  for (auto& y : y0) y = uni(-3, 3);
  for (std::size_t i = 0; i < n; ++i) {
    g.v[i] = uni(0, q - 1);
    std::int64_t ly = 0;
    for (std::size_t j = 0; j < n; ++j) ly += F(i, j) * y0[j];
    g.shift[i] = mod_pos(2 * N * ly, q);
  }
  const Complex S = gauss_sum(F, q, g.a, g.v, g.shift);
  g.abs = std::abs(S);
  g.ratio = g.abs / std::pow(static_cast<double>(q), static_cast<double>(n) / 2.0);
  g.kernel = kernel_count(F, q).convert_to<double>();
  g.holds = g.ratio * g.ratio <= g.kernel + 1e-9;
  return g;
}

CancellationReport cancellation_certificate(const QuadraticForm& F, std::int64_t q_max, std::size_t samples,
                                            std::uint64_t seed) {
  if (q_max < 1) throw InvalidArgument("cancellation_certificate: q_max must be >= 1");
  const std::int64_t q_cap = gauss_q_cap(F, q_max);
  std::mt19937_64 rng(seed);
  CancellationReport rep;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::int64_t q = s == 0 ? 1 : std::uniform_int_distribution<std::int64_t>(1, q_cap)(rng);
    auto g = draw_gauss_sample(F, q, rng);
    rep.max_ratio = std::max(rep.max_ratio, g.ratio);
    rep.all_hold = rep.all_hold && g.holds;
    rep.samples.push_back(std::move(g));
  }
  return rep;
}

// ---------------------------------------------------------------- Taylor

namespace {

using Poly = std::map<std::vector<int>, Complex>;

Poly poly_mul(const Poly& a, const Poly& b, int max_degree) {
  Poly r;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(ea.size());
      int deg = 0;
      for (std::size_t i = 0; i < e.size(); ++i) deg += (e[i] = ea[i] + eb[i]);
      if (deg <= max_degree) r[e] += ca * cb;
    }
  return r;
}

}  // namespace

std::vector<TaylorTerm> taylor_coefficients(const QuadraticForm& F, int degree) {
  if (degree < 0 || degree > kMaxTaylorDegree) throw InvalidArgument("taylor: degree must lie in [0, 40]");
  const std::size_t n = F.dim();
  Poly twopi_iF;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (F(i, j) == 0) continue;
      std::vector<int> e(n, 0);
      ++e[i];
      ++e[j];
      const double c = static_cast<double>(F(i, j)) * (i == j ? 1.0 : 2.0);
      twopi_iF[e] += Complex(0.0, kTwoPi * c);
    }
  Poly sum, term;
  term[std::vector<int>(n, 0)] = 1.0;
  sum = term;
  for (int k = 1; 2 * k <= degree; ++k) {
    term = poly_mul(term, twopi_iF, degree);
    for (auto& [e, c] : term) c /= static_cast<double>(k);
    for (const auto& [e, c] : term) sum[e] += c;
  }
  std::vector<TaylorTerm> out;
  for (const auto& [e, c] : sum)
    if (c != Complex{}) out.push_back({e, c});
  return out;
}

std::vector<TaylorTerm> taylor_split(const QuadraticForm& F, double z, int degree) {
  auto terms = taylor_coefficients(F, degree);
  for (auto& t : terms) {
    const int half = std::accumulate(t.beta.begin(), t.beta.end(), 0) / 2;
    t.c *= std::pow(z, half);
  }
  return terms;
}

int taylor_degree(double k, double eps) {
  if (!(k > 0) || !(eps > 0)) throw InvalidArgument("taylor_degree: k and eps must be positive");
  int d = static_cast<int>(std::floor(k / eps));
  if (d % 2) --d;
  if (d > kMaxTaylorDegree) throw InvalidArgument("taylor: degree overflow (> 40)");
  return d;
}

Complex taylor_eval(std::span<const TaylorTerm> terms, std::span<const double> y) {
  ComplexAccumulator acc;
  for (const auto& t : terms) {
    double mono = 1;
    for (std::size_t i = 0; i < y.size(); ++i) mono *= std::pow(y[i], t.beta[i]);
    acc.add(t.c * mono);
  }
  return acc.value();
}

// ---------------------------------------------------------------- integrals

namespace {

struct Nodes {
  std::vector<double> t, w;
};

Nodes gl_nodes(double lo, double hi, double panel) {
  Nodes out;
  const auto& rule = gauss_legendre(kDefaultNodes);
  const auto panels = static_cast<long>(std::max(1.0, std::ceil((hi - lo) / panel)));
  const double h = (hi - lo) / static_cast<double>(panels);
  for (long p = 0; p < panels; ++p) {
    const double mid = lo + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      out.t.push_back(mid + 0.5 * h * rule.nodes[k]);
      out.w.push_back(0.5 * h * rule.weights[k]);
    }
  }
  return out;
}

void check_integral_args(std::span<const std::int64_t> y0, const QuadraticForm& F, const std::vector<Observable>& f,
                         const ProductPoint& x1, std::span<const double> v, double N) {
  const std::size_t n = F.dim();
  if (y0.size() != n || f.size() != n || x1.size() != n || v.size() != n)
    throw DimensionMismatch("exp_integral: all per-coordinate inputs need n entries");
  if (!(N > 0)) throw InvalidArgument("exp_integral: N must be positive");
}

}  // namespace

Complex exp_integral(const SplitKernel& kernel, std::span<const std::int64_t> y0, const QuadraticForm& F,
                     const std::vector<Observable>& f, const ProductPoint& x1, double N, double z,
                     std::span<const double> v, const IntegralOptions& opt) {
  check_integral_args(y0, F, f, x1, v, N);
  const std::size_t n = F.dim();
  if (n > 3) throw InvalidArgument("exp_integral: direct quadrature needs n <= 3");
  std::int64_t lmax = 0;
  for (auto e : F.entries()) lmax = std::max(lmax, std::abs(e));
  // largest local frequency of the phase on the support |t| < 1.5 N
  const double zfreq = 2.0 * std::abs(z) * static_cast<double>(lmax) * static_cast<double>(n) * 1.5 * N;
  std::vector<Nodes> nodes(n);
  std::vector<std::vector<double>> amp(n);
  double total_nodes = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double panel = std::min({0.25, N / 8.0, 1.0 / (2.0 * (1.0 + std::abs(v[i]) + zfreq))});
    nodes[i] = gl_nodes(-1.5 * N, 1.5 * N, panel);
    total_nodes *= static_cast<double>(nodes[i].t.size());
  }
  if (total_nodes > opt.max_nodes) throw BudgetExceeded("exp_integral: quadrature grid", total_nodes, opt.max_nodes);
  for (std::size_t i = 0; i < n; ++i) {
    amp[i].resize(nodes[i].t.size());
    for (std::size_t k = 0; k < nodes[i].t.size(); ++k) {
      const double t = nodes[i].t[k];
      const double W = kernel.window_1d(y0[i], t / N);
      amp[i][k] = W == 0.0 ? 0.0 : nodes[i].w[k] * W * f[i](horocycle(x1[i], t));
    }
  }
  ComplexAccumulator acc;
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> t(n);
  for (;;) {
    double a = 1;
    for (std::size_t i = 0; i < n && a != 0.0; ++i) a *= amp[i][idx[i]];
    if (a != 0.0) {
      double quad = 0, lin = 0;
      for (std::size_t i = 0; i < n; ++i) t[i] = nodes[i].t[idx[i]];
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0;
        for (std::size_t j = 0; j < n; ++j) row += static_cast<double>(F(i, j)) * t[j];
        quad += row * t[i];
        lin += v[i] * t[i];
      }
      acc.add(a * expi(z * quad - lin));
    }
    std::size_t k = n;
    while (k-- > 0) {
      if (++idx[k] < nodes[k].t.size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return acc.value();
}

Complex exp_integral_taylor(const SplitKernel& kernel, std::span<const std::int64_t> y0, const QuadraticForm& F,
                            const std::vector<Observable>& f, const ProductPoint& x1, double N, double z,
                            std::span<const double> v, int degree) {
  check_integral_args(y0, F, f, x1, v, N);
  const std::size_t n = F.dim();
  const auto terms = taylor_split(F, z, degree);
  // J_i(b) = int W_i(t/N) t^b f_i(x1_i u(t)) e(-v_i t) dt
  std::vector<std::vector<Complex>> J(n, std::vector<Complex>(static_cast<std::size_t>(degree) + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const double panel = std::min({0.25, N / 8.0, 1.0 / (2.0 * (1.0 + std::abs(v[i])))});
    const Nodes nd = gl_nodes(-1.5 * N, 1.5 * N, panel);
    std::vector<ComplexAccumulator> acc(static_cast<std::size_t>(degree) + 1);
    for (std::size_t k = 0; k < nd.t.size(); ++k) {
      const double t = nd.t[k];
      const double W = kernel.window_1d(y0[i], t / N);
      if (W == 0.0) continue;
      const Complex base = nd.w[k] * W * f[i](horocycle(x1[i], t)) * expi(-v[i] * t);
      double tp = 1;
      for (int b = 0; b <= degree; ++b, tp *= t) acc[static_cast<std::size_t>(b)].add(base * tp);
    }
    for (int b = 0; b <= degree; ++b) J[i][static_cast<std::size_t>(b)] = acc[static_cast<std::size_t>(b)].value();
  }
  ComplexAccumulator total;
  for (const auto& term : terms) {
    Complex prod = term.c;
    for (std::size_t i = 0; i < n; ++i) prod *= J[i][static_cast<std::size_t>(term.beta[i])];
    total.add(prod);
  }
  return total.value();
}

// ---------------------------------------------------------------- Poisson

PoissonResult poisson_check(const std::function<double(double)>& g, double lo, double hi, std::int64_t q,
                            std::int64_t r, double c) {
  if (q < 1) throw InvalidArgument("poisson_check: q must be >= 1");
  if (!(hi > lo)) throw InvalidArgument("poisson_check: empty support");
  PoissonResult out;
  // primal side: finitely many m
  ComplexAccumulator lhs;
  const auto m_lo = static_cast<std::int64_t>(std::ceil((lo - static_cast<double>(r)) / static_cast<double>(q)));
  const auto m_hi = static_cast<std::int64_t>(std::floor((hi - static_cast<double>(r)) / static_cast<double>(q)));
  for (std::int64_t m = m_lo; m <= m_hi; ++m) {
    const double x = static_cast<double>(q * m + r);
    lhs.add(g(x) * expi(c * x));
  }
  const Complex L = lhs.value();
  out.lhs_abs = std::abs(L);

  const double mass = integrate([&](double x) { return std::abs(g(x)); }, lo, hi, 1.0 / 8.0);
  if (mass == 0.0) {
    out.residual = std::abs(L);
    return out;
  }
  auto ghat = [&](double xi) {
    const double panel = std::min(1.0 / 8.0, 1.0 / (8.0 * (1.0 + std::abs(xi))));
    return integrate([&](double x) { return g(x) * expi(-x * xi); }, lo, hi, panel);
  };
  const double tiny = 1e-13 * (1.0 + mass);
  const std::int64_t patience = std::max<std::int64_t>(8, 2 * q);
  constexpr std::int64_t kMaxTerms = 200'000;
  constexpr double kMaxEvaluations = 5e7;
  double evaluations = 0;
  ComplexAccumulator rhs;
  const auto v0 = static_cast<std::int64_t>(std::nearbyint(c * static_cast<double>(q)));
  auto add_term = [&](std::int64_t v) {
    const double xi = static_cast<double>(v) / static_cast<double>(q) - c;
    evaluations += kDefaultNodes * std::ceil((hi - lo) * 8.0 * (1.0 + std::abs(xi)));
    if (evaluations > kMaxEvaluations)
      throw BudgetExceeded("poisson_check: dual tail not summable", evaluations, kMaxEvaluations);
    const Complex term = ghat(static_cast<double>(v) / static_cast<double>(q) - c) *
                         expq(mulmod(mod_pos(r, q), mod_pos(v, q), q), q);
    rhs.add(term);
    ++out.frequencies;
    return std::abs(term);
  };
  add_term(v0);
  for (int dir : {1, -1}) {
    std::int64_t quiet = 0;
    for (std::int64_t k = 1; quiet < patience; ++k) {
      if (out.frequencies >= kMaxTerms)
        throw BudgetExceeded("poisson_check: dual tail not summable", static_cast<double>(kMaxTerms) + 1,
                             static_cast<double>(kMaxTerms));
      quiet = add_term(v0 + dir * k) < tiny ? quiet + 1 : 0;
    }
  }
  out.residual = std::abs(L - rhs.value() / static_cast<double>(q));
  return out;
}

// ---------------------------------------------------------------- L2

L2Identity l2_identity(const BoxSum& s) {
  L2Identity out;
  CompensatedSum lhs;
  for (const auto& [m, A] : s.grouped()) lhs.add(A * A);
  out.lhs = lhs.value();
  std::vector<std::pair<std::int64_t, double>> pts;
  s.for_each([&](std::span<const std::int64_t> x, double c) { pts.emplace_back(s.form().evaluate_i64(x), c); });
  const double pairs = static_cast<double>(pts.size()) * static_cast<double>(pts.size());
  if (pairs > s.options().work_budget) throw BudgetExceeded("l2_identity: pair loop", pairs, s.options().work_budget);
  CompensatedSum rhs;
  for (const auto& [fx, cx] : pts)
    for (const auto& [fy, cy] : pts)
      if (fx == fy) rhs.add(cx * cy);
  out.rhs = rhs.value();
  return out;
}

}  // namespace quadric
