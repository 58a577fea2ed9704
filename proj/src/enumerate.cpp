#include "quadric/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <omp.h>

namespace quadric {

namespace {

struct TailEntry {
  std::int64_t value;
  std::int64_t w1;
  std::int64_t w2;
  friend bool operator<(const TailEntry& a, const TailEntry& b) {
    return std::tie(a.value, a.w1, a.w2) < std::tie(b.value, b.w1, b.w2);
  }
};

std::int64_t isqrt128(__int128 v) {
  if (v < 0) return -1;
  auto s = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(v)));
  while (static_cast<__int128>(s) * s > v) --s;
  while (static_cast<__int128>(s + 1) * (s + 1) <= v) ++s;
  return s;
}

// Integer roots t in [-B, B] of a t^2 + b t + c = 0, ascending.
void integer_roots(__int128 a, __int128 b, __int128 c, std::int64_t B, std::vector<std::int64_t>& out) {
  out.clear();
  if (a == 0) {
    if (b == 0) {
      if (c == 0)
        for (std::int64_t t = -B; t <= B; ++t) out.push_back(t);
      return;
    }
    if (c % b == 0) {
      const __int128 t = -c / b;
      if (t >= -B && t <= B) out.push_back(static_cast<std::int64_t>(t));
    }
    return;
  }
  const __int128 disc = b * b - 4 * a * c;
  if (disc < 0) return;
  const std::int64_t s = isqrt128(disc);
  if (static_cast<__int128>(s) * s != disc) return;
  for (int sign : {-1, 1}) {
    const __int128 num = -b + sign * static_cast<__int128>(s);
    if (num % (2 * a) != 0) continue;
    const __int128 t = num / (2 * a);
    if (t < -B || t > B) continue;
    const auto tt = static_cast<std::int64_t>(t);
    if (std::find(out.begin(), out.end(), tt) == out.end()) out.push_back(tt);
  }
  std::sort(out.begin(), out.end());
}

bool next_prefix(std::vector<std::int64_t>& x, std::size_t from, std::size_t to, std::int64_t B) {
  // Lexicographic odometer over coordinates [from, to), last coordinate fastest.
  for (std::size_t i = to; i-- > from;) {
    if (x[i] < B) {
      ++x[i];
      return true;
    }
    x[i] = -B;
  }
  return false;
}

void check_range(const QuadraticForm& F, std::int64_t B) {
  double s = 0;
  for (auto v : F.entries()) s += std::abs(static_cast<double>(v));
  if (s * static_cast<double>(B) * static_cast<double>(B) > 4e18)
    throw InvalidArgument("enumerate_zeros: form values would overflow 64-bit arithmetic");
}

}  // namespace

std::int64_t sup_norm(std::span<const std::int64_t> x) {
  std::int64_t m = 0;
  for (auto v : x) m = std::max(m, v < 0 ? -v : v);
  return m;
}

EnumerationPath enumeration_path(const QuadraticForm& F) {
  const std::size_t n = F.dim();
  if (n == 1) return EnumerationPath::origin_only;
  for (std::size_t i = 0; i + 2 < n; ++i)
    for (std::size_t j = n - 2; j < n; ++j)
      if (F(i, j) != 0) return EnumerationPath::last_coordinate_solve;
  return EnumerationPath::representation_table;
}

double enumeration_work(const QuadraticForm& F, double P) {
  const double m = 2.0 * static_cast<double>(std::max<std::int64_t>(box_radius(P), 0)) + 1.0;
  const double n = static_cast<double>(F.dim());
  switch (enumeration_path(F)) {
    case EnumerationPath::origin_only:
      return 1.0;
    case EnumerationPath::representation_table:
      return std::pow(m, n - 2) * n * n + m * m * std::log2(m * m + 1);
    case EnumerationPath::last_coordinate_solve:
      return std::pow(m, n - 1) * n * n;
  }
  return 0;
}

QuadricPointSet enumerate_zeros(const QuadraticForm& F, double P, const EnumerationOptions& opt) {
  if (!(P >= 1)) throw InvalidArgument("enumerate_zeros: P must be >= 1");
  const std::size_t n = F.dim();
  const std::int64_t B = box_radius(P);
  check_range(F, B);
  const double work = enumeration_work(F, P);
  if (work > opt.work_budget) throw BudgetExceeded("enumerate_zeros: box too large", work, opt.work_budget);

  QuadricPointSet out;
  out.n = n;
  out.P = P;
  const auto path = enumeration_path(F);
  if (path == EnumerationPath::origin_only) {
    out.coords.assign(n, 0);
    return out;
  }
  const std::int64_t width = 2 * B + 1;

  if (path == EnumerationPath::representation_table) {
    const double bytes = static_cast<double>(width) * width * sizeof(TailEntry);
    if (bytes > opt.table_bytes)
      throw BudgetExceeded("enumerate_zeros: representation table exceeds memory cap", bytes, opt.table_bytes);
    const std::int64_t a = F(n - 2, n - 2), b = F(n - 2, n - 1), c = F(n - 1, n - 1);
    std::vector<TailEntry> table;
    table.reserve(static_cast<std::size_t>(width * width));
    for (std::int64_t w1 = -B; w1 <= B; ++w1)
      for (std::int64_t w2 = -B; w2 <= B; ++w2)
        table.push_back({a * w1 * w1 + 2 * b * w1 * w2 + c * w2 * w2, w1, w2});
    std::sort(table.begin(), table.end());

    const std::size_t pre = n - 2;
    auto emit_for_prefix = [&](std::vector<std::int64_t>& x, std::vector<std::int64_t>& sink) {
      std::int64_t cval = 0;
      for (std::size_t i = 0; i < pre; ++i) {
        std::int64_t row = 0;
        for (std::size_t j = 0; j < pre; ++j) row += F(i, j) * x[j];
        cval += x[i] * row;
      }
      const TailEntry key{-cval, -B - 1, -B - 1};
      for (auto it = std::lower_bound(table.begin(), table.end(), key); it != table.end() && it->value == -cval;
           ++it) {
        sink.insert(sink.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(pre));
        sink.push_back(it->w1);
        sink.push_back(it->w2);
      }
    };

    if (pre == 0) {
      std::vector<std::int64_t> x;
      emit_for_prefix(x, out.coords);
      return out;
    }
    // Parallel over the first coordinate; slabs are merged in index order.
    std::vector<std::vector<std::int64_t>> slabs(static_cast<std::size_t>(width));
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (std::int64_t s = 0; s < width; ++s) {
      std::vector<std::int64_t> x(pre, -B);
      x[0] = s - B;
      auto& sink = slabs[static_cast<std::size_t>(s)];
      do {
        emit_for_prefix(x, sink);
      } while (next_prefix(x, 1, pre, B));
    }
    for (auto& s : slabs) out.coords.insert(out.coords.end(), s.begin(), s.end());
    return out;
  }

  // Quadratic solve in the last coordinate.
  const std::size_t head = n - 1;
  const __int128 a = F(head, head);
  std::vector<std::vector<std::int64_t>> slabs(static_cast<std::size_t>(width));
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (std::int64_t s = 0; s < width; ++s) {
    std::vector<std::int64_t> x(head, -B);
    x[0] = s - B;
    std::vector<std::int64_t> roots;
    auto& sink = slabs[static_cast<std::size_t>(s)];
    do {
      __int128 b = 0, c = 0;
      for (std::size_t i = 0; i < head; ++i) {
        b += 2 * static_cast<__int128>(F(head, i)) * x[i];
        __int128 row = 0;
        for (std::size_t j = 0; j < head; ++j) row += static_cast<__int128>(F(i, j)) * x[j];
        c += row * x[i];
      }
      integer_roots(a, b, c, B, roots);
      for (auto t : roots) {
        sink.insert(sink.end(), x.begin(), x.end());
        sink.push_back(t);
      }
    } while (next_prefix(x, 1, head, B));
  }
  for (auto& s : slabs) out.coords.insert(out.coords.end(), s.begin(), s.end());
  return out;
}

QuadricPointSet enumerate_zeros_naive(const QuadraticForm& F, double P, double work_budget) {
  if (!(P >= 1)) throw InvalidArgument("enumerate_zeros_naive: P must be >= 1");
  const std::size_t n = F.dim();
  const std::int64_t B = box_radius(P);
  check_range(F, B);
  const double work = std::pow(2.0 * B + 1, static_cast<double>(n));
  if (work > work_budget) throw BudgetExceeded("enumerate_zeros_naive: box too large", work, work_budget);
  QuadricPointSet out;
  out.n = n;
  out.P = P;
  std::vector<std::int64_t> x(n, -B);
  do {
    if (F.evaluate_i64(x) == 0) out.coords.insert(out.coords.end(), x.begin(), x.end());
  } while (next_prefix(x, 0, n, B));
  return out;
}

std::vector<std::int64_t> counts_below(const QuadricPointSet& set, std::span<const double> radii) {
  std::vector<std::int64_t> norms(set.count());
  for (std::size_t i = 0; i < set.count(); ++i) norms[i] = sup_norm(set.point(i));
  std::vector<std::int64_t> counts;
  counts.reserve(radii.size());
  for (double r : radii) {
    if (r > set.P) throw InvalidArgument("counts_below: radius exceeds enumerated box");
    std::int64_t c = 0;
    for (auto m : norms)
      if (static_cast<double>(m) < r) ++c;
    counts.push_back(c);
  }
  return counts;
}

CountingFit fit_power_law(std::span<const double> P, std::span<const std::int64_t> counts) {
  if (P.size() != counts.size()) throw DimensionMismatch("fit_power_law: length mismatch");
  std::vector<double> ps(P.begin(), P.end());
  std::sort(ps.begin(), ps.end());
  if (std::unique(ps.begin(), ps.end()) - ps.begin() < 4)
    throw InvalidArgument("fit_power_law: need at least four distinct P values");
  for (auto c : counts)
    if (c <= 0) throw Error("obstructed-or-too-small: N_F(P) = 0, logarithm undefined");
  const double k = static_cast<double>(P.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double x = std::log(P[i]);
    const double y = std::log(static_cast<double>(counts[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  CountingFit fit;
  fit.exponent_hat = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double log_c = (sy - fit.exponent_hat * sx) / k;
  fit.C_hat = std::exp(log_c);
  fit.P.assign(P.begin(), P.end());
  fit.counts.assign(counts.begin(), counts.end());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double model = fit.C_hat * std::pow(P[i], fit.exponent_hat);
    fit.residuals.push_back((static_cast<double>(counts[i]) - model) / model);
  }
  return fit;
}

CountingFit counting_fit(const QuadraticForm& F, std::span<const double> P_list, const EnumerationOptions& opt) {
  std::vector<double> ps(P_list.begin(), P_list.end());
  std::sort(ps.begin(), ps.end());
  if (std::unique(ps.begin(), ps.end()) - ps.begin() < 4)
    throw InvalidArgument("counting_fit: need at least four distinct P values");
  const double pmax = *std::max_element(P_list.begin(), P_list.end());
  const auto set = enumerate_zeros(F, pmax, opt);
  const auto counts = counts_below(set, P_list);
  if (std::all_of(counts.begin(), counts.end(), [&](auto c) { return c == counts.front(); }))
    throw Error("obstructed-or-too-small: N_F(P) does not grow over the supplied radii");
  auto fit = fit_power_law(P_list, counts);
  if (F.dim() < 5) fit.warning = "n<5";
  return fit;
}

QuadricPointSet shell_points(const QuadricPointSet& set, double delta) {
  if (!(delta >= 0 && delta < 1)) throw InvalidArgument("shell_points: delta must lie in [0, 1)");
  QuadricPointSet out;
  out.n = set.n;
  out.P = set.P;
  const double inner = (1.0 - delta) * set.P;
  for (std::size_t i = 0; i < set.count(); ++i) {
    const auto x = set.point(i);
    // delta == 0 gives the empty shell [P, P).
    if (delta > 0 && static_cast<double>(sup_norm(x)) >= inner)
      out.coords.insert(out.coords.end(), x.begin(), x.end());
  }
  return out;
}

std::int64_t shell_count(const QuadraticForm& F, double P, double delta, const EnumerationOptions& opt) {
  return static_cast<std::int64_t>(shell_points(enumerate_zeros(F, P, opt), delta).count());
}

}  // namespace quadric
