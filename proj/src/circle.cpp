#include "quadric/circle.hpp"

#include <algorithm>
#include <cmath>

#include "quadric/enumerate.hpp"
#include "quadric/quadrature.hpp"

namespace quadric {

namespace {

constexpr double kMaxArcs = 5e7;

// sum_{q <= Q} phi(q) by a sieve
std::vector<std::int64_t> phi_table(std::int64_t Q) {
  std::vector<std::int64_t> phi(static_cast<std::size_t>(Q) + 1);
  for (std::int64_t i = 0; i <= Q; ++i) phi[static_cast<std::size_t>(i)] = i;
  for (std::int64_t p = 2; p <= Q; ++p)
    if (phi[static_cast<std::size_t>(p)] == p)
      for (std::int64_t k = p; k <= Q; k += p) phi[static_cast<std::size_t>(k)] -= phi[static_cast<std::size_t>(k)] / p;
  return phi;
}

double circ_dist(double x, double c) { return dist_to_int(x - c); }

}  // namespace

std::int64_t default_Q(double P) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::pow(P, 1.0 / 20.0) - 1e-12)));
}

std::int64_t euler_phi(std::int64_t q) {
  if (q < 1) throw InvalidArgument("euler_phi: q must be >= 1");
  std::int64_t r = q;
  for (std::int64_t p = 2; p * p <= q; ++p)
    if (q % p == 0) {
      while (q % p == 0) q /= p;
      r -= r / p;
    }
  if (q > 1) r -= r / q;
  return r;
}

ArcDecomposition farey_cover(std::int64_t Q) {
  if (Q < 1 || Q > 1'000'000) throw InvalidArgument("farey_cover: Q must lie in [1, 1e6]");
  // 3 Q^2 / pi^2 is the size of the Farey sequence up to lower-order terms
  const double approx = 0.304 * static_cast<double>(Q) * static_cast<double>(Q) + 2;
  if (approx > kMaxArcs) throw BudgetExceeded("farey_cover: arc list", approx, kMaxArcs);
  ArcDecomposition out;
  out.Q = Q;
  const double Qd = static_cast<double>(Q);
  // next-term recurrence for the Farey sequence of order Q
  std::int64_t a = 0, b = 1, c = 1, d = Q;
  out.arcs.push_back({0, 1, 0.0, 1.0 / Qd});
  bool overlap = true;
  while (c < d) {
    out.arcs.push_back({c, d, static_cast<double>(c) / static_cast<double>(d), 1.0 / (static_cast<double>(d) * Qd)});
    overlap = overlap && (b + d > Q);
    const std::int64_t k = (Q + b) / d;
    const std::int64_t e = k * c - a, f = k * d - b;
    a = c, b = d, c = e, d = f;
  }
  // last fraction (Q-1)/Q wraps around to 1/1 = 0/1
  overlap = overlap && (b + 1 > Q);
  if (Q == 1) overlap = true;  // one arc of radius 1 is the whole circle
  out.neighbours_overlap = overlap;
  if (Q <= 1000) {
    out.scanned = true;
    const auto steps = 4 * Q * Q;
    bool ok = true;
    std::size_t j = 0;  // arcs are sorted: walk them along the grid
    for (std::int64_t s = 0; s < steps && ok; ++s) {
      const double x = static_cast<double>(s) / static_cast<double>(steps);
      while (j + 1 < out.arcs.size() && out.arcs[j + 1].center <= x) ++j;
      bool hit = circ_dist(x, out.arcs[j].center) < out.arcs[j].radius;
      if (!hit && j + 1 < out.arcs.size()) hit = circ_dist(x, out.arcs[j + 1].center) < out.arcs[j + 1].radius;
      if (!hit) hit = circ_dist(x, 0.0) < 1.0 / Qd;
      ok = hit;
    }
    out.scan_passed = ok;
  }
  return out;
}

Location locate(double alpha, std::int64_t Q) {
  if (Q < 1) throw InvalidArgument("locate: Q must be >= 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("locate: alpha must lie in [0, 1)");
  const double Qd = static_cast<double>(Q);
  for (std::int64_t q = 1; q <= Q; ++q) {
    const double qa = static_cast<double>(q) * alpha;
    const double r = std::nearbyint(qa);
    if (std::abs(qa - r) < 1.0 / Qd) {
      const std::int64_t a = mod_pos(static_cast<std::int64_t>(r), q);
      return {a, q, std::abs(qa - r) / static_cast<double>(q)};
    }
  }
  // Dirichlet's theorem makes this unreachable
  throw ConvergenceError("locate: no arc contains alpha");
}

const char* region_name(Region r) { return r == Region::m1 ? "m1" : "m2"; }

double major_threshold(std::int64_t q, double P, double eps0) {
  const double qd = static_cast<double>(q);
  return std::pow(P, -2.0 + eps0) / (qd * qd);
}

Region region_of(double alpha, std::int64_t Q, double P, double eps0) {
  const auto loc = locate(alpha, Q);
  return loc.dist < major_threshold(loc.q, P, eps0) ? Region::m1 : Region::m2;
}

M1Measure meas_m1(std::int64_t Q, double P, double eps0) {
  if (!(P > 0)) throw InvalidArgument("meas_m1: P must be positive");
  M1Measure out;
  const auto phi = phi_table(Q);
  CompensatedSum closed;
  for (std::int64_t q = 1; q <= Q; ++q)
    closed.add(2.0 * static_cast<double>(phi[static_cast<std::size_t>(q)]) * major_threshold(q, P, eps0));
  out.closed_form = closed.value();
  // intervals on [0, 1), split where they wrap. Each carries its exact width so
  // disjoint arcs add 2t rather than (c + t) - (c - t), which loses ~1e-8
  // relative at P = 1e4.
  struct Piece {
    double lo, hi, width;
    bool operator<(const Piece& o) const { return lo < o.lo || (lo == o.lo && hi < o.hi); }
  };
  std::vector<Piece> iv;
  const auto cover = farey_cover(Q);
  for (const auto& arc : cover.arcs) {
    const double t = std::min(0.5, major_threshold(arc.q, P, eps0));
    if (arc.q == 1) {
      iv.push_back({0.0, t, t});
      iv.push_back({1.0 - t, 1.0, t});
    } else {
      iv.push_back({arc.center - t, arc.center + t, 2 * t});
    }
  }
  std::sort(iv.begin(), iv.end());
  CompensatedSum total;
  double cur_hi = -1;
  for (const auto& p : iv) {
    if (p.lo > cur_hi) {
      total.add(p.width);
      cur_hi = p.hi;
    } else if (p.hi > cur_hi) {
      total.add(p.hi - cur_hi);
      cur_hi = p.hi;
    }
  }
  out.union_measure = total.value();
  return out;
}

DeltaIdentity delta_identity_check(const BoxSum& s) {
  DeltaIdentity out;
  EnumerationOptions opt;
  opt.parallel = s.options().parallel;
  const auto zeros = enumerate_zeros(s.form(), s.P(), opt);
  out.zeros = zeros.count();
  CompensatedSum direct;
  for (std::size_t i = 0; i < zeros.count(); ++i) direct.add(s.coefficient(zeros.point(i)));
  out.direct = direct.value();
  for (const auto& [m, A] : s.grouped())
    if (m == 0) out.via_integral = A;
  return out;
}

VdcReport vdc_difference(const BoxSum& s, double alpha, std::int64_t H, double work_budget) {
  if (H < 1) throw InvalidArgument("vdc_difference: H must be >= 1");
  if (H > 1 && static_cast<double>(H) > s.P() / 2) throw InvalidArgument("vdc_difference: H must be <= P/2");
  const std::size_t n = s.dim();
  const std::int64_t B = s.radius();
  const auto& F = s.form();
  const double ext = static_cast<double>(2 * B + H);
  const double work = std::pow(ext, static_cast<double>(n)) * std::pow(static_cast<double>(H), static_cast<double>(n)) +
                      std::pow(static_cast<double>(2 * H - 1), static_cast<double>(n)) *
                          std::pow(static_cast<double>(2 * B + 1), static_cast<double>(n));
  if (work > work_budget) throw BudgetExceeded("vdc_difference", work, work_budget);

  // G on the box, zero outside
  const auto side = static_cast<std::size_t>(2 * B + 1);
  std::vector<Complex> G;
  {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= side;
    G.assign(total, Complex{});
    std::vector<std::int64_t> x(n, -B);
    for (std::size_t idx = 0; idx < total; ++idx) {
      const double c = s.coefficient(x);
      if (c != 0.0) G[idx] = c * phase(alpha, F.evaluate_i64(x));
      for (std::size_t k = n; k-- > 0;) {
        if (x[k] < B) {
          ++x[k];
          break;
        }
        x[k] = -B;
      }
    }
  }
  auto g_at = [&](std::span<const std::int64_t> x) -> Complex {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] < -B || x[i] > B) return {};
      idx = idx * side + static_cast<std::size_t>(x[i] + B);
    }
    return G[idx];
  };
  auto step = [](std::vector<std::int64_t>& v, std::int64_t lo, std::int64_t hi) {
    for (std::size_t k = v.size(); k-- > 0;) {
      if (v[k] < hi) {
        ++v[k];
        return true;
      }
      v[k] = lo;
    }
    return false;
  };

  VdcReport out;
  const double Hn = std::pow(static_cast<double>(H), static_cast<double>(n));
  out.lhs_rearranged = Hn * s.evaluate(alpha).value;
  out.box_size = std::pow(ext, static_cast<double>(n));

  // x over [-B - H + 1, B]^n, the only x with a nonzero inner sum
  ComplexAccumulator rhs;
  CompensatedSum middle;
  std::vector<std::int64_t> x(n, -B - H + 1), h(n), y(n);
  do {
    ComplexAccumulator inner;
    std::fill(h.begin(), h.end(), 0);
    do {
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h[i];
      inner.add(g_at(y));
    } while (step(h, 0, H - 1));
    rhs.add(inner);
    middle.add(std::norm(inner.value()));
  } while (step(x, -B - H + 1, B));
  out.rhs_rearranged = rhs.value();
  const double scale = std::max(std::abs(out.lhs_rearranged), 1e-300);
  out.rearrangement_error = std::abs(out.lhs_rearranged - out.rhs_rearranged) / scale;
  out.cs_lhs = std::norm(out.lhs_rearranged);
  out.cs_middle = out.box_size * middle.value();

  CompensatedSum cs, cs_abs;
  std::vector<std::int64_t> d(n, -(H - 1)), yd(n);
  do {
    double mult = 1;
    for (std::size_t i = 0; i < n; ++i) mult *= static_cast<double>(H - std::abs(d[i]));
    // 2 (L d) . y with the phase alpha F(d) split off
    std::vector<std::int64_t> Ld(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) Ld[i] += F(i, j) * d[j];
    ComplexAccumulator corr, diffd;
    std::fill(y.begin(), y.end(), -B);
    do {
      for (std::size_t i = 0; i < n; ++i) yd[i] = y[i] + d[i];
      const Complex gy = g_at(y);
      if (gy == Complex{}) continue;
      const Complex gyd = g_at(yd);
      if (gyd == Complex{}) continue;
      corr.add(gyd * std::conj(gy));
      std::int64_t lin = 0;
      for (std::size_t i = 0; i < n; ++i) lin += 2 * Ld[i] * y[i];
      diffd.add(s.coefficient(yd) * s.coefficient(y) * phase(alpha, lin));
    } while (step(y, -B, B));
    VdcTerm t{d, mult, corr.value(), diffd.value()};
    cs.add(mult * t.correlation.real());
    cs_abs.add(mult * std::abs(t.correlation));
    out.terms.push_back(std::move(t));
  } while (step(d, -(H - 1), H - 1));
  out.cs_rhs = out.box_size * cs.value();
  out.cs_rhs_abs = out.box_size * cs_abs.value();
  const double slack = 1e-12 * std::max(1.0, out.cs_rhs_abs);
  out.holds = out.cs_lhs <= out.cs_rhs + slack && out.cs_rhs <= out.cs_rhs_abs + slack &&
              std::abs(out.cs_middle - out.cs_rhs) <= 1e-10 * std::max(1.0, out.cs_rhs_abs);
  return out;
}

LatticeSum lattice_sum_check(const QuadraticForm& L, std::int64_t P, double H, double z, double delta, double C) {
  if (!(std::abs(z) > 0 && std::abs(z) < 1)) throw InvalidArgument("lattice_sum_check: need 0 < |z| < 1");
  if (!(delta > 0 && delta < 1)) throw InvalidArgument("lattice_sum_check: need 0 < delta < 1");
  if (P < 1 || !(H >= 0 && H <= static_cast<double>(P)))
    throw InvalidArgument("lattice_sum_check: need P >= 1 and 0 <= H <= P");
  if (!(C >= 0)) throw InvalidArgument("lattice_sum_check: C must be >= 0");
  const std::size_t n = L.dim();
  const double work = std::pow(static_cast<double>(P + 1), static_cast<double>(n));
  if (work > 1e8) throw BudgetExceeded("lattice_sum_check", work, 1e8);
  LatticeSum out;
  CompensatedSum lhs;
  std::vector<std::int64_t> y(n, 0);
  for (;;) {
    double prod = 1;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t ly = 0;
      for (std::size_t j = 0; j < n; ++j) ly += L(i, j) * y[j];
      // z (Ly)_i mod 1 with the product split exactly
      const double p = z * static_cast<double>(ly);
      const double e = std::fma(z, static_cast<double>(ly), -p);
      const double frac = (p - std::floor(p)) + e;
      prod *= std::pow(1.0 + H * dist_to_int(frac), -delta) + C;
    }
    lhs.add(prod);
    std::size_t k = n;
    while (k-- > 0) {
      if (y[k] < P) {
        ++y[k];
        break;
      }
      y[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  out.lhs = lhs.value();
  const double Pd = static_cast<double>(P), az = std::abs(z);
  const double factor = 1.0 / Pd + az + std::pow(H, -delta) + std::pow(H * az * Pd, -delta) + C;
  out.rhs = std::pow(Pd, static_cast<double>(n)) * std::pow(factor, static_cast<double>(n));
  out.ratio = std::isinf(out.rhs) ? 0.0 : out.lhs / out.rhs;
  return out;
}

ArcIntegral arc_integral(const BoxSum& s, std::int64_t Q, double eps0, double resolution, double work_budget) {
  if (!(resolution > 0)) throw InvalidArgument("arc_integral: resolution must be positive");
  ArcIntegral out;
  const auto groups = s.grouped();
  std::int64_t mmax = 0;
  for (const auto& [m, A] : groups) mmax = std::max(mmax, std::abs(m));
  const auto cover = farey_cover(Q);
  const double P = s.P();

  std::vector<double> cuts{0.0, 1.0};
  auto add_cut = [&](double x) {
    x -= std::floor(x);
    cuts.push_back(x);
  };
  for (const auto& arc : cover.arcs) {
    add_cut(arc.center);
    add_cut(arc.center - arc.radius);
    add_cut(arc.center + arc.radius);
    const double t = major_threshold(arc.q, P, eps0);
    add_cut(arc.center - t);
    add_cut(arc.center + t);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double panel = std::min(resolution, 1.0 / (2.0 * (1.0 + static_cast<double>(mmax))));
  constexpr int kNodes = 16;
  const auto& rule = gauss_legendre(kNodes);
  double work = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    work += std::ceil((cuts[i + 1] - cuts[i]) / panel) * kNodes * static_cast<double>(groups.size());
  if (work > work_budget) throw BudgetExceeded("arc_integral", work, work_budget);

  const auto pieces = static_cast<std::ptrdiff_t>(cuts.size() - 1);
  std::vector<CompensatedSum> mass(static_cast<std::size_t>(pieces));
  std::vector<ComplexAccumulator> integral(static_cast<std::size_t>(pieces));
  std::vector<Region> region(static_cast<std::size_t>(pieces));
#pragma omp parallel for schedule(dynamic) if (s.options().parallel)
  for (std::ptrdiff_t i = 0; i < pieces; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const double lo = cuts[iu], hi = cuts[iu + 1];
    region[iu] = region_of(0.5 * (lo + hi), Q, P, eps0);
    const auto np = static_cast<long>(std::max(1.0, std::ceil((hi - lo) / panel)));
    const double h = (hi - lo) / static_cast<double>(np);
    for (long p = 0; p < np; ++p) {
      const double mid = lo + (static_cast<double>(p) + 0.5) * h;
      for (int k = 0; k < kNodes; ++k) {
        const double x = mid + 0.5 * h * rule.nodes[static_cast<std::size_t>(k)];
        const double wgt = 0.5 * h * rule.weights[static_cast<std::size_t>(k)];
        const Complex S = BoxSum::evaluate_grouped(groups, x);
        mass[iu].add(wgt * std::abs(S));
        integral[iu].add(wgt * S);
      }
    }
  }
  CompensatedSum m1, m2, meas;
  ComplexAccumulator total;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (region[i] == Region::m1) {
      m1.add(mass[i]);
      meas.add(cuts[i + 1] - cuts[i]);
    } else {
      m2.add(mass[i]);
    }
    total.add(integral[i]);
  }
  out.m1_mass = m1.value();
  out.m2_mass = m2.value();
  out.meas_m1 = meas.value();
  out.meas_bound = meas_m1(Q, P, eps0).closed_form;
  out.integral = total.value();
  for (const auto& [m, A] : groups)
    if (m == 0) out.exact = A;
  out.pieces = static_cast<std::size_t>(pieces);
  return out;
}

}  // namespace quadric
