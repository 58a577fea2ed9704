#pragma once

#include <cstdint>
#include <vector>

#include "quadric/expsums.hpp"

namespace quadric {

inline constexpr double kDefaultEps0 = 1.0 / 240.0;

/// ceil(P^(1/20)), at least 1.
std::int64_t default_Q(double P);

std::int64_t euler_phi(std::int64_t q);

struct Arc {
  std::int64_t a = 0, q = 1;
  double center = 0;  // a / q
  double radius = 0;  // 1 / (q Q)
};

/// Reduced fractions 0 <= a/q < 1 with q <= Q, sorted by a/q, with circular
/// Dirichlet arcs |alpha - a/q| < 1/(qQ) on R/Z.
struct ArcDecomposition {
  std::int64_t Q = 1;
  std::vector<Arc> arcs;
  /// Neighbouring arcs overlap (q + q' > Q for Farey neighbours), checked exactly.
  bool neighbours_overlap = false;
  /// Grid scan at spacing 1/(4Q^2) found every point covered; only run for Q <= 1000.
  bool scan_passed = false;
  bool scanned = false;

  bool covers() const { return neighbours_overlap && (!scanned || scan_passed); }
};

/// Throws InvalidArgument outside 1 <= Q <= 1e6, BudgetExceeded when there
/// would be more than 5e7 arcs.
ArcDecomposition farey_cover(std::int64_t Q);

struct Location {
  std::int64_t a = 0, q = 1;
  double dist = 0;  // circular |alpha - a/q|
};

/// Smallest q whose arc contains alpha; alpha in [0, 1).
Location locate(double alpha, std::int64_t Q);

enum class Region { m1, m2 };
const char* region_name(Region r);

/// q^-2 P^(-2 + eps0).
double major_threshold(std::int64_t q, double P, double eps0);

/// m1 iff |alpha - a/q| < q^-2 P^(-2+eps0) for the located (a, q).
Region region_of(double alpha, std::int64_t Q, double P, double eps0);

struct M1Measure {
  double union_measure = 0;  // Lebesgue measure of the union of the intervals on R/Z
  double closed_form = 0;    // sum_q 2 phi(q) q^-2 P^(-2+eps0)
};

/// Measure of m1 = union over reduced a/q, q <= Q, of |alpha - a/q| < q^-2 P^(-2+eps0).
M1Measure meas_m1(std::int64_t Q, double P, double eps0);

struct DeltaIdentity {
  double direct = 0;        // sum over enumerated zeros of w f
  double via_integral = 0;  // coefficient of e(0 alpha) after grouping S by F-value
  std::size_t zeros = 0;
};

/// Sigma(P) two ways: enumeration of F = 0 versus int_0^1 S(alpha) d alpha
/// done symbolically on grouped terms.
DeltaIdentity delta_identity_check(const BoxSum& s);

struct VdcTerm {
  std::vector<std::int64_t> d;
  double multiplicity = 0;  // N(d) = prod (H - |d_i|)
  Complex correlation;      // sum_y G(y + d) conj G(y)
  Complex differenced;      // sum_y c(y + d) c(y) e(2 alpha (L d) . y)
};

struct VdcReport {
  Complex lhs_rearranged;   // H^n S(alpha)
  Complex rhs_rearranged;   // sum_x sum_{0 <= h < H} G(x + h)
  double rearrangement_error = 0;  // relative
  double cs_lhs = 0;        // |H^n S|^2
  double cs_middle = 0;     // |X| sum_x |sum_h G(x + h)|^2
  double cs_rhs = 0;        // |X| sum_d N(d) sum_y G(y+d) conj G(y)  (real)
  double cs_rhs_abs = 0;    // |X| sum_d N(d) |inner(d)|
  double box_size = 0;      // |X| = (2B + H)^n, the x with a possibly nonzero inner sum
  bool holds = false;       // cs_lhs <= cs_rhs <= cs_rhs_abs up to rounding
  std::vector<VdcTerm> terms;
};

/// Differencing with shifts 0 <= h < H. Requires 1 <= H <= P/2 (H = 1 allowed for any P).
VdcReport vdc_difference(const BoxSum& s, double alpha, std::int64_t H, double work_budget = 2e8);

struct LatticeSum {
  double lhs = 0, rhs = 0, ratio = 0;
};

/// lhs = sum_{0 <= y <= P} prod_i ((1 + H ||z (L y)_i||)^-delta + C),
/// rhs = P^n prod_i (1/P + |z| + H^-delta + (H |z| P)^-delta + C).
LatticeSum lattice_sum_check(const QuadraticForm& L, std::int64_t P, double H, double z, double delta, double C);

struct ArcIntegral {
  double m1_mass = 0;  // int over m1 of |S|
  double m2_mass = 0;
  double meas_m1 = 0;  // measure of the canonical m1
  double meas_bound = 0;  // sum_q 2 phi(q) q^-2 P^(-2+eps0)
  Complex integral;    // int_0^1 S by the same quadrature
  Complex exact;       // A_0
  std::size_t pieces = 0;
};

/// int |S(alpha)| over the canonical partition of [0, 1) into m1 and m2, with
/// breakpoints at every arc and major-interval endpoint, composite
/// Gauss-Legendre with panels no wider than `resolution`.
ArcIntegral arc_integral(const BoxSum& s, std::int64_t Q, double eps0, double resolution, double work_budget = 5e9);

}  // namespace quadric
