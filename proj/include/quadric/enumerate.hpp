#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quadric/quadform.hpp"

namespace quadric {

/// Integer zeros of F in the open sup-norm box |x| < P, in lexicographic order.
struct QuadricPointSet {
  std::size_t n = 0;
  double P = 0;
  std::vector<std::int64_t> coords;  // count() * n entries

  std::size_t count() const { return n == 0 ? 0 : coords.size() / n; }
  std::span<const std::int64_t> point(std::size_t i) const { return {coords.data() + i * n, n}; }
};

struct EnumerationOptions {
  double work_budget = 5e9;
  double table_bytes = 1024.0 * 1024.0 * 1024.0;
  bool parallel = true;
};

enum class EnumerationPath { origin_only, representation_table, last_coordinate_solve };

/// Which algorithm enumerate_zeros picks for F: the representation table when
/// the trailing two coordinates are decoupled from the rest, otherwise a
/// quadratic solve in the last coordinate.
EnumerationPath enumeration_path(const QuadraticForm& F);

/// Estimated elementary steps for enumerate_zeros(F, P).
double enumeration_work(const QuadraticForm& F, double P);

QuadricPointSet enumerate_zeros(const QuadraticForm& F, double P, const EnumerationOptions& opt = {});

/// Serial full scan of the box; the reference the fast paths are checked against.
QuadricPointSet enumerate_zeros_naive(const QuadraticForm& F, double P, double work_budget = 5e9);

std::int64_t sup_norm(std::span<const std::int64_t> x);

/// N_F(P') for each P' <= set.P, read off an existing enumeration.
std::vector<std::int64_t> counts_below(const QuadricPointSet& set, std::span<const double> radii);

struct CountingFit {
  double exponent_hat = 0;
  double C_hat = 0;
  std::vector<double> P;
  std::vector<std::int64_t> counts;
  std::vector<double> residuals;  // (N - C P^e) / (C P^e)
  /// Empty, or "n<5" when the form has too few variables for the asymptotic.
  std::string warning;
};

/// Least-squares fit of log N = log C + e log P.
CountingFit fit_power_law(std::span<const double> P, std::span<const std::int64_t> counts);

/// Enumerate at max(P_list) and fit. Throws InvalidArgument for fewer than four
/// distinct radii and Error("obstructed-or-too-small") when N_F never grows.
CountingFit counting_fit(const QuadraticForm& F, std::span<const double> P_list,
                         const EnumerationOptions& opt = {});

/// #{x : (1-delta) P <= |x| < P, F(x) = 0}.
std::int64_t shell_count(const QuadraticForm& F, double P, double delta, const EnumerationOptions& opt = {});
QuadricPointSet shell_points(const QuadricPointSet& set, double delta);

}  // namespace quadric
