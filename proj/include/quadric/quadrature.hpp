#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "quadric/common.hpp"

namespace quadric {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss–Legendre rule with the given number of nodes (cached, thread-safe).
const GaussRule& gauss_legendre(int nodes);

inline constexpr int kDefaultNodes = 32;

/// Composite Gauss–Legendre on [a, b] with panels no wider than max_panel.
/// Accumulation is compensated; the result type follows the integrand.
template <class Fn>
auto integrate(Fn&& f, double a, double b, double max_panel, int nodes = kDefaultNodes) {
  using R = decltype(f(a));
  if (!(b > a)) return R{};
  const auto& rule = gauss_legendre(nodes);
  const auto panels = static_cast<long>(std::max(1.0, std::ceil((b - a) / max_panel)));
  const double h = (b - a) / static_cast<double>(panels);
  if constexpr (std::is_same_v<R, double>) {
    CompensatedSum acc;
    for (long p = 0; p < panels; ++p) {
      const double mid = a + (static_cast<double>(p) + 0.5) * h;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc.add(0.5 * h * rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]));
    }
    return acc.value();
  } else {
    ComplexAccumulator acc;
    for (long p = 0; p < panels; ++p) {
      const double mid = a + (static_cast<double>(p) + 0.5) * h;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc.add(0.5 * h * rule.weights[k] * Complex(f(mid + 0.5 * h * rule.nodes[k])));
    }
    return R(acc.value());
  }
}

}  // namespace quadric
