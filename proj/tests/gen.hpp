#pragma once

// Small seeded generators for property tests.

#include <cstdint>
#include <random>
#include <vector>

namespace gen {

inline std::mt19937_64& rng() {
  static std::mt19937_64 r(0x5eed5eedULL);
  return r;
}

inline std::int64_t integer(std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng());
}

inline double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline std::vector<std::int64_t> vec(std::size_t n, std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = integer(lo, hi);
  return v;
}

// Random symmetric integer matrix, row-major.
inline std::vector<std::int64_t> symmetric(std::size_t n, std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m[i * n + j] = m[j * n + i] = integer(lo, hi);
  return m;
}

}  // namespace gen
