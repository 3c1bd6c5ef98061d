#pragma once

// Dense-vector helpers shared across the library. Everything works on plain
// std::vector<double>; dimension agreement is the caller's contract and is
// asserted here.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace zopd {

using Vec = std::vector<double>;

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec constant(std::size_t n, double value) { return Vec(n, value); }

inline double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double sum(const Vec& a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

inline double mean(const Vec& a) { return a.empty() ? 0.0 : sum(a) / static_cast<double>(a.size()); }

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// x + s * u
inline Vec add_scaled(const Vec& x, double s, const Vec& u) {
  assert(x.size() == u.size());
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * u[i];
  return out;
}

inline Vec add(const Vec& a, const Vec& b) { return add_scaled(a, 1.0, b); }

inline Vec sub(const Vec& a, const Vec& b) { return add_scaled(a, -1.0, b); }

inline Vec scale(const Vec& a, double s) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

inline Vec hadamard(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline bool all_finite(const Vec& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline bool all_nonnegative(const Vec& a) {
  for (double v : a) {
    if (v < 0.0) return false;
  }
  return true;
}

inline std::string to_string(const Vec& a) {
  std::string out = "[";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(a[i]);
  }
  out += "]";
  return out;
}

}  // namespace zopd
