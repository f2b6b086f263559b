#pragma once
// Independent brute-force references used by the unit and acceptance tests.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "palmtess/geometry.hpp"

namespace oracle {

using palmtess::Vec2;

struct FaceInterval {
  double lo = 0.0;
  double hi = 0.0;
  Vec2 mid{};
  Vec2 dir{};
  double length() const { return hi - lo; }
  Vec2 at(double t) const { return mid + dir * t; }
};

// Portion of the bisector of (i, j) that is at least as close to i as to every other point.
inline std::optional<FaceInterval> bisector_face(const std::vector<Vec2>& p, std::size_t i, std::size_t j) {
  Vec2 d = p[j] - p[i];
  double len = d.norm();
  FaceInterval f;
  f.mid = (p[i] + p[j]) * 0.5;
  f.dir = Vec2{-d.y / len, d.x / len};
  f.lo = -std::numeric_limits<double>::infinity();
  f.hi = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k == i || k == j) continue;
    Vec2 n = p[k] - p[i];
    double c = n.dot((p[i] + p[k]) * 0.5);
    double a = n.dot(f.dir);
    double b = c - n.dot(f.mid);
    if (a == 0.0) {
      if (b < 0.0) return std::nullopt;
    } else if (a > 0.0) {
      f.hi = std::min(f.hi, b / a);
    } else {
      f.lo = std::max(f.lo, b / a);
    }
    if (f.lo > f.hi) return std::nullopt;
  }
  return f;
}

// Adjacent pairs whose shared bisector piece is longer than eps.
inline std::set<std::pair<std::size_t, std::size_t>> adjacency(const std::vector<Vec2>& p, double eps) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      auto f = bisector_face(p, i, j);
      if (f && f->length() > eps) out.emplace(i, j);
    }
  return out;
}

// Exact Poisson moments E N^k for k = 1, 2, 3.
inline double poisson_moment(double m, int k) {
  switch (k) {
    case 1: return m;
    case 2: return m + m * m;
    case 3: return m + 3 * m * m + m * m * m;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

inline double poisson_pmf(double m, int k) {
  return std::exp(-m + k * std::log(m) - std::lgamma(k + 1.0));
}

// Monte Carlo retention probability of a typical point under type-II thinning: the point
// survives iff every proposal within distance r carries a larger mark.
inline std::pair<double, double> matern_retention(double lambda, double r, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::poisson_distribution<int> nb(lambda * M_PI * r * r);
  int kept = 0;
  for (int t = 0; t < trials; ++t) {
    double mark = u(gen);
    int k = nb(gen);
    bool ok = true;
    for (int i = 0; i < k; ++i)
      if (u(gen) < mark) ok = false;
    kept += ok ? 1 : 0;
  }
  double q = static_cast<double>(kept) / trials;
  return {q, std::sqrt(q * (1 - q) / trials)};
}

}  // namespace oracle
