#include "palmtess/predicates.hpp"

#include <atomic>
#include <cmath>
#include <vector>

namespace palmtess::predicates {

namespace {

constexpr double kEps = 0x1p-53;
constexpr double kCcwBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIccBound = (10.0 + 96.0 * kEps) * kEps;

std::atomic<unsigned long long> g_orient_exact{0};
std::atomic<unsigned long long> g_incircle_exact{0};

// Expansions are nonoverlapping, ordered by increasing magnitude, zeros allowed.
using Expansion = std::vector<double>;

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  double bv = x - a;
  double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void two_prod(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

Expansion grow(const Expansion& e, double b) {
  Expansion h;
  h.reserve(e.size() + 1);
  double q = b;
  for (double ei : e) {
    double hi, lo;
    two_sum(q, ei, hi, lo);
    if (lo != 0.0) h.push_back(lo);
    q = hi;
  }
  h.push_back(q);
  return h;
}

Expansion add(const Expansion& e, const Expansion& f) {
  Expansion h = e;
  for (double fi : f) h = grow(h, fi);
  return h;
}

Expansion negate(Expansion e) {
  for (double& x : e) x = -x;
  return e;
}

Expansion scale(const Expansion& e, double b) {
  Expansion h;
  if (e.empty()) return h;
  h.reserve(2 * e.size());
  double q, lo;
  two_prod(e[0], b, q, lo);
  if (lo != 0.0) h.push_back(lo);
  for (std::size_t i = 1; i < e.size(); ++i) {
    double p1, p0;
    two_prod(e[i], b, p1, p0);
    double s, t;
    two_sum(q, p0, s, t);
    if (t != 0.0) h.push_back(t);
    two_sum(p1, s, q, t);
    if (t != 0.0) h.push_back(t);
  }
  h.push_back(q);
  return h;
}

Expansion mul(const Expansion& e, const Expansion& f) {
  Expansion h;
  for (double fi : f) h = add(h, scale(e, fi));
  return h;
}

Expansion diff(double a, double b) {
  double x, y;
  two_sum(a, -b, x, y);
  return y != 0.0 ? Expansion{y, x} : Expansion{x};
}

int sign(const Expansion& e) {
  for (auto it = e.rbegin(); it != e.rend(); ++it) {
    if (*it > 0.0) return 1;
    if (*it < 0.0) return -1;
  }
  return 0;
}

int orient_exact(Vec2 a, Vec2 b, Vec2 c) {
  Expansion acx = diff(a.x, c.x), acy = diff(a.y, c.y);
  Expansion bcx = diff(b.x, c.x), bcy = diff(b.y, c.y);
  return sign(add(mul(acx, bcy), negate(mul(acy, bcx))));
}

int incircle_exact(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  Expansion adx = diff(a.x, d.x), ady = diff(a.y, d.y);
  Expansion bdx = diff(b.x, d.x), bdy = diff(b.y, d.y);
  Expansion cdx = diff(c.x, d.x), cdy = diff(c.y, d.y);
  Expansion alift = add(mul(adx, adx), mul(ady, ady));
  Expansion blift = add(mul(bdx, bdx), mul(bdy, bdy));
  Expansion clift = add(mul(cdx, cdx), mul(cdy, cdy));
  Expansion bc = add(mul(bdx, cdy), negate(mul(bdy, cdx)));
  Expansion ca = add(mul(cdx, ady), negate(mul(cdy, adx)));
  Expansion ab = add(mul(adx, bdy), negate(mul(ady, bdx)));
  Expansion det = add(add(mul(alift, bc), mul(blift, ca)), mul(clift, ab));
  return sign(det);
}

}  // namespace

int orient2d(Vec2 a, Vec2 b, Vec2 c) {
  double detleft = (a.x - c.x) * (b.y - c.y);
  double detright = (a.y - c.y) * (b.x - c.x);
  double det = detleft - detright;
  double errbound = kCcwBound * (std::abs(detleft) + std::abs(detright));
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  g_orient_exact.fetch_add(1, std::memory_order_relaxed);
  return orient_exact(a, b, c);
}

int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  double adx = a.x - d.x, ady = a.y - d.y;
  double bdx = b.x - d.x, bdy = b.y - d.y;
  double cdx = c.x - d.x, cdy = c.y - d.y;

  double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  double cdxady = cdx * ady, adxcdy = adx * cdy;
  double adxbdy = adx * bdy, bdxady = bdx * ady;
  double alift = adx * adx + ady * ady;
  double blift = bdx * bdx + bdy * bdy;
  double clift = cdx * cdx + cdy * cdy;

  double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                     (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                     (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  double errbound = kIccBound * permanent;
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  g_incircle_exact.fetch_add(1, std::memory_order_relaxed);
  return incircle_exact(a, b, c, d);
}

FilterStats filter_stats() {
  return {g_orient_exact.load(), g_incircle_exact.load()};
}

}  // namespace palmtess::predicates
