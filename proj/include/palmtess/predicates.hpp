#pragma once

#include "palmtess/geometry.hpp"

namespace palmtess::predicates {

/// Sign of the orientation determinant of (a, b, c): +1 for a left turn, -1 right, 0 collinear.
/// Exact for all finite double inputs.
int orient2d(Vec2 a, Vec2 b, Vec2 c);

/// +1 if d lies strictly inside the circle through a, b, c (CCW), -1 outside, 0 on it.
/// Exact for all finite double inputs.
int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Counters for how often the floating-point filter was inconclusive (diagnostics only).
struct FilterStats {
  unsigned long long orient_exact = 0;
  unsigned long long incircle_exact = 0;
};
FilterStats filter_stats();

}  // namespace palmtess::predicates
