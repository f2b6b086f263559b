#include "palmtess/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "palmtess/spatial_index.hpp"
#include "palmtess/union_find.hpp"

namespace palmtess {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

Rect lattice_rect(std::array<int, 2> x, double R) {
  return {x[0] * R, x[1] * R, x[0] * R + R, x[1] * R + R};
}

// Margin between the sampled window and the region whose cells are treated as certified.
constexpr double kCertMargin = 3.0;

double cell_size_for(const PointConfiguration& c) {
  return c.window().side() / std::sqrt(std::max<double>(1.0, static_cast<double>(c.size())));
}

struct PolyBox {
  double x0, y0, x1, y1;
};

// Uniform bucket grid over rectangles; a query returns every id whose box meets the query box.
class BucketIndex {
 public:
  BucketIndex(const Rect& domain, double cell) : dom_(domain), cell_(cell) {
    nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((dom_.x1 - dom_.x0) / cell_)));
    ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((dom_.y1 - dom_.y0) / cell_)));
    buckets_.resize(nx_ * ny_);
  }

  void insert(std::size_t id, const Rect& b) {
    auto [i0, i1, j0, j1] = span(b);
    for (std::size_t j = j0; j <= j1; ++j)
      for (std::size_t i = i0; i <= i1; ++i) buckets_[j * nx_ + i].push_back(id);
  }

  std::vector<std::size_t> query(const Rect& b) const {
    // Items and queries outside the domain clamp to the border buckets, so results stay a superset.
    std::vector<std::size_t> out;
    auto [i0, i1, j0, j1] = span(b);
    for (std::size_t j = j0; j <= j1; ++j)
      for (std::size_t i = i0; i <= i1; ++i) {
        const auto& v = buckets_[j * nx_ + i];
        out.insert(out.end(), v.begin(), v.end());
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::array<std::size_t, 4> span(const Rect& b) const {
    auto clampi = [](double v, std::size_t n) {
      if (!(v > 0.0)) return std::size_t{0};
      return std::min(n - 1, static_cast<std::size_t>(v));
    };
    return {clampi((b.x0 - dom_.x0) / cell_, nx_), clampi((b.x1 - dom_.x0) / cell_, nx_),
            clampi((b.y0 - dom_.y0) / cell_, ny_), clampi((b.y1 - dom_.y0) / cell_, ny_)};
  }

  Rect dom_;
  double cell_;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

// Geometry shared by all site queries on one complex.
class SiteGeometry {
 public:
  explicit SiteGeometry(const DelaunayComplex& dc)
      : dc_(dc),
        grid_(dc.config(), cell_size_for(dc.config())),
        cells_(Rect::of(dc.config().window()), 4.0 * cell_size_for(dc.config())),
        vertices_(Rect::of(dc.config().window()), 4.0 * cell_size_for(dc.config())),
        segments_(Rect::of(dc.config().window()), 4.0 * cell_size_for(dc.config())),
        nuclei_(Rect::of(dc.config().window()), 4.0 * cell_size_for(dc.config())) {
    if (!dc.has_clipped_cells()) throw Error(Errc::invalid_input, "complex was built without clipped cells");
    boxes_.reserve(dc.size());
    for (std::size_t i = 0; i < dc.size(); ++i) {
      PolyBox b{kInfD, kInfD, -kInfD, -kInfD};
      for (Vec2 v : dc.clipped_cell(i)) {
        b.x0 = std::min(b.x0, v.x);
        b.y0 = std::min(b.y0, v.y);
        b.x1 = std::max(b.x1, v.x);
        b.y1 = std::max(b.y1, v.y);
      }
      boxes_.push_back(b);
      if (b.x0 <= b.x1) cells_.insert(i, {b.x0, b.y0, b.x1, b.y1});
      Vec2 c = to_vec2(dc.config()[i]);
      nuclei_.insert(i, {c.x, c.y, c.x, c.y});
    }
    const auto& vv = dc.voronoi_vertices();
    for (std::size_t i = 0; i < vv.size(); ++i) vertices_.insert(i, {vv[i].x, vv[i].y, vv[i].x, vv[i].y});
    const auto& ve = dc.voronoi_edges();
    for (std::size_t i = 0; i < ve.size(); ++i) {
      const auto& e = ve[i];
      if (e.is_ray || e.is_line) {
        unbounded_.push_back(i);
        continue;
      }
      segments_.insert(i, {std::min(e.p.x, e.q.x), std::min(e.p.y, e.q.y), std::max(e.p.x, e.q.x),
                           std::max(e.p.y, e.q.y)});
    }
  }

  const DelaunayComplex& complex() const { return dc_; }
  double nearest(Vec2 q) const { return grid_.nearest_distance(q); }

  // Cells whose clipped polygon is within distance r of the rectangle (closed).
  std::vector<std::size_t> cells_near(const Rect& rect, double r) const {
    std::vector<std::size_t> out;
    for (std::size_t i : cells_.query(rect.expanded(r)))
      if (polygon_rect_distance(dc_.clipped_cell(i), rect) <= r) out.push_back(i);
    return out;
  }

  // Max of dist(y, xi) over the closure of B_r(rect). Exact whenever the answer is compared
  // against `threshold`; values above the threshold may be underestimated.
  double max_distance(const Rect& rect, double r, double threshold) const;

 private:
  const DelaunayComplex& dc_;
  GridIndex grid_;
  std::vector<PolyBox> boxes_;
  BucketIndex cells_, vertices_, segments_, nuclei_;
  std::vector<std::size_t> unbounded_;  // rays and lines, always scanned
};

double SiteGeometry::max_distance(const Rect& rc, double r, double threshold) const {
  if (dc_.size() == 0) return kInfD;
  double best = 0.0;
  auto consider = [&](Vec2 y) { best = std::max(best, nearest(y)); };

  const Vec2 corners[4] = {{rc.x0, rc.y0}, {rc.x1, rc.y0}, {rc.x1, rc.y1}, {rc.x0, rc.y1}};
  const Vec2 outward[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  // Flat sides of the rounded box: (start, end), axis-aligned.
  const Vec2 side_a[4] = {{rc.x0, rc.y0 - r}, {rc.x1 + r, rc.y0}, {rc.x1, rc.y1 + r}, {rc.x0 - r, rc.y1}};
  const Vec2 side_b[4] = {{rc.x1, rc.y0 - r}, {rc.x1 + r, rc.y1}, {rc.x0, rc.y1 + r}, {rc.x0 - r, rc.y0}};
  for (int k = 0; k < 4; ++k) {
    consider(side_a[k]);
    consider(side_b[k]);
  }

  const double tol = 1e-12 * std::max(1.0, r);
  auto on_arc = [&](int k, Vec2 y) {
    return outward[k].x * (y.x - corners[k].x) >= -tol && outward[k].y * (y.y - corners[k].y) >= -tol;
  };

  // (a) Voronoi vertices inside the region.
  const Rect bb = rc.expanded(r);
  for (std::size_t i : vertices_.query(bb)) {
    Vec2 v = dc_.voronoi_vertices()[i];
    if (rc.distance_to(v) <= r) consider(v);
  }

  // (b) Voronoi edges crossing the region boundary.
  std::vector<std::size_t> edge_ids = segments_.query(bb);
  edge_ids.insert(edge_ids.end(), unbounded_.begin(), unbounded_.end());
  for (std::size_t id : edge_ids) {
    const auto& e = dc_.voronoi_edges()[id];
    Vec2 p = e.p, d;
    double t0, t1;
    if (e.is_line) {
      d = e.dir;
      t0 = -kInfD;
      t1 = kInfD;
    } else if (e.is_ray) {
      d = e.dir;
      t0 = 0.0;
      t1 = kInfD;
    } else {
      d = e.q - e.p;
      t0 = 0.0;
      t1 = 1.0;
    }
    // Restrict to the bounding box of the region first.
    {
      double a0 = t0, a1 = t1;
      const double pp[4] = {-d.x, d.x, -d.y, d.y};
      const double qq[4] = {p.x - bb.x0, bb.x1 - p.x, p.y - bb.y0, bb.y1 - p.y};
      bool hit = true;
      for (int i = 0; i < 4 && hit; ++i) {
        if (pp[i] == 0.0) {
          if (qq[i] < 0.0) hit = false;
          continue;
        }
        double t = qq[i] / pp[i];
        if (pp[i] < 0.0) a0 = std::max(a0, t);
        else a1 = std::min(a1, t);
        if (a0 > a1) hit = false;
      }
      if (!hit) continue;
      t0 = a0;
      t1 = a1;
    }
    // Flat sides.
    for (int k = 0; k < 4; ++k) {
      Vec2 a = side_a[k], b = side_b[k];
      if (a.y == b.y) {
        if (d.y != 0.0) {
          double t = (a.y - p.y) / d.y;
          double x = p.x + t * d.x;
          if (t >= t0 && t <= t1 && x >= std::min(a.x, b.x) && x <= std::max(a.x, b.x)) consider({x, a.y});
        } else if (p.y == a.y) {
          for (double t : {t0, t1}) consider({std::clamp(p.x + t * d.x, std::min(a.x, b.x), std::max(a.x, b.x)), a.y});
        }
      } else {
        if (d.x != 0.0) {
          double t = (a.x - p.x) / d.x;
          double y = p.y + t * d.y;
          if (t >= t0 && t <= t1 && y >= std::min(a.y, b.y) && y <= std::max(a.y, b.y)) consider({a.x, y});
        } else if (p.x == a.x) {
          for (double t : {t0, t1}) consider({a.x, std::clamp(p.y + t * d.y, std::min(a.y, b.y), std::max(a.y, b.y))});
        }
      }
    }
    // Quarter arcs.
    for (int k = 0; k < 4; ++k) {
      Vec2 w = p - corners[k];
      double A = d.dot(d), B = d.dot(w), C = w.dot(w) - r * r;
      double disc = B * B - A * C;
      if (A == 0.0 || disc < 0.0) continue;
      double sq = std::sqrt(disc);
      for (double t : {(-B - sq) / A, (-B + sq) / A}) {
        if (t < t0 || t > t1) continue;
        Vec2 y = p + d * t;
        if (on_arc(k, y)) consider(y);
      }
    }
  }

  // (d) Farthest arc point from each nearby nucleus.
  const double reach = r + threshold;
  const std::vector<std::size_t> near =
      std::isfinite(reach) ? nuclei_.query(rc.expanded(reach)) : std::vector<std::size_t>{};
  for (int k = 0; k < 4; ++k) {
    Vec2 q = corners[k];
    auto visit = [&](std::size_t i) {
      Vec2 c = to_vec2(dc_.config()[i]);
      Vec2 u = q - c;
      double len = u.norm();
      if (len == 0.0 || len > reach) return;
      Vec2 y = q + u * (r / len);
      if (on_arc(k, y)) consider(y);
    };
    if (std::isfinite(reach)) {
      for (std::size_t i : near) visit(i);
    } else {
      for (std::size_t i = 0; i < dc_.size(); ++i) visit(i);
    }
  }
  return best;
}

bool meets_boundary(const Polygon& P, const Rect& rc) {
  if (polygon_rect_distance(P, rc) > 0.0) return false;
  for (Vec2 v : P)
    if (!(v.x > rc.x0 && v.x < rc.x1 && v.y > rc.y0 && v.y < rc.y1)) return true;
  return false;
}

bool leaves_thickening(const Polygon& P, const Rect& rc, double r) {
  for (Vec2 v : P)
    if (rc.distance_to(v) >= r) return true;
  return false;
}

BoxOpenResult box_open_impl(const SiteGeometry& g, std::array<int, 2> x, double R, const BondConfiguration& W) {
  const DelaunayComplex& dc = g.complex();
  const Box cx = Box::lattice_box(std::span<const int>(x.data(), 2), R);
  if (!dc.config().window().contains(cx.expanded(R / 2.0)))
    throw Error(Errc::locality_violation, "geometry window does not cover B_{R/2}(C_x) for site (" +
                                              std::to_string(x[0]) + "," + std::to_string(x[1]) + ")");
  const Rect rc = lattice_rect(x, R);
  const double r = R / 4.0;
  BoxOpenResult res;
  res.max_empty_distance = g.max_distance(rc, r, r);
  res.ambiguous = std::abs(res.max_empty_distance - r) < R / 512.0;
  if (res.max_empty_distance >= r) {
    res.open = true;
    res.via = OpenVia::empty_ball;
    return res;
  }

  auto cand = g.cells_near(rc, r);
  std::vector<char> in_cand(dc.size(), 0), seen(dc.size(), 0);
  for (auto i : cand) in_cand[i] = 1;
  std::deque<std::size_t> queue;
  for (auto i : cand) {
    if (meets_boundary(dc.clipped_cell(i), rc)) {
      seen[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    if (leaves_thickening(dc.clipped_cell(u), rc, r)) {
      res.open = true;
      res.via = OpenVia::open_path;
      return res;
    }
    for (const auto& f : dc.cell(u).faces) {
      std::size_t v = f.neighbor;
      if (!in_cand[v] || seen[v] || f.clipped_empty) continue;
      if (!W.is_open(u, v)) continue;
      if (segment_rect_distance(f.a, f.b, rc) >= r) continue;
      seen[v] = 1;
      queue.push_back(v);
    }
  }
  res.via = OpenVia::closed;
  return res;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && (h[k - 1] - h[k - 2]).cross(pts[i - 1] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

double diameter_of(const std::vector<Vec2>& pts) {
  auto h = convex_hull(pts);
  double best = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i + 1; j < h.size(); ++j) best = std::max(best, (h[i] - h[j]).norm());
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------

bool BondConfiguration::is_open(std::size_t i, std::size_t j) const {
  auto e = complex_->edge_index(i, j);
  return e && open_[*e] != 0;
}

std::size_t BondConfiguration::open_count() const {
  return static_cast<std::size_t>(std::count(open_.begin(), open_.end(), 1));
}

std::vector<double> edge_uniforms(const DelaunayComplex& complex, const RngStream& rng) {
  std::vector<double> u;
  u.reserve(complex.edges().size());
  const auto& cfg = complex.config();
  for (auto [i, j] : complex.edges()) {
    std::uint64_t a = cfg.label(i), b = cfg.label(j);
    if (a > b) std::swap(a, b);
    u.push_back(rng.uniform_for(a, b, 3));
  }
  return u;
}

BondConfiguration bonds_from_uniforms(const DelaunayComplex& complex, const std::vector<double>& u, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_parameter, "p must lie in [0,1]");
  std::vector<unsigned char> open(u.size());
  for (std::size_t e = 0; e < u.size(); ++e) open[e] = u[e] < p ? 1 : 0;
  return BondConfiguration(complex, std::move(open));
}

BondConfiguration sample_bonds(const DelaunayComplex& complex, double p, const RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_parameter, "p must lie in [0,1]");
  return bonds_from_uniforms(complex, edge_uniforms(complex, rng), p);
}

ClusterDecomposition clusters(const DelaunayComplex& complex, const BondConfiguration& W, std::optional<Box> core,
                              bool interior_only) {
  const std::size_t n = complex.size();
  UnionFind uf(n);
  const auto& edges = complex.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (W.edge_open(e) &&
        (!interior_only || (complex.interior_valid(edges[e].first) && complex.interior_valid(edges[e].second))))
      uf.unite(edges[e].first, edges[e].second);
  ClusterDecomposition cd;
  cd.component.assign(n, 0);
  std::vector<long> dense(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t root = uf.find(i);
    if (dense[root] < 0) {
      dense[root] = static_cast<long>(cd.sizes.size());
      cd.sizes.push_back(0);
    }
    cd.component[i] = static_cast<std::size_t>(dense[root]);
    ++cd.sizes[cd.component[i]];
  }
  for (auto s : cd.sizes) cd.largest = std::max(cd.largest, s);

  const Box& w = complex.config().window();
  const Box c = core ? *core : Box(w.center(), 0.9 * w.half_side());
  const int d = complex.config().dim();
  // touch[k][side] per component
  std::vector<unsigned char> touch(cd.sizes.size() * static_cast<std::size_t>(2 * d), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = complex.config()[i];
    for (int k = 0; k < d; ++k) {
      std::size_t base = cd.component[i] * static_cast<std::size_t>(2 * d) + static_cast<std::size_t>(2 * k);
      if (p[k] <= c.lo(k)) touch[base] = 1;
      if (p[k] >= c.hi(k)) touch[base + 1] = 1;
    }
  }
  for (std::size_t comp = 0; comp < cd.sizes.size() && !cd.spanning; ++comp)
    for (int k = 0; k < d; ++k) {
      std::size_t base = comp * static_cast<std::size_t>(2 * d) + static_cast<std::size_t>(2 * k);
      if (touch[base] && touch[base + 1]) cd.spanning = true;
    }
  return cd;
}

std::vector<double> cluster_diameters(const DelaunayComplex& complex, const ClusterDecomposition& cd) {
  std::vector<std::vector<Vec2>> members(cd.sizes.size());
  for (std::size_t i = 0; i < complex.size(); ++i)
    if (cd.sizes[cd.component[i]] > 1) members[cd.component[i]].push_back(to_vec2(complex.config()[i]));
  std::vector<double> out(cd.sizes.size(), 0.0);
  for (std::size_t c = 0; c < members.size(); ++c)
    if (members[c].size() > 1) out[c] = diameter_of(members[c]);
  return out;
}

const char* to_string(OpenVia v) {
  switch (v) {
    case OpenVia::empty_ball: return "empty_ball";
    case OpenVia::open_path: return "open_path";
    case OpenVia::closed: return "closed";
  }
  return "closed";
}

double max_distance_to_points(const DelaunayComplex& complex, const Box& box, double r) {
  SiteGeometry g(complex);
  const Rect rc = Rect::of(box);
  // Use an unbounded reach so the reported value is exact.
  return g.max_distance(rc, r, kInfD);
}

BoxOpenResult box_open(std::array<int, 2> x, double R, const DelaunayComplex& complex, const BondConfiguration& W) {
  if (!(R > 0.0)) throw Error(Errc::invalid_parameter, "R must be positive");
  SiteGeometry g(complex);
  return box_open_impl(g, x, R, W);
}

Box LatticeWindow::region(double R) const {
  if (width() != height()) throw Error(Errc::invalid_parameter, "lattice window must be square");
  double half = 0.5 * width() * R;
  return Box(Point(lo0 * R + half, lo1 * R + half), half);
}

Box LatticeWindow::geometry_window(double R, double margin) const {
  return region(R).expanded(R / 2.0 + margin);
}

std::size_t LatticeField::open_count() const {
  return static_cast<std::size_t>(std::count(eta.begin(), eta.end(), 1));
}

std::vector<long> LatticeField::components(std::vector<std::size_t>* sizes) const {
  UnionFind uf(eta.size());
  for (int b = window.lo1; b <= window.hi1; ++b)
    for (int a = window.lo0; a <= window.hi0; ++a) {
      if (!at(a, b)) continue;
      if (a < window.hi0 && at(a + 1, b)) uf.unite(window.index(a, b), window.index(a + 1, b));
      if (b < window.hi1 && at(a, b + 1)) uf.unite(window.index(a, b), window.index(a, b + 1));
    }
  std::vector<long> id(eta.size(), -1), dense(eta.size(), -1);
  if (sizes) sizes->clear();
  long next = 0;
  for (std::size_t s = 0; s < eta.size(); ++s) {
    if (!eta[s]) continue;
    std::size_t r = uf.find(s);
    if (dense[r] < 0) {
      dense[r] = next++;
      if (sizes) sizes->push_back(0);
    }
    id[s] = dense[r];
    if (sizes) ++(*sizes)[static_cast<std::size_t>(id[s])];
  }
  return id;
}

bool LatticeField::spanning() const {
  auto id = components();
  long ncomp = 0;
  for (long v : id) ncomp = std::max(ncomp, v + 1);
  std::vector<unsigned char> l(static_cast<std::size_t>(ncomp)), rgt(l), bot(l), top(l);
  for (int b = window.lo1; b <= window.hi1; ++b)
    for (int a = window.lo0; a <= window.hi0; ++a) {
      long c = id[window.index(a, b)];
      if (c < 0) continue;
      auto uc = static_cast<std::size_t>(c);
      if (a == window.lo0) l[uc] = 1;
      if (a == window.hi0) rgt[uc] = 1;
      if (b == window.lo1) bot[uc] = 1;
      if (b == window.hi1) top[uc] = 1;
    }
  for (std::size_t c = 0; c < l.size(); ++c)
    if ((l[c] && rgt[c]) || (bot[c] && top[c])) return true;
  return false;
}

LatticeField eta_field(const DelaunayComplex& complex, const BondConfiguration& W, double R,
                       const LatticeWindow& window) {
  if (!(R > 0.0)) throw Error(Errc::invalid_parameter, "R must be positive");
  SiteGeometry g(complex);
  LatticeField f;
  f.R = R;
  f.window = window;
  f.eta.assign(window.count(), 0);
  for (int b = window.lo1; b <= window.hi1; ++b)
    for (int a = window.lo0; a <= window.hi0; ++a)
      f.eta[window.index(a, b)] = box_open_impl(g, {a, b}, R, W).open ? 1 : 0;
  return f;
}

EventsA123 check_events_A123(const DelaunayComplex& complex, double R) {
  if (!(R > 0.0)) throw Error(Errc::invalid_parameter, "R must be positive");
  const int origin[2] = {0, 0};
  const Box c0 = Box::lattice_box(origin, R);
  if (!complex.config().window().contains(c0.expanded(7.0 * R / 8.0)))
    throw Error(Errc::locality_violation, "geometry window does not cover B_{7R/8}(C_0)");
  SiteGeometry g(complex);
  const Rect rc = Rect::of(c0);
  const double bound = std::pow(R, complex.config().dim() + 1);
  EventsA123 ev;
  ev.max_empty_distance = g.max_distance(rc, 0.75 * R, R / 8.0);
  ev.A1 = ev.max_empty_distance < R / 8.0;
  for (auto i : g.cells_near(rc, R / 4.0)) {
    const Polygon& P = complex.clipped_cell(i);
    if (polygon_rect_distance(P, rc) < R / 4.0) ev.max_degree = std::max(ev.max_degree, complex.degree(i));
    if (meets_boundary(P, rc)) ++ev.boundary_cells;
  }
  ev.A2 = static_cast<double>(ev.max_degree) <= bound;
  ev.A3 = static_cast<double>(ev.boundary_cells) <= bound;
  return ev;
}

bool small_cells_check(const DelaunayComplex& complex, double R) {
  auto ev = check_events_A123(complex, R);
  if (!ev.A1) return true;
  const int origin[2] = {0, 0};
  const Box c0 = Box::lattice_box(origin, R);
  const Rect rc = Rect::of(c0);
  const double tol = 1e-9 * R;
  for (std::size_t i = 0; i < complex.size(); ++i) {
    const Point& x = complex.config()[i];
    const Polygon& P = complex.clipped_cell(i);
    bool near = c0.distance_to(x) < 5.0 * R / 8.0;
    if (near) {
      for (Vec2 v : P)
        if ((v - to_vec2(x)).norm() > R / 8.0 + tol) return false;
    }
    if (polygon_rect_distance(P, rc) < R / 2.0 && !near) return false;
  }
  return true;
}

InclusionReport inclusion_check(const DelaunayComplex& complex, const BondConfiguration& W, double R,
                                const LatticeWindow& window, const LatticeField& eta, std::optional<double> D) {
  const Box region = window.region(R);
  const Rect L = Rect::of(region);
  InclusionReport rep;
  rep.threshold = D ? *D : std::max(region.half_side(), 2.0 * R);
  if (rep.threshold < 2.0 * R) throw Error(Errc::invalid_parameter, "diameter threshold must be >= 2R");
  if (!complex.config().window().contains(window.geometry_window(R, 0.0)))
    throw Error(Errc::locality_violation, "geometry window does not cover the lattice window");

  const std::size_t n = complex.size();
  std::vector<char> keep(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Polygon& P = complex.clipped_cell(i);
    keep[i] = !P.empty() && polygon_rect_max_distance(P, L) == 0.0;
  }
  UnionFind uf(n);
  const auto& edges = complex.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (W.edge_open(e) && keep[edges[e].first] && keep[edges[e].second]) uf.unite(edges[e].first, edges[e].second);
  std::vector<std::vector<std::size_t>> comps(n);
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) comps[uf.find(i)].push_back(i);

  std::vector<std::size_t> eta_sizes;
  auto eta_id = eta.components(&eta_sizes);
  for (const auto& members : comps) {
    if (members.size() < 2) continue;
    std::vector<Vec2> pts;
    for (auto i : members) pts.push_back(to_vec2(complex.config()[i]));
    if (diameter_of(pts) < rep.threshold) continue;
    rep.vacuous = false;
    ++rep.large_components;

    long comp = -2;
    bool ok = true;
    for (auto i : members) {
      const Polygon& P = complex.clipped_cell(i);
      double x0 = kInfD, y0 = kInfD, x1 = -kInfD, y1 = -kInfD;
      for (Vec2 v : P) {
        x0 = std::min(x0, v.x);
        y0 = std::min(y0, v.y);
        x1 = std::max(x1, v.x);
        y1 = std::max(y1, v.y);
      }
      for (int b = static_cast<int>(std::floor(y0 / R)) - 1; b <= static_cast<int>(std::floor(y1 / R)) + 1; ++b)
        for (int a = static_cast<int>(std::floor(x0 / R)) - 1; a <= static_cast<int>(std::floor(x1 / R)) + 1; ++a) {
          if (!window.contains(a, b)) continue;
          if (polygon_rect_distance(P, lattice_rect({a, b}, R)) > 0.0) continue;
          long id = eta_id[window.index(a, b)];
          if (id < 0) ok = false;
          else if (comp == -2) comp = id;
          else if (comp != id) ok = false;
        }
    }
    if (ok && comp >= 0) {
      // Lattice diameter of the eta-component.
      std::vector<Vec2> sites;
      for (int b = window.lo1; b <= window.hi1; ++b)
        for (int a = window.lo0; a <= window.hi0; ++a)
          if (eta_id[window.index(a, b)] == comp) sites.push_back({static_cast<double>(a), static_cast<double>(b)});
      if (diameter_of(sites) < rep.threshold / R - 2.0) ok = false;
    } else {
      ok = false;
    }
    if (!ok) rep.pass = false;
  }
  return rep;
}

Box phi_window(double R) {
  const int origin[2] = {0, 0};
  return Box::lattice_box(origin, R).expanded(7.0 * R / 8.0 + R / 4.0);
}

std::vector<PhiRow> estimate_phi(const ProcessSpec& spec, const std::vector<double>& p_grid, double R,
                                 const MonteCarloOptions& mc, std::vector<PhiReplicate>* per_replicate) {
  if (p_grid.empty()) throw Error(Errc::invalid_parameter, "empty p grid");
  for (double p : p_grid)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_parameter, "p must lie in [0,1]");
  spec.validate();
  const Box window = phi_window(R);
  const Box span_core(window.center(), std::max(0.5 * window.half_side(), window.half_side() - kCertMargin));
  std::vector<PhiReplicate> reps(mc.replicates);
  parallel_for(mc.replicates, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i, Purpose::sample);
    auto cfg = sample(spec, window, rng);
    auto dc = build_delaunay(cfg);
    auto u = edge_uniforms(dc, RngStream(mc.seed, i, Purpose::bonds));
    SiteGeometry g(dc);
    PhiReplicate& rep = reps[i];
    rep.events = check_events_A123(dc, R);
    for (double p : p_grid) {
      auto W = bonds_from_uniforms(dc, u, p);
      rep.open.push_back(box_open_impl(g, {0, 0}, R, W).open ? 1 : 0);
      auto cd = clusters(dc, W, span_core, true);
      rep.spanning.push_back(cd.spanning ? 1 : 0);
      rep.largest.push_back(cd.largest);
    }
  });

  std::vector<PhiRow> rows;
  const double d = 2.0;
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    PhiRow row;
    row.p = p_grid[k];
    row.R = R;
    row.n_replicates = mc.replicates;
    row.seed = mc.seed;
    RunningStats open, notA, diff, span;
    for (const auto& r : reps) {
      double o = r.open[k];
      double na = r.events.all() ? 0.0 : 1.0;
      open.add(o);
      notA.add(na);
      diff.add(o - na);
      span.add(r.spanning[k]);
    }
    row.phi = open.mean();
    row.phi_se = open.stderr_mean();
    row.p_not_A = notA.mean();
    const double slack = 2.0 * row.p * std::pow(R, d + 1.0);
    row.bound = row.p_not_A + slack;
    row.diff = diff.mean();
    row.diff_se = diff.stderr_mean();
    row.bound_applicable = row.p * std::pow(R, d + 1.0) <= 0.5;
    row.bound_pass = !row.bound_applicable || row.diff <= slack + 3.0 * row.diff_se;
    row.spanning_frequency = span.mean();
    rows.push_back(row);
  }
  if (per_replicate) *per_replicate = std::move(reps);
  return rows;
}

std::vector<SepRow> sep_check(const ProcessSpec& spec, const ConductanceLaw& law, const std::vector<double>& t0_grid,
                              double window_half_side, const MonteCarloOptions& mc) {
  if (t0_grid.empty()) throw Error(Errc::invalid_parameter, "empty t0 grid");
  const double cstar = law.upper_bound();  // rejects unbounded laws
  spec.validate();
  // The sample extends past the analysis window so cells inside it are certified.
  const Box window(Point(0.0, 0.0), window_half_side);
  const Box sample_window = window.expanded(kCertMargin);
  const Box core(Point(0.0, 0.0), 0.9 * window_half_side);
  struct Rep {
    std::vector<unsigned char> spanning;
    std::vector<double> diameter;
    std::vector<std::size_t> largest;
    std::vector<std::vector<std::size_t>> sizes;
  };
  std::vector<Rep> reps(mc.replicates);
  parallel_for(mc.replicates, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i, Purpose::sample);
    auto cfg = sample(spec, sample_window, rng);
    auto dc = build_delaunay(cfg, BuildOptions{false});
    auto field = assign_conductances(dc, law, RngStream(mc.seed, i, Purpose::conductance));
    auto u = edge_uniforms(dc, RngStream(mc.seed, i, Purpose::bonds));
    Rep& rep = reps[i];
    for (double t0 : t0_grid) {
      std::vector<unsigned char> open(u.size());
      for (std::size_t e = 0; e < u.size(); ++e) open[e] = u[e] < 1.0 - std::exp(-t0 * field.edge_weight(e)) ? 1 : 0;
      BondConfiguration W(dc, std::move(open));
      auto cd = clusters(dc, W, core, true);
      auto diam = cluster_diameters(dc, cd);
      rep.spanning.push_back(cd.spanning ? 1 : 0);
      rep.diameter.push_back(diam.empty() ? 0.0 : *std::max_element(diam.begin(), diam.end()));
      rep.largest.push_back(cd.largest);
      rep.sizes.push_back(cd.sizes);
    }
  });

  std::vector<SepRow> rows;
  for (std::size_t k = 0; k < t0_grid.size(); ++k) {
    SepRow row;
    row.t0 = t0_grid[k];
    row.keep_probability_max = 1.0 - std::exp(-row.t0 * cstar);
    row.n_replicates = mc.replicates;
    row.seed = mc.seed;
    RunningStats span, largest;
    for (const auto& r : reps) {
      span.add(r.spanning[k]);
      largest.add(static_cast<double>(r.largest[k]));
      row.max_largest_diameter = std::max(row.max_largest_diameter, r.diameter[k]);
      for (auto s : r.sizes[k]) {
        if (row.size_histogram.size() <= s) row.size_histogram.resize(s + 1, 0);
        ++row.size_histogram[s];
      }
    }
    row.spanning_frequency = span.mean();
    row.mean_largest_size = largest.mean();
    row.subcritical = span.mean() == 0.0 && row.max_largest_diameter < 0.25 * window.side();
    rows.push_back(row);
  }
  return rows;
}

PointConfiguration locality_restriction(const PointConfiguration& config, std::array<int, 2> x, double R) {
  const Box cx = Box::lattice_box(std::span<const int>(x.data(), 2), R);
  return config.filtered([&](std::size_t i) { return cx.distance_to(config[i]) < R / 2.0; });
}

}  // namespace palmtess
