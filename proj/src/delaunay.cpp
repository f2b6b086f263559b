#include "palmtess/delaunay.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "palmtess/predicates.hpp"

namespace palmtess {

namespace {

using predicates::incircle;
using predicates::orient2d;

constexpr int kInf = -1;
constexpr double kInfLen = std::numeric_limits<double>::infinity();

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> n{};
};

inline int inf_slot(const Tri& t) {
  for (int i = 0; i < 3; ++i)
    if (t.v[static_cast<std::size_t>(i)] == kInf) return i;
  return -1;
}

// Incremental Bowyer-Watson with a vertex at infinity closing the hull.
class Triangulator {
 public:
  explicit Triangulator(const std::vector<Vec2>& pts) : p_(pts) {}

  // Returns false when every point is collinear.
  bool run() {
    const int n = static_cast<int>(p_.size());
    if (n < 3) return false;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(0x5eed1234abcdULL);
    std::shuffle(order.begin(), order.end(), gen);

    int i0 = order[0], i1 = order[1], i2 = -1;
    std::size_t pos2 = 0;
    for (std::size_t k = 2; k < order.size(); ++k) {
      if (orient2d(p_[ix(i0)], p_[ix(i1)], p_[ix(order[k])]) != 0) {
        i2 = order[k];
        pos2 = k;
        break;
      }
    }
    if (i2 < 0) return false;
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(pos2));
    if (orient2d(p_[ix(i0)], p_[ix(i1)], p_[ix(i2)]) < 0) std::swap(i1, i2);
    init(i0, i1, i2);
    for (std::size_t k = 2; k < order.size(); ++k) insert(order[k]);
    return true;
  }

  std::vector<Tri> tris;
  std::vector<char> alive;

 private:
  static std::size_t ix(int i) { return static_cast<std::size_t>(i); }
  Vec2 P(int i) const { return p_[ix(i)]; }
  bool ghost(int t) const { return inf_slot(tris[ix(t)]) >= 0; }

  int alloc() {
    if (!free_.empty()) {
      int t = free_.back();
      free_.pop_back();
      alive[ix(t)] = 1;
      return t;
    }
    tris.emplace_back();
    alive.push_back(1);
    mark_.push_back(0);
    return static_cast<int>(tris.size()) - 1;
  }

  void init(int a, int b, int c) {
    int t0 = alloc(), g0 = alloc(), g1 = alloc(), g2 = alloc();
    tris[ix(t0)].v = {a, b, c};
    tris[ix(g0)].v = {b, a, kInf};
    tris[ix(g1)].v = {c, b, kInf};
    tris[ix(g2)].v = {a, c, kInf};
    const int ids[4] = {t0, g0, g1, g2};
    for (int t : ids) {
      for (int i = 0; i < 3; ++i) {
        int x = tris[ix(t)].v[ix((i + 1) % 3)], y = tris[ix(t)].v[ix((i + 2) % 3)];
        for (int s : ids) {
          if (s == t) continue;
          for (int j = 0; j < 3; ++j) {
            if (tris[ix(s)].v[ix((j + 1) % 3)] == y && tris[ix(s)].v[ix((j + 2) % 3)] == x)
              tris[ix(t)].n[ix(i)] = s;
          }
        }
      }
    }
    last_ = t0;
  }

  unsigned next_rand() {
    rs_ ^= rs_ << 13;
    rs_ ^= rs_ >> 17;
    rs_ ^= rs_ << 5;
    return rs_;
  }

  int locate(Vec2 q) {
    int t = last_;
    for (;;) {
      if (ghost(t)) return t;
      const Tri& T = tris[ix(t)];
      unsigned off = next_rand() % 3;
      bool moved = false;
      for (unsigned k = 0; k < 3; ++k) {
        unsigned i = (off + k) % 3;
        if (orient2d(P(T.v[(i + 1) % 3]), P(T.v[(i + 2) % 3]), q) < 0) {
          t = T.n[i];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
  }

  bool conflicts(int t, Vec2 q) const {
    const Tri& T = tris[ix(t)];
    int k = inf_slot(T);
    if (k < 0) return incircle(P(T.v[0]), P(T.v[1]), P(T.v[2]), q) > 0;
    Vec2 a = P(T.v[ix((k + 1) % 3)]);
    Vec2 b = P(T.v[ix((k + 2) % 3)]);
    int o = orient2d(a, b, q);
    if (o != 0) return o > 0;
    if (a.x != b.x) return std::min(a.x, b.x) < q.x && q.x < std::max(a.x, b.x);
    return std::min(a.y, b.y) < q.y && q.y < std::max(a.y, b.y);
  }

  void insert(int pi) {
    Vec2 q = P(pi);
    int seed = locate(q);
    ++stamp_;
    cavity_.clear();
    stack_.clear();
    stack_.push_back(seed);
    mark_[ix(seed)] = stamp_;
    while (!stack_.empty()) {
      int t = stack_.back();
      stack_.pop_back();
      cavity_.push_back(t);
      for (int nb : tris[ix(t)].n) {
        if (mark_[ix(nb)] == stamp_) continue;
        if (conflicts(nb, q)) {
          mark_[ix(nb)] = stamp_;
          stack_.push_back(nb);
        }
      }
    }

    bnd_.clear();
    for (int t : cavity_) {
      const Tri& T = tris[ix(t)];
      for (int i = 0; i < 3; ++i) {
        int nb = T.n[ix(i)];
        if (mark_[ix(nb)] != stamp_) bnd_.push_back({T.v[ix((i + 1) % 3)], T.v[ix((i + 2) % 3)], nb});
      }
    }
    for (int t : cavity_) {
      alive[ix(t)] = 0;
      free_.push_back(t);
    }

    new_.clear();
    for (const auto& e : bnd_) {
      int t = alloc();
      mark_[ix(t)] = 0;
      Tri& T = tris[ix(t)];
      T.v = {e.a, e.b, pi};
      T.n[2] = e.outside;
      Tri& O = tris[ix(e.outside)];
      for (int j = 0; j < 3; ++j) {
        if (O.v[ix(j)] != e.a && O.v[ix(j)] != e.b) {
          O.n[ix(j)] = t;
          break;
        }
      }
      new_.push_back(t);
    }
    for (std::size_t k = 0; k < new_.size(); ++k) {
      Tri& T = tris[ix(new_[k])];
      for (std::size_t m = 0; m < new_.size(); ++m) {
        const Tri& S = tris[ix(new_[m])];
        if (S.v[0] == T.v[1]) T.n[0] = new_[m];
        if (S.v[1] == T.v[0]) T.n[1] = new_[m];
      }
      if (inf_slot(T) < 0) last_ = new_[k];
    }
  }

  const std::vector<Vec2>& p_;
  std::vector<int> free_;
  std::vector<int> mark_;
  std::vector<int> cavity_, stack_, new_;
  struct BndRec {
    int a, b, outside;
  };
  std::vector<BndRec> bnd_;
  int stamp_ = 0;
  int last_ = 0;
  unsigned rs_ = 2463534242u;
};

Vec2 left_normal(Vec2 d) { return {-d.y, d.x}; }

// Liang-Barsky on p + t*d, t in [t0, t1]; returns false if nothing survives.
bool clip_param(Vec2 p, Vec2 d, const Rect& r, double& t0, double& t1) {
  const double pp[4] = {-d.x, d.x, -d.y, d.y};
  const double qq[4] = {p.x - r.x0, r.x1 - p.x, p.y - r.y0, r.y1 - p.y};
  for (int i = 0; i < 4; ++i) {
    if (pp[i] == 0.0) {
      if (qq[i] < 0.0) return false;
      continue;
    }
    double t = qq[i] / pp[i];
    if (pp[i] < 0.0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
  }
  return t0 <= t1;
}

VoronoiFace make_face(std::size_t nb, const VoronoiEdge& e, const Rect& win) {
  VoronoiFace f;
  f.neighbor = nb;
  double t0, t1;
  Vec2 d;
  if (e.is_line) {
    d = e.dir;
    t0 = -kInfLen;
    t1 = kInfLen;
    f.length = kInfLen;
  } else if (e.is_ray) {
    d = e.dir;
    t0 = 0.0;
    t1 = kInfLen;
    f.length = kInfLen;
  } else {
    d = e.q - e.p;
    t0 = 0.0;
    t1 = 1.0;
    f.length = d.norm();
  }
  if (!clip_param(e.p, d, win, t0, t1) || !std::isfinite(t0) || !std::isfinite(t1)) {
    f.clipped_empty = true;
    f.a = f.b = e.p;
  } else {
    f.a = e.p + d * t0;
    f.b = e.p + d * t1;
  }
  return f;
}

Polygon rect_polygon(const Rect& r) { return {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}}; }

}  // namespace

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
  Vec2 bp = b - a, cp = c - a;
  double d = 2.0 * bp.cross(cp);
  double b2 = bp.norm_sq(), c2 = cp.norm_sq();
  return {a.x + (cp.y * b2 - bp.y * c2) / d, a.y + (bp.x * c2 - cp.x * b2) / d};
}

bool DelaunayComplex::adjacent(std::size_t i, std::size_t j) const {
  const auto& a = adj_[i];
  return std::find(a.begin(), a.end(), j) != a.end();
}

std::optional<std::size_t> DelaunayComplex::edge_index(std::size_t i, std::size_t j) const {
  auto key = std::make_pair(std::min(i, j), std::max(i, j));
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::optional<std::size_t> DelaunayComplex::find_point(const Point& p) const {
  for (std::size_t i = 0; i < size(); ++i)
    if (config_[i] == p) return i;
  return std::nullopt;
}

DelaunayComplex build_delaunay(const PointConfiguration& config, const BuildOptions& opts) {
  if (config.dim() != 2)
    throw Error(Errc::unsupported_dimension, "Voronoi construction needs d = 2, got " +
                                                 std::to_string(config.dim()));
  config.validate();

  DelaunayComplex dc;
  dc.config_ = config;
  const std::size_t n = config.size();
  dc.eps_face_ = 1e-9 * config.window().half_side();
  const Rect win = Rect::of(config.window());
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = to_vec2(config[i]);

  dc.cells_.resize(n);
  dc.adj_.assign(n, {});
  dc.tri_adj_.assign(n, {});
  dc.interior_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) dc.cells_[i].nucleus = config[i];

  Triangulator tr(pts);
  if (!tr.run()) {
    // Collinear (or fewer than three points): cells are slabs, neighbors consecutive.
    std::vector<std::size_t> ord(n);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
      return pts[a].x != pts[b].x ? pts[a].x < pts[b].x : pts[a].y < pts[b].y;
    });
    for (std::size_t k = 0; k + 1 < ord.size(); ++k) {
      std::size_t a = ord[k], b = ord[k + 1];
      VoronoiEdge e;
      e.u = std::min(a, b);
      e.v = std::max(a, b);
      e.is_line = true;
      e.p = (pts[a] + pts[b]) * 0.5;
      e.dir = left_normal(pts[b] - pts[a]);
      dc.vedges_.push_back(e);
      dc.edges_.emplace_back(e.u, e.v);
      dc.adj_[a].push_back(b);
      dc.adj_[b].push_back(a);
      dc.tri_adj_[a].push_back(b);
      dc.tri_adj_[b].push_back(a);
      dc.cells_[a].faces.push_back(make_face(b, e, win));
      dc.cells_[b].faces.push_back(make_face(a, e, win));
    }
  } else {
    const auto& T = tr.tris;
    std::vector<Vec2> cc(T.size());
    std::vector<int> vert_tri(n, -1);
    for (std::size_t t = 0; t < T.size(); ++t) {
      if (!tr.alive[t]) continue;
      if (inf_slot(T[t]) < 0) {
        cc[t] = circumcenter(pts[static_cast<std::size_t>(T[t].v[0])],
                             pts[static_cast<std::size_t>(T[t].v[1])],
                             pts[static_cast<std::size_t>(T[t].v[2])]);
        dc.vvertices_.push_back(cc[t]);
        dc.triangles_.push_back({static_cast<std::size_t>(T[t].v[0]),
                                 static_cast<std::size_t>(T[t].v[1]),
                                 static_cast<std::size_t>(T[t].v[2])});
      }
      for (int v : T[t].v)
        if (v != kInf) vert_tri[static_cast<std::size_t>(v)] = static_cast<int>(t);
    }

    std::vector<std::pair<int, int>> star;  // (triangle, slot of v)
    for (std::size_t v = 0; v < n; ++v) {
      star.clear();
      const int iv = static_cast<int>(v);
      int t = vert_tri[v];
      do {
        const Tri& tt = T[static_cast<std::size_t>(t)];
        int k = 0;
        while (tt.v[static_cast<std::size_t>(k)] != iv) ++k;
        star.emplace_back(t, k);
        t = tt.n[static_cast<std::size_t>((k + 1) % 3)];
      } while (t != vert_tri[v]);

      VoronoiCell& cell = dc.cells_[v];
      cell.bounded = true;
      for (auto [st, k] : star)
        if (inf_slot(T[static_cast<std::size_t>(st)]) >= 0) cell.bounded = false;

      const std::size_t m = star.size();
      for (std::size_t i = 0; i < m; ++i) {
        auto [ti, ki] = star[i];
        auto [tp, kp] = star[(i + m - 1) % m];
        int b = T[static_cast<std::size_t>(ti)].v[static_cast<std::size_t>((ki + 1) % 3)];
        if (b == kInf) continue;
        const std::size_t ub = static_cast<std::size_t>(b);
        dc.tri_adj_[v].push_back(ub);
        if (ub < v) continue;  // each pair handled once, from the smaller index

        bool gi = inf_slot(T[static_cast<std::size_t>(ti)]) >= 0;
        bool gp = inf_slot(T[static_cast<std::size_t>(tp)]) >= 0;
        VoronoiEdge e;
        e.u = v;
        e.v = ub;
        if (!gi && !gp) {
          e.p = cc[static_cast<std::size_t>(tp)];
          e.q = cc[static_cast<std::size_t>(ti)];
        } else if (gi && !gp) {
          e.is_ray = true;
          e.p = cc[static_cast<std::size_t>(tp)];
          e.dir = left_normal(pts[ub] - pts[v]);
        } else if (gp && !gi) {
          e.is_ray = true;
          e.p = cc[static_cast<std::size_t>(ti)];
          e.dir = left_normal(pts[v] - pts[ub]);
        } else {
          continue;  // cannot happen outside the collinear case
        }
        dc.vedges_.push_back(e);
        VoronoiFace fv = make_face(ub, e, win);
        VoronoiFace fb = fv;
        fb.neighbor = v;
        if (fv.length > dc.eps_face_) {
          dc.edges_.emplace_back(v, ub);
          dc.adj_[v].push_back(ub);
          dc.adj_[ub].push_back(v);
          cell.faces.push_back(fv);
          dc.cells_[ub].faces.push_back(fb);
        }
      }

      if (cell.bounded) {
        for (auto [st, k] : star) {
          Vec2 c = cc[static_cast<std::size_t>(st)];
          if (cell.vertices.empty() || (c - cell.vertices.back()).norm() > dc.eps_face_)
            cell.vertices.push_back(c);
        }
        while (cell.vertices.size() > 1 &&
               (cell.vertices.front() - cell.vertices.back()).norm() <= dc.eps_face_)
          cell.vertices.pop_back();
        bool inside = true;
        for (Vec2 c : cell.vertices) {
          double r = (c - pts[v]).norm();
          if (c.x - r < win.x0 || c.x + r > win.x1 || c.y - r < win.y0 || c.y + r > win.y1) {
            inside = false;
            break;
          }
        }
        dc.interior_[v] = inside ? 1 : 0;
      }
    }
    std::sort(dc.edges_.begin(), dc.edges_.end());
  }
  // Faces were appended in star order for the smaller endpoint; keep neighbor lists sorted.
  for (auto& a : dc.adj_) std::sort(a.begin(), a.end());
  for (auto& a : dc.tri_adj_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  for (auto& c : dc.cells_)
    std::sort(c.faces.begin(), c.faces.end(),
              [](const VoronoiFace& x, const VoronoiFace& y) { return x.neighbor < y.neighbor; });

  if (opts.clipped_cells) {
    dc.clipped_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      Polygon poly = rect_polygon(win);
      for (std::size_t b : dc.tri_adj_[v]) {
        Vec2 nrm = pts[b] - pts[v];
        Vec2 mid = (pts[b] + pts[v]) * 0.5;
        poly = clip_halfplane(poly, nrm, nrm.dot(mid));
        if (poly.empty()) break;
      }
      dc.clipped_[v] = std::move(poly);
    }
  }
  return dc;
}

// ---------------------------------------------------------------------------

bool FundamentalRegion::contains(const Point& p) const {
  return std::any_of(balls.begin(), balls.end(), [&](const Ball& b) { return b.contains(p); });
}

double FundamentalRegion::reach() const {
  double r = 0.0;
  for (const auto& b : balls) r = std::max(r, distance(b.center, center) + b.radius);
  return r;
}

Box FundamentalRegion::bounding_box() const {
  const int d = center.dim();
  std::array<double, kMaxDim> lo{}, hi{};
  for (int k = 0; k < d; ++k) lo[static_cast<std::size_t>(k)] = hi[static_cast<std::size_t>(k)] = center[k];
  for (const auto& b : balls) {
    for (int k = 0; k < d; ++k) {
      lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], b.center[k] - b.radius);
      hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], b.center[k] + b.radius);
    }
  }
  Point c(d);
  double h = 0.0;
  for (int k = 0; k < d; ++k) {
    c[k] = 0.5 * (lo[static_cast<std::size_t>(k)] + hi[static_cast<std::size_t>(k)]);
    h = std::max(h, 0.5 * (hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]));
  }
  return Box(c, std::max(h, std::numeric_limits<double>::min()));
}

FundamentalRegion fundamental_region(std::size_t index, const DelaunayComplex& complex) {
  if (index >= complex.size()) throw Error(Errc::invalid_input, "point index out of range");
  const VoronoiCell& cell = complex.cell(index);
  if (!cell.bounded) throw Error(Errc::unbounded_cell, "cell " + std::to_string(index) + " is unbounded");
  FundamentalRegion fr;
  fr.center = cell.nucleus;
  for (Vec2 v : cell.vertices) {
    Point c = to_point(v);
    fr.balls.emplace_back(c, distance(c, cell.nucleus), true);
  }
  return fr;
}

bool orthant_criterion(const PointConfiguration& config, int lattice_range) {
  if (config.empty()) return false;
  const int d = config.dim();
  std::vector<int> x(static_cast<std::size_t>(d), -lattice_range);
  for (;;) {
    Point lp(d);
    for (int k = 0; k < d; ++k) lp[k] = x[static_cast<std::size_t>(k)];
    if (config.window().contains(lp)) {
      for (unsigned s = 0; s < (1u << d); ++s) {
        bool found = false;
        for (const Point& p : config.points()) {
          bool in = true;
          for (int k = 0; k < d && in; ++k) {
            double diff = p[k] - lp[k];
            in = (s >> k & 1u) ? diff < 0.0 : diff > 0.0;
          }
          if (in) {
            found = true;
            break;
          }
        }
        if (!found) return false;
      }
    }
    int k = 0;
    while (k < d && x[static_cast<std::size_t>(k)] == lattice_range) x[static_cast<std::size_t>(k++)] = -lattice_range;
    if (k == d) break;
    ++x[static_cast<std::size_t>(k)];
  }
  return true;
}

std::optional<std::vector<int>> cube_in_ball_witness(const Ball& ball, double ell, int d) {
  if (d < 1 || d > kMaxDim) throw Error(Errc::unsupported_dimension, "dimension " + std::to_string(d));
  if (ball.center.dim() != d) throw Error(Errc::invalid_input, "ball dimension mismatch");
  if (!(ell > 0.0)) throw Error(Errc::invalid_input, "ell must be positive");
  double cn = ball.center.norm();
  if (std::abs(cn - ball.radius) > 1e-9 * std::max(1.0, ball.radius))
    throw Error(Errc::invalid_input, "origin is not on the ball boundary");

  const double r2 = ball.radius * ball.radius;
  std::vector<int> z(static_cast<std::size_t>(d), -d);
  for (;;) {
    int linf = 0;
    for (int v : z) linf = std::max(linf, std::abs(v));
    if (linf == d) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        double c = z[static_cast<std::size_t>(k)] * ell;
        double e = std::max(std::abs(c - ell / 2 - ball.center[k]), std::abs(c + ell / 2 - ball.center[k]));
        s += e * e;
      }
      if (s < r2) return z;
    }
    int k = d - 1;
    while (k >= 0 && z[static_cast<std::size_t>(k)] == d) z[static_cast<std::size_t>(k--)] = -d;
    if (k < 0) break;
    ++z[static_cast<std::size_t>(k)];
  }
  return std::nullopt;
}

}  // namespace palmtess
