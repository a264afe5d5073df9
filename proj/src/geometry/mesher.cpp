// Conforming Delaunay refinement (Bowyer-Watson insertion, Ruppert-style
// encroachment handling) with a pole-graded size field.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>

#include "plap/error.hpp"
#include "plap/geometry.hpp"

namespace plap::geometry {
namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ba = b - a, ca = c - a;
  const double d = 2.0 * (ba.x() * ca.y() - ba.y() * ca.x());
  const double b2 = ba.squaredNorm(), c2 = ca.squaredNorm();
  return a + Vec2((ca.y() * b2 - ba.y() * c2) / d, (ba.x() * c2 - ca.x() * b2) / d);
}

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (x - (a + t * ab)).norm();
}

struct Curve {
  bool arc = false;
  Vec2 p0, p1;  // line endpoints
  Vec2 center;
  double radius = 0.0;
  int tag = 1;  // 1 = domain boundary, 2 = pole hole

  Vec2 at(double t) const {
    if (arc) return center + radius * Vec2(std::cos(t), std::sin(t));
    return p0 + t * (p1 - p0);
  }
};

struct Segment {
  int a = -1, b = -1;
  int curve = -1;
  double ta = 0.0, tb = 0.0;
};

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> n{-1, -1, -1};  // neighbour across the edge opposite v[i]
  bool alive = true;
};

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

class Refiner {
 public:
  Refiner(const DomainSpec& domain, const Grading& grading, const MeshOptions& opts)
      : domain_(domain), grading_(grading), opts_(opts) {
    const double s = std::sin(opts.min_angle_deg * M_PI / 180.0);
    ratio_bound_ = 1.0 / (2.0 * s);
  }

  Mesh run();

 private:
  const DomainSpec& domain_;
  Grading grading_;
  MeshOptions opts_;
  double ratio_bound_;

  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vtri_;
  std::vector<Curve> curves_;
  std::unordered_map<std::uint64_t, Segment> segs_;
  std::vector<std::uint64_t> seg_order_;  // insertion-ordered keys, for deterministic sweeps
  std::deque<std::uint64_t> seg_queue_;
  std::deque<std::pair<int, std::array<int, 3>>> bad_queue_;
  int last_tri_ = 0;
  int pole_id_ = -1;

  std::vector<int> mark_;
  int stamp_ = 0;
  std::vector<int> cavity_;
  std::vector<int> scratch_start_, scratch_end_;

  bool inside(const Vec2& x) const {
    if (!domain_.contains(x)) return false;
    return opts_.hole_radius <= 0.0 || (x - domain_.pole).norm() > opts_.hole_radius;
  }

  double pole_distance(int t) const {
    const auto& v = tris_[t].v;
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i)
      d = std::min(d, point_segment_distance(domain_.pole, pts_[v[i]], pts_[v[(i + 1) % 3]]));
    if (orient(pts_[v[0]], pts_[v[1]], domain_.pole) > 0 &&
        orient(pts_[v[1]], pts_[v[2]], domain_.pole) > 0 &&
        orient(pts_[v[2]], pts_[v[0]], domain_.pole) > 0)
      d = 0.0;
    return d;
  }

  void add_curve_points(const Curve& c, double t0, double t1, int v0, int v1, int ci);
  void build_boundary();
  int new_tri(int a, int b, int c);
  int locate(const Vec2& p, int start) const;
  int insert(const Vec2& p, int start, bool check_circumcenter, std::vector<std::uint64_t>* hit);
  bool edge_apexes(int a, int b, int& apex1, int& apex2) const;
  bool segment_encroached(const Segment& s) const;
  bool split_segment(std::uint64_t key);
  bool is_bad(int t) const;
  void queue_if_bad(int t);
  void refine();
  void add_segment(int a, int b, int curve, double ta, double tb);
  Mesh extract() const;
};

int Refiner::new_tri(int a, int b, int c) {
  int t;
  if (!free_.empty()) {
    t = free_.back();
    free_.pop_back();
    tris_[t] = Tri{};
  } else {
    t = static_cast<int>(tris_.size());
    tris_.emplace_back();
    mark_.push_back(0);
  }
  tris_[t].v = {a, b, c};
  return t;
}

int Refiner::locate(const Vec2& p, int start) const {
  int t = start;
  if (t < 0 || !tris_[t].alive) t = last_tri_;
  if (!tris_[t].alive) {
    for (t = 0; !tris_[t].alive; ++t) {
    }
  }
  int rot = 0;
  for (std::size_t guard = 0; guard < 4 * tris_.size() + 16; ++guard) {
    const Tri& tr = tris_[t];
    bool moved = false;
    for (int k = 0; k < 3; ++k) {
      const int i = (k + rot) % 3;
      const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
      if (orient(pts_[a], pts_[b], p) < 0 && tr.n[i] >= 0) {
        t = tr.n[i];
        moved = true;
        break;
      }
    }
    if (!moved) return t;
    rot = (rot + 1) % 3;
  }
  // Walk failed to settle (numerically degenerate input); fall back to a scan.
  for (int s = 0; s < static_cast<int>(tris_.size()); ++s) {
    if (!tris_[s].alive) continue;
    const auto& v = tris_[s].v;
    if (orient(pts_[v[0]], pts_[v[1]], p) >= 0 && orient(pts_[v[1]], pts_[v[2]], p) >= 0 &&
        orient(pts_[v[2]], pts_[v[0]], p) >= 0)
      return s;
  }
  return t;
}

// Inserts p. With check_circumcenter the insertion is abandoned (returning -1)
// if p would encroach a segment on the cavity, and the encroached keys are
// reported through `hit`.
int Refiner::insert(const Vec2& p, int start, bool check_circumcenter,
                    std::vector<std::uint64_t>* hit) {
  const int t0 = locate(p, start);
  const double tiny = 1e-13 * grading_.diameter;
  for (int i = 0; i < 3; ++i)
    if ((pts_[tris_[t0].v[i]] - p).norm() <= tiny) return -1;

  ++stamp_;
  cavity_.clear();
  cavity_.push_back(t0);
  mark_[t0] = stamp_;
  for (std::size_t k = 0; k < cavity_.size(); ++k) {
    const Tri& tr = tris_[cavity_[k]];
    for (int i = 0; i < 3; ++i) {
      const int nb = tr.n[i];
      if (nb < 0 || mark_[nb] == stamp_) continue;
      const auto& v = tris_[nb].v;
      if (incircle(pts_[v[0]], pts_[v[1]], pts_[v[2]], p) > 0) {
        mark_[nb] = stamp_;
        cavity_.push_back(nb);
      }
    }
  }

  // Keep the cavity star-shaped with respect to p.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < cavity_.size(); ++k) {
      const int t = cavity_[k];
      if (t == t0) continue;
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.n[i];
        if (nb >= 0 && mark_[nb] == stamp_) continue;
        if (orient(pts_[tr.v[(i + 1) % 3]], pts_[tr.v[(i + 2) % 3]], p) <= 0) {
          mark_[t] = 0;
          cavity_[k] = cavity_.back();
          cavity_.pop_back();
          --k;
          changed = true;
          break;
        }
      }
    }
  }

  if (check_circumcenter) {
    bool blocked = false;
    for (int t : cavity_) {
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
        const auto it = segs_.find(edge_key(a, b));
        if (it == segs_.end()) continue;
        if ((pts_[a] - p).dot(pts_[b] - p) < 0) {
          hit->push_back(it->first);
          blocked = true;
        }
      }
    }
    if (blocked) return -1;
    if (!inside(p)) {
      // Outside the domain but not encroaching anything listed: split the
      // nearest segment touching the cavity, if any.
      double best = std::numeric_limits<double>::infinity();
      std::uint64_t best_key = 0;
      for (int t : cavity_) {
        const Tri& tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
          const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
          const auto it = segs_.find(edge_key(a, b));
          if (it == segs_.end()) continue;
          const double d = point_segment_distance(p, pts_[a], pts_[b]);
          if (d < best) {
            best = d;
            best_key = it->first;
          }
        }
      }
      if (std::isfinite(best)) hit->push_back(best_key);
      return -1;
    }
  }

  const int id = static_cast<int>(pts_.size());
  pts_.push_back(p);
  vtri_.push_back(-1);
  scratch_start_.push_back(-1);
  scratch_end_.push_back(-1);

  struct BoundaryEdge {
    int a, b, outer;
  };
  std::vector<BoundaryEdge> ring;
  ring.reserve(cavity_.size() + 2);
  for (int t : cavity_) {
    const Tri& tr = tris_[t];
    for (int i = 0; i < 3; ++i) {
      const int nb = tr.n[i];
      const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
      if (nb >= 0 && mark_[nb] == stamp_) {
        if (a < b && segs_.count(edge_key(a, b))) seg_queue_.push_back(edge_key(a, b));
        continue;
      }
      ring.push_back({a, b, nb});
    }
  }
  for (int t : cavity_) {
    tris_[t].alive = false;
    mark_[t] = 0;
    free_.push_back(t);
  }

  std::vector<int> created;
  created.reserve(ring.size());
  for (const auto& e : ring) {
    const int t = new_tri(id, e.a, e.b);
    tris_[t].n[0] = e.outer;
    if (e.outer >= 0) {
      Tri& o = tris_[e.outer];
      for (int i = 0; i < 3; ++i)
        if (o.v[(i + 1) % 3] == e.b && o.v[(i + 2) % 3] == e.a) o.n[i] = t;
    }
    scratch_start_[e.a] = t;
    scratch_end_[e.b] = t;
    created.push_back(t);
  }
  for (int t : created) {
    Tri& tr = tris_[t];
    tr.n[2] = scratch_end_[tr.v[1]];
    tr.n[1] = scratch_start_[tr.v[2]];
    vtri_[tr.v[1]] = t;
    vtri_[id] = t;
  }
  for (const auto& e : ring) {
    scratch_start_[e.a] = -1;
    scratch_end_[e.b] = -1;
  }
  last_tri_ = created.front();

  for (int t : created) {
    const int a = tris_[t].v[1], b = tris_[t].v[2];
    const auto it = segs_.find(edge_key(a, b));
    if (it != segs_.end() && (pts_[a] - p).dot(pts_[b] - p) < 0) seg_queue_.push_back(it->first);
    queue_if_bad(t);
  }
  if (pts_.size() > opts_.max_vertices + 3)
    raise(ErrorCode::PreconditionViolation, "mesh exceeds the vertex cap; increase h or gamma");
  return id;
}

bool Refiner::edge_apexes(int a, int b, int& apex1, int& apex2) const {
  int t = vtri_[a];
  if (t < 0) return false;
  const int start = t;
  bool found = false;
  apex1 = apex2 = -1;
  for (int guard = 0; guard < 100000; ++guard) {
    const Tri& tr = tris_[t];
    int i = 0;
    while (tr.v[i] != a) ++i;
    const int nxt = tr.v[(i + 1) % 3], prv = tr.v[(i + 2) % 3];
    if (nxt == b) {
      apex1 = prv;
      found = true;
    }
    if (prv == b) {
      apex2 = nxt;
      found = true;
    }
    t = tr.n[(i + 2) % 3];
    if (t < 0 || t == start) break;
  }
  return found;
}

bool Refiner::segment_encroached(const Segment& s) const {
  int x, y;
  if (!edge_apexes(s.a, s.b, x, y)) return true;
  const Vec2& a = pts_[s.a];
  const Vec2& b = pts_[s.b];
  for (int q : {x, y}) {
    if (q < 0) continue;
    if ((a - pts_[q]).dot(b - pts_[q]) < 0) return true;
  }
  return false;
}

void Refiner::add_segment(int a, int b, int curve, double ta, double tb) {
  const auto key = edge_key(a, b);
  segs_[key] = Segment{a, b, curve, ta, tb};
  seg_order_.push_back(key);
  seg_queue_.push_back(key);
}

bool Refiner::split_segment(std::uint64_t key) {
  const auto it = segs_.find(key);
  if (it == segs_.end()) return false;
  const Segment s = it->second;
  const Curve& c = curves_[s.curve];
  const double tm = 0.5 * (s.ta + s.tb);
  const Vec2 m = c.at(tm);
  segs_.erase(it);
  const int id = insert(m, vtri_[s.a], false, nullptr);
  if (id < 0) {
    segs_[key] = s;  // midpoint coincides with an existing vertex; keep the segment
    return false;
  }
  add_segment(s.a, id, s.curve, s.ta, tm);
  add_segment(id, s.b, s.curve, tm, s.tb);
  return true;
}

bool Refiner::is_bad(int t) const {
  const auto& v = tris_[t].v;
  if (v[0] < 3 || v[1] < 3 || v[2] < 3) return false;
  const Vec2& a = pts_[v[0]];
  const Vec2& b = pts_[v[1]];
  const Vec2& c = pts_[v[2]];
  const Vec2 centroid = (a + b + c) / 3.0;
  if (!inside(centroid)) return false;
  const double lab = (b - a).norm(), lbc = (c - b).norm(), lca = (a - c).norm();
  const double lmin = std::min({lab, lbc, lca});
  const double lmax = std::max({lab, lbc, lca});
  if (lmax > grading_.size_at(pole_distance(t))) return true;
  const double area2 = orient(a, b, c);
  const double circumradius = lab * lbc * lca / (2.0 * area2);
  return circumradius / lmin > ratio_bound_;
}

void Refiner::queue_if_bad(int t) {
  if (is_bad(t)) bad_queue_.emplace_back(t, tris_[t].v);
}

// Splits [t0, t1] into 2^k equal parameter pieces, k the smallest meeting
// half the size field on every piece.
void Refiner::add_curve_points(const Curve& c, double t0, double t1, int v0, int v1, int ci) {
  int pieces = 1;
  for (;; pieces *= 2) {
    bool fine = true;
    Vec2 prev = c.at(t0);
    for (int k = 1; k <= pieces && fine; ++k) {
      const Vec2 next = c.at(t0 + (t1 - t0) * k / pieces);
      const double target = 0.5 * grading_.size_at(point_segment_distance(domain_.pole, prev, next));
      fine = (next - prev).norm() <= target;
      prev = next;
    }
    if (fine) break;
  }
  int last = v0;
  double tl = t0;
  for (int k = 1; k <= pieces; ++k) {
    const double tk = t0 + (t1 - t0) * k / pieces;
    const int id = k == pieces ? v1 : insert(c.at(tk), vtri_[last], false, nullptr);
    if (id < 0) continue;
    add_segment(last, id, ci, tl, tk);
    last = id;
    tl = tk;
  }
}

void Refiner::build_boundary() {
  auto add_closed_arc = [&](Vec2 center, double radius, int tag) {
    Curve c;
    c.arc = true;
    c.center = center;
    c.radius = radius;
    c.tag = tag;
    const int ci = static_cast<int>(curves_.size());
    curves_.push_back(c);
    std::array<int, 4> ids{};
    for (int k = 0; k < 4; ++k) ids[k] = insert(c.at(0.5 * M_PI * k), -1, false, nullptr);
    for (int k = 0; k < 4; ++k)
      add_curve_points(curves_[ci], 0.5 * M_PI * k, 0.5 * M_PI * (k + 1), ids[k], ids[(k + 1) % 4],
                       ci);
  };
  auto add_loop = [&](const std::vector<Vec2>& v) {
    std::vector<int> ids;
    for (const auto& x : v) ids.push_back(insert(x, -1, false, nullptr));
    for (std::size_t i = 0; i < v.size(); ++i) {
      Curve c;
      c.p0 = v[i];
      c.p1 = v[(i + 1) % v.size()];
      const int ci = static_cast<int>(curves_.size());
      curves_.push_back(c);
      add_curve_points(curves_[ci], 0.0, 1.0, ids[i], ids[(i + 1) % v.size()], ci);
    }
  };

  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Disk>) {
          add_closed_arc(Vec2::Zero(), s.radius, 1);
        } else if constexpr (std::is_same_v<S, Annulus>) {
          add_closed_arc(Vec2::Zero(), s.r_out, 1);
          add_closed_arc(Vec2::Zero(), s.r_in, 1);
        } else if constexpr (std::is_same_v<S, Square>) {
          const double hs = 0.5 * s.side;
          add_loop({Vec2(-hs, -hs), Vec2(hs, -hs), Vec2(hs, hs), Vec2(-hs, hs)});
        } else if constexpr (std::is_same_v<S, Polygon>) {
          add_loop(s.vertices);
        } else {
          add_closed_arc(Vec2::Zero(), s.radius, 1);
        }
      },
      domain_.shape);
  if (opts_.hole_radius > 0.0) add_closed_arc(domain_.pole, opts_.hole_radius, 2);
}

void Refiner::refine() {
  std::vector<std::uint64_t> hit;
  for (;;) {
    while (!seg_queue_.empty() || !bad_queue_.empty()) {
      if (!seg_queue_.empty()) {
        const auto key = seg_queue_.front();
        seg_queue_.pop_front();
        const auto it = segs_.find(key);
        if (it == segs_.end() || !segment_encroached(it->second)) continue;
        split_segment(key);
        continue;
      }
      const auto [t, verts] = bad_queue_.front();
      bad_queue_.pop_front();
      if (!tris_[t].alive || tris_[t].v != verts) continue;
      const Vec2 cc = circumcenter(pts_[verts[0]], pts_[verts[1]], pts_[verts[2]]);
      hit.clear();
      const int id = insert(cc, t, true, &hit);
      if (id >= 0) continue;
      bool split = false;
      for (auto k : hit) split = split_segment(k) || split;
      if (split && tris_[t].alive && tris_[t].v == verts) bad_queue_.emplace_back(t, verts);
    }
    bool clean = true;
    for (auto key : seg_order_) {
      const auto it = segs_.find(key);
      if (it == segs_.end()) continue;
      int x, y;
      if (!edge_apexes(it->second.a, it->second.b, x, y)) {
        seg_queue_.push_back(key);
        clean = false;
      }
    }
    if (clean) return;
  }
}

Mesh Refiner::extract() const {
  // Flood fill components separated by segments and classify each by vote.
  std::vector<int> comp(tris_.size(), -1);
  std::vector<char> comp_inside;
  std::vector<int> stack;
  for (int s = 0; s < static_cast<int>(tris_.size()); ++s) {
    if (!tris_[s].alive || comp[s] >= 0) continue;
    const int c = static_cast<int>(comp_inside.size());
    long votes = 0;
    bool touches_super = false;
    stack.assign(1, s);
    comp[s] = c;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      const auto& tr = tris_[t];
      if (tr.v[0] < 3 || tr.v[1] < 3 || tr.v[2] < 3) touches_super = true;
      const Vec2 centroid = (pts_[tr.v[0]] + pts_[tr.v[1]] + pts_[tr.v[2]]) / 3.0;
      votes += inside(centroid) ? 1 : -1;
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.n[i];
        if (nb < 0 || comp[nb] >= 0) continue;
        if (segs_.count(edge_key(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]))) continue;
        comp[nb] = c;
        stack.push_back(nb);
      }
    }
    comp_inside.push_back(!touches_super && votes > 0);
  }

  std::vector<int> remap(pts_.size(), -1);
  std::vector<std::array<int, 3>> raw;
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
    if (tris_[t].alive && comp_inside[comp[t]]) raw.push_back(tris_[t].v);
  // Deterministic: triangles sorted by their vertex triples in insertion order.
  std::sort(raw.begin(), raw.end());
  std::vector<char> used(pts_.size(), 0);
  for (const auto& t : raw)
    for (int v : t) used[v] = 1;

  Mesh mesh;
  for (int v = 3; v < static_cast<int>(pts_.size()); ++v) {
    if (!used[v]) continue;
    remap[v] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(pts_[v]);
  }
  mesh.boundary.assign(mesh.vertices.size(), 0);
  mesh.inner_boundary.assign(mesh.vertices.size(), 0);
  for (auto key : seg_order_) {
    const auto it = segs_.find(key);
    if (it == segs_.end()) continue;
    const int tag = curves_[it->second.curve].tag;
    for (int v : {it->second.a, it->second.b}) {
      if (remap[v] < 0) continue;
      (tag == 2 ? mesh.inner_boundary : mesh.boundary)[remap[v]] = 1;
    }
  }
  mesh.triangles.reserve(raw.size());
  for (const auto& t : raw) mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  mesh.grading = grading_;
  mesh.pole = domain_.pole;
  mesh.pole_vertex = pole_id_ >= 0 ? remap[pole_id_] : -1;
  mesh.domain = domain_;
  return mesh;
}

Mesh Refiner::run() {
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  auto grow = [&](const Vec2& x) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  };
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Polygon>) {
          for (const auto& v : s.vertices) grow(v);
        } else {
          const double r = domain_.diameter() / 2.0;
          grow(Vec2(-r, -r));
          grow(Vec2(r, r));
        }
      },
      domain_.shape);
  const Vec2 mid = 0.5 * (lo + hi);
  const double span = 20.0 * std::max(hi.x() - lo.x(), hi.y() - lo.y());
  pts_ = {mid + Vec2(-span, -span), mid + Vec2(span, -span), mid + Vec2(0.0, span)};
  vtri_ = {0, 0, 0};
  scratch_start_.assign(3, -1);
  scratch_end_.assign(3, -1);
  new_tri(0, 1, 2);

  if (opts_.hole_radius <= 0.0) pole_id_ = insert(domain_.pole, 0, false, nullptr);
  build_boundary();
  refine();
  return extract();
}

}  // namespace

MeshPtr build_mesh(const DomainSpec& domain, double h, double gamma, const MeshOptions& opts) {
  domain.validate(opts.hole_radius <= 0.0);
  const double diam = domain.diameter();
  require(h > 0 && h < diam / 4, ErrorCode::PreconditionViolation, "h must lie in (0, diam/4)");
  require(gamma > 0 && gamma <= 1, ErrorCode::PreconditionViolation, "gamma must lie in (0, 1]");
  if (opts.hole_radius > 0)
    require(opts.hole_radius < domain.distance_to_boundary(domain.pole),
            ErrorCode::PreconditionViolation, "hole must lie inside the domain");
  Refiner refiner(domain, Grading{h, gamma, diam}, opts);
  auto mesh = std::make_shared<Mesh>(refiner.run());
  mesh->finalize();
  return mesh;
}

}  // namespace plap::geometry
