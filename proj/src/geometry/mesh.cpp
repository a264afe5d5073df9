#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "plap/error.hpp"
#include "plap/geometry.hpp"

namespace plap::geometry {
namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (x - (a + t * ab)).norm();
}

struct Sub {
  Vec2 a, b, c;              // physical corners
  std::array<double, 3> ba, bb, bc;  // their barycentrics in the parent
};

std::array<double, 3> mix(const std::array<double, 3>& x, const std::array<double, 3>& y) {
  return {0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]), 0.5 * (x[2] + y[2])};
}

void ring_points(const Sub& s, double area, const Vec2& pole, double r1, double r2, int tri,
                 int depth, std::vector<RingPoint>& out) {
  const double da = (s.a - pole).norm(), db = (s.b - pole).norm(), dc = (s.c - pole).norm();
  const double dmax = std::max({da, db, dc});
  double dmin = std::min({point_segment_distance(pole, s.a, s.b),
                          point_segment_distance(pole, s.b, s.c),
                          point_segment_distance(pole, s.c, s.a)});
  if (cross(s.b - s.a, pole - s.a) >= 0 && cross(s.c - s.b, pole - s.b) >= 0 &&
      cross(s.a - s.c, pole - s.c) >= 0)
    dmin = 0.0;
  if (dmin > r2 || dmax < r1) return;
  if (dmin >= r1 && dmax <= r2) {
    const QuadRule& q = triangle_rule(depth == 0 ? 4 : 2);
    for (std::size_t k = 0; k < q.weights.size(); ++k) {
      const auto& w = q.bary[k];
      RingPoint rp;
      rp.x = w[0] * s.a + w[1] * s.b + w[2] * s.c;
      for (int i = 0; i < 3; ++i) rp.bary[i] = w[0] * s.ba[i] + w[1] * s.bb[i] + w[2] * s.bc[i];
      rp.weight = q.weights[k] * area;
      rp.tri = tri;
      out.push_back(rp);
    }
    return;
  }
  if (depth >= 5) {
    const Vec2 x = (s.a + s.b + s.c) / 3.0;
    const double r = (x - pole).norm();
    if (r < r1 || r > r2) return;
    RingPoint rp;
    rp.x = x;
    for (int i = 0; i < 3; ++i) rp.bary[i] = (s.ba[i] + s.bb[i] + s.bc[i]) / 3.0;
    rp.weight = area;
    rp.tri = tri;
    out.push_back(rp);
    return;
  }
  const Vec2 ab = 0.5 * (s.a + s.b), bc = 0.5 * (s.b + s.c), ca = 0.5 * (s.c + s.a);
  const auto wab = mix(s.ba, s.bb), wbc = mix(s.bb, s.bc), wca = mix(s.bc, s.ba);
  const double qa = 0.25 * area;
  ring_points({s.a, ab, ca, s.ba, wab, wca}, qa, pole, r1, r2, tri, depth + 1, out);
  ring_points({ab, s.b, bc, wab, s.bb, wbc}, qa, pole, r1, r2, tri, depth + 1, out);
  ring_points({ca, bc, s.c, wca, wbc, s.bc}, qa, pole, r1, r2, tri, depth + 1, out);
  ring_points({ab, bc, ca, wab, wbc, wca}, qa, pole, r1, r2, tri, depth + 1, out);
}

}  // namespace

void Mesh::finalize() {
  const std::size_t nt = triangles.size();
  area.resize(nt);
  grad_bary.resize(nt);
  quad_order.assign(nt, 4);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tr = triangles[t];
    const Vec2& a = vertices[tr[0]];
    const Vec2& b = vertices[tr[1]];
    const Vec2& c = vertices[tr[2]];
    const double twice = cross(b - a, c - a);
    area[t] = 0.5 * twice;
    const std::array<Vec2, 3> x{a, b, c};
    for (int i = 0; i < 3; ++i) {
      const Vec2& xj = x[(i + 1) % 3];
      const Vec2& xk = x[(i + 2) % 3];
      grad_bary[t][i] = Vec2(xj.y() - xk.y(), xk.x() - xj.x()) / twice;
    }
    for (int v : tr) {
      if (v == pole_vertex || (!inner_boundary.empty() && inner_boundary[v])) quad_order[t] = 8;
    }
  }
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : area) s += a;
  return s;
}

double Mesh::edge_length_near_pole() const {
  double longest = 0.0;
  for (const auto& tr : triangles) {
    bool touches = false;
    for (int v : tr)
      touches = touches || v == pole_vertex || (!inner_boundary.empty() && inner_boundary[v]);
    if (!touches) continue;
    for (int i = 0; i < 3; ++i) {
      const int a = tr[i], b = tr[(i + 1) % 3];
      if (pole_vertex >= 0 && a != pole_vertex && b != pole_vertex) continue;
      longest = std::max(longest, (vertices[a] - vertices[b]).norm());
    }
  }
  return longest;
}

Vec2 Mesh::point(int tri, const std::array<double, 3>& bary) const {
  const auto& t = triangles[tri];
  return bary[0] * vertices[t[0]] + bary[1] * vertices[t[1]] + bary[2] * vertices[t[2]];
}

std::array<double, 3> barycentric(const Mesh& mesh, int tri, const Vec2& x) {
  const auto& t = mesh.triangles[tri];
  const Vec2& a = mesh.vertices[t[0]];
  std::array<double, 3> w{};
  for (int i = 0; i < 3; ++i) w[i] = (i == 0 ? 1.0 : 0.0) + mesh.grad_bary[tri][i].dot(x - a);
  return w;
}

std::vector<RingPoint> extract_ring(const Mesh& mesh, const Vec2& pole, double r1, double r2) {
  require(r1 >= 0 && r1 < r2, ErrorCode::PreconditionViolation, "ring needs 0 <= r1 < r2");
  std::vector<RingPoint> out;
  double local_h = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Sub s{mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]],
                {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const std::size_t before = out.size();
    ring_points(s, mesh.area[t], pole, r1, r2, static_cast<int>(t), 0, out);
    if (out.size() == before) continue;
    for (int i = 0; i < 3; ++i)
      local_h = std::max(local_h, (mesh.vertices[tr[i]] - mesh.vertices[tr[(i + 1) % 3]]).norm());
  }
  if (out.empty() || r2 - r1 < local_h / 10.0)
    raise(ErrorCode::EmptyRing, "annulus is not resolved by the mesh");
  return out;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  lo_ = hi_ = mesh.vertices.front();
  for (const auto& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  const double n = std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0) + 1.0;
  nx_ = ny_ = std::max(1, static_cast<int>(n));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  const Vec2 span = (hi_ - lo_).cwiseMax(Vec2(1e-300, 1e-300));
  auto cell = [&](const Vec2& x, int& i, int& j) {
    i = std::clamp(static_cast<int>((x.x() - lo_.x()) / span.x() * nx_), 0, nx_ - 1);
    j = std::clamp(static_cast<int>((x.y() - lo_.y()) / span.y() * ny_), 0, ny_ - 1);
  };
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 a = mesh.vertices[mesh.triangles[t][0]], b = a;
    for (int v : mesh.triangles[t]) {
      a = a.cwiseMin(mesh.vertices[v]);
      b = b.cwiseMax(mesh.vertices[v]);
    }
    int i0, j0, i1, j1;
    cell(a, i0, j0);
    cell(b, i1, j1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
}

std::optional<std::pair<int, std::array<double, 3>>> PointLocator::locate(const Vec2& x) const {
  const Vec2 span = (hi_ - lo_).cwiseMax(Vec2(1e-300, 1e-300));
  const double fx = (x.x() - lo_.x()) / span.x(), fy = (x.y() - lo_.y()) / span.y();
  if (fx < -1e-12 || fx > 1 + 1e-12 || fy < -1e-12 || fy > 1 + 1e-12) return std::nullopt;
  const int i = std::clamp(static_cast<int>(fx * nx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(fy * ny_), 0, ny_ - 1);
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  std::array<double, 3> best_w{};
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    const auto w = barycentric(*mesh_, t, x);
    const double m = std::min({w[0], w[1], w[2]});
    if (m > best_min) {
      best_min = m;
      best = t;
      best_w = w;
    }
  }
  if (best < 0 || best_min < -1e-10) return std::nullopt;
  for (auto& w : best_w) w = std::max(w, 0.0);
  const double s = best_w[0] + best_w[1] + best_w[2];
  for (auto& w : best_w) w /= s;
  return std::make_pair(best, best_w);
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "PLAPMESH 1\n" << mesh.num_vertices() << "\n" << mesh.num_triangles() << "\n";
  os << std::setprecision(17);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    int flag = mesh.boundary[v] ? 1 : 0;
    if (!mesh.inner_boundary.empty() && mesh.inner_boundary[v]) flag = 2;
    os << mesh.vertices[v].x() << " " << mesh.vertices[v].y() << " " << flag << "\n";
  }
  for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
}

Mesh read_mesh(std::istream& is, std::optional<Vec2> pole) {
  std::string magic, version;
  is >> magic >> version;
  require(is && magic == "PLAPMESH" && version == "1", ErrorCode::IoError, "not a PLAPMESH 1 file");
  std::size_t nv = 0, nt = 0;
  is >> nv >> nt;
  require(static_cast<bool>(is), ErrorCode::IoError, "missing mesh counts");
  Mesh mesh;
  mesh.vertices.resize(nv);
  mesh.boundary.assign(nv, 0);
  mesh.inner_boundary.assign(nv, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    double x, y;
    int flag;
    is >> x >> y >> flag;
    mesh.vertices[v] = Vec2(x, y);
    mesh.boundary[v] = flag == 1;
    mesh.inner_boundary[v] = flag == 2;
  }
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) {
    is >> t[0] >> t[1] >> t[2];
    for (int v : t)
      require(v >= 0 && static_cast<std::size_t>(v) < nv, ErrorCode::IoError, "vertex index out of range");
  }
  require(static_cast<bool>(is), ErrorCode::IoError, "truncated mesh file");
  if (pole) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < nv; ++v) {
      const double d = (mesh.vertices[v] - *pole).norm();
      if (d < best) {
        best = d;
        mesh.pole_vertex = static_cast<int>(v);
      }
    }
    mesh.pole = mesh.vertices[mesh.pole_vertex];
  }
  mesh.finalize();
  return mesh;
}

MeshQuality assess(const Mesh& mesh) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  q.min_signed_area = std::numeric_limits<double>::infinity();
  std::map<std::pair<int, int>, int> edge_count;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    q.min_signed_area = std::min(q.min_signed_area, mesh.area[t]);
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = mesh.vertices[tr[i]];
      const Vec2& b = mesh.vertices[tr[(i + 1) % 3]];
      const Vec2& c = mesh.vertices[tr[(i + 2) % 3]];
      const Vec2 u = b - a, w = c - a;
      const double ang = std::atan2(std::abs(cross(u, w)), u.dot(w)) * 180.0 / M_PI;
      q.min_angle_deg = std::min(q.min_angle_deg, ang);
      q.max_edge = std::max(q.max_edge, u.norm());
      const int x = std::min(tr[i], tr[(i + 1) % 3]), y = std::max(tr[i], tr[(i + 1) % 3]);
      ++edge_count[{x, y}];
    }
  }
  std::vector<int> degree(mesh.num_vertices(), 0);
  bool flagged = true;
  for (const auto& [e, n] : edge_count) {
    if (n != 1) continue;
    ++degree[e.first];
    ++degree[e.second];
    const auto on_boundary = [&](int v) {
      return mesh.boundary[v] || (!mesh.inner_boundary.empty() && mesh.inner_boundary[v]);
    };
    flagged = flagged && on_boundary(e.first) && on_boundary(e.second);
  }
  bool closed = flagged;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.boundary[v]) ++q.boundary_vertices;
    if (degree[v] != 0 && degree[v] != 2) closed = false;
  }
  q.boundary_loops_closed = closed;
  return q;
}

}  // namespace plap::geometry
