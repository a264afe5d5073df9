#pragma once

// Domains, graded triangulations, triangle quadrature and annulus extraction.

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace plap::geometry {

using Vec2 = Eigen::Vector2d;

struct Disk {
  double radius = 1.0;
};
struct Annulus {
  double r_in = 0.5;
  double r_out = 1.0;
};
/// Axis-aligned square [-side/2, side/2]^2.
struct Square {
  double side = 2.0;
};
/// Simple polygon, vertices counter-clockwise.
struct Polygon {
  std::vector<Vec2> vertices;
};
/// Ball of arbitrary dimension centered at the origin; only the radial
/// solvers consume this shape (N = 2 balls are also meshable as disks).
struct RadialBall {
  double dimension = 3.0;
  double radius = 1.0;
};

using Shape = std::variant<Disk, Annulus, Square, Polygon, RadialBall>;

/// A bounded domain together with the Green pole. All shapes are centered at
/// the origin except polygons, whose vertices are absolute.
struct DomainSpec {
  Shape shape = Disk{};
  Vec2 pole = Vec2::Zero();

  bool contains(const Vec2& x) const;
  double distance_to_boundary(const Vec2& x) const;
  double diameter() const;
  double area() const;
  bool is_radial() const { return std::holds_alternative<RadialBall>(shape); }
  /// Raises DegenerateDomain / PoleOutsideDomain when the invariants fail.
  void validate(bool require_interior_pole = true) const;
  /// Short human-readable descriptor ("disk:1", "ball3:1", ...).
  std::string describe() const;
};

/// Symmetric triangle rule in barycentric coordinates; weights sum to one and
/// are scaled by the triangle area at use.
struct QuadRule {
  int order = 0;
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};

/// Supported orders: 1, 2, 4 and 8 (Dunavant points).
const QuadRule& triangle_rule(int order);

struct Grading {
  double h = 0.0;          ///< target edge length away from the pole
  double gamma = 1.0;      ///< pole grading ratio in (0, 1]
  double diameter = 0.0;   ///< diam(domain) used by the sizing function

  /// Local target edge length at distance d from the pole.
  double size_at(double d) const;
};

struct MeshOptions {
  double min_angle_deg = 22.0;
  /// Optional circular hole of this radius around the pole (punctured domains).
  double hole_radius = 0.0;
  std::size_t max_vertices = 4'000'000;
};

/// Immutable after construction; share through std::shared_ptr<const Mesh>.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> boundary;  ///< 1 for vertices on the domain boundary
  std::vector<char> inner_boundary;  ///< 1 for vertices on the hole boundary (punctured meshes)
  std::vector<int> quad_order;       ///< per triangle
  Grading grading;
  Vec2 pole = Vec2::Zero();
  int pole_vertex = -1;
  std::optional<DomainSpec> domain;

  // Derived per-triangle data, filled by finalize().
  std::vector<double> area;
  std::vector<std::array<Vec2, 3>> grad_bary;  ///< gradients of the hat functions

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  void finalize();
  double total_area() const;
  double edge_length_near_pole() const;  ///< longest edge incident to the pole vertex
  Vec2 point(int tri, const std::array<double, 3>& bary) const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Delaunay refinement with a pole-centered sizing
/// h * max(gamma, |x - pole| / diam) and a minimum-angle floor.
MeshPtr build_mesh(const DomainSpec& domain, double h, double gamma, const MeshOptions& opts = {});

struct RingPoint {
  Vec2 x;
  double weight = 0.0;
  int tri = -1;
  std::array<double, 3> bary{};
};

/// Quadrature points with weights covering {r1 <= |x - pole| <= r2} ∩ mesh.
std::vector<RingPoint> extract_ring(const Mesh& mesh, const Vec2& pole, double r1, double r2);

/// Bucket-grid point location on an immutable mesh.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  /// Triangle containing x with barycentric coordinates, if any.
  std::optional<std::pair<int, std::array<double, 3>>> locate(const Vec2& x) const;

 private:
  const Mesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

std::array<double, 3> barycentric(const Mesh& mesh, int tri, const Vec2& x);

// Plain-text cache: "PLAPMESH 1", counts, "x y boundary_flag" lines, "i j k" lines.
void write_mesh(std::ostream& os, const Mesh& mesh);
/// Reads a cached mesh; the pole (if given) is snapped to the nearest vertex.
Mesh read_mesh(std::istream& is, std::optional<Vec2> pole = std::nullopt);

struct MeshQuality {
  double min_angle_deg = 0.0;
  double max_edge = 0.0;
  double min_signed_area = 0.0;
  std::size_t boundary_vertices = 0;
  bool boundary_loops_closed = false;
};
MeshQuality assess(const Mesh& mesh);

}  // namespace plap::geometry
