#include <cmath>
#include <sstream>

#include "plap/error.hpp"
#include "plap/geometry.hpp"

namespace plap::geometry {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (x - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

double polygon_signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

bool polygon_contains(const std::vector<Vec2>& v, const Vec2& x) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if (((v[i].y() > x.y()) != (v[j].y() > x.y())) &&
        (x.x() < (v[j].x() - v[i].x()) * (x.y() - v[i].y()) / (v[j].y() - v[i].y()) + v[i].x()))
      inside = !inside;
  }
  return inside;
}

}  // namespace

bool DomainSpec::contains(const Vec2& x) const {
  return std::visit(
      overloaded{
          [&](const Disk& d) { return x.norm() < d.radius; },
          [&](const Annulus& a) {
            const double r = x.norm();
            return r > a.r_in && r < a.r_out;
          },
          [&](const Square& s) {
            return std::abs(x.x()) < 0.5 * s.side && std::abs(x.y()) < 0.5 * s.side;
          },
          [&](const Polygon& p) { return polygon_contains(p.vertices, x); },
          [&](const RadialBall& b) { return x.norm() < b.radius; },
      },
      shape);
}

double DomainSpec::distance_to_boundary(const Vec2& x) const {
  return std::visit(
      overloaded{
          [&](const Disk& d) { return std::abs(d.radius - x.norm()); },
          [&](const Annulus& a) {
            const double r = x.norm();
            return std::min(std::abs(r - a.r_in), std::abs(a.r_out - r));
          },
          [&](const Square& s) {
            const double hs = 0.5 * s.side;
            if (std::abs(x.x()) <= hs && std::abs(x.y()) <= hs)
              return std::min(hs - std::abs(x.x()), hs - std::abs(x.y()));
            const double dx = std::max(std::abs(x.x()) - hs, 0.0);
            const double dy = std::max(std::abs(x.y()) - hs, 0.0);
            return std::hypot(dx, dy);
          },
          [&](const Polygon& p) {
            double d = std::numeric_limits<double>::infinity();
            const auto& v = p.vertices;
            for (std::size_t i = 0; i < v.size(); ++i)
              d = std::min(d, segment_distance(x, v[i], v[(i + 1) % v.size()]));
            return d;
          },
          [&](const RadialBall& b) { return std::abs(b.radius - x.norm()); },
      },
      shape);
}

double DomainSpec::diameter() const {
  return std::visit(overloaded{
                        [](const Disk& d) { return 2.0 * d.radius; },
                        [](const Annulus& a) { return 2.0 * a.r_out; },
                        [](const Square& s) { return std::sqrt(2.0) * s.side; },
                        [](const Polygon& p) {
                          double d = 0.0;
                          for (const auto& a : p.vertices)
                            for (const auto& b : p.vertices) d = std::max(d, (a - b).norm());
                          return d;
                        },
                        [](const RadialBall& b) { return 2.0 * b.radius; },
                    },
                    shape);
}

double DomainSpec::area() const {
  return std::visit(overloaded{
                        [](const Disk& d) { return M_PI * d.radius * d.radius; },
                        [](const Annulus& a) { return M_PI * (a.r_out * a.r_out - a.r_in * a.r_in); },
                        [](const Square& s) { return s.side * s.side; },
                        [](const Polygon& p) { return polygon_signed_area(p.vertices); },
                        [](const RadialBall& b) {
                          const double n = b.dimension;
                          return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0) *
                                 std::pow(b.radius, n);
                        },
                    },
                    shape);
}

void DomainSpec::validate(bool require_interior_pole) const {
  std::visit(overloaded{
                 [](const Disk& d) {
                   require(d.radius > 0, ErrorCode::DegenerateDomain, "disk radius must be positive");
                 },
                 [](const Annulus& a) {
                   require(a.r_in > 0 && a.r_out > a.r_in, ErrorCode::DegenerateDomain,
                           "annulus needs 0 < r_in < r_out");
                 },
                 [](const Square& s) {
                   require(s.side > 0, ErrorCode::DegenerateDomain, "square side must be positive");
                 },
                 [](const Polygon& p) {
                   const auto& v = p.vertices;
                   require(v.size() >= 3, ErrorCode::DegenerateDomain, "polygon needs 3 vertices");
                   const double a = polygon_signed_area(v);
                   require(a > 0, ErrorCode::DegenerateDomain,
                           a == 0 ? "polygon has zero area" : "polygon must be counter-clockwise");
                   const std::size_t n = v.size();
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = i + 2; j < n; ++j) {
                       if (i == 0 && j == n - 1) continue;
                       if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                         raise(ErrorCode::DegenerateDomain, "polygon self-intersects");
                     }
                 },
                 [](const RadialBall& b) {
                   require(b.radius > 0 && b.dimension >= 2, ErrorCode::DegenerateDomain,
                           "radial ball needs radius > 0 and dimension >= 2");
                 },
             },
             shape);
  if (is_radial()) {
    require(pole.norm() == 0.0, ErrorCode::PoleOutsideDomain, "radial ball requires pole = center");
    return;
  }
  if (require_interior_pole)
    require(contains(pole) && distance_to_boundary(pole) > 0, ErrorCode::PoleOutsideDomain,
            "pole must lie strictly inside the domain");
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Disk& d) { os << "disk:" << d.radius; },
                 [&](const Annulus& a) { os << "annulus:" << a.r_in << "," << a.r_out; },
                 [&](const Square& s) { os << "square:" << s.side; },
                 [&](const Polygon& p) {
                   os << "polygon:";
                   for (std::size_t i = 0; i < p.vertices.size(); ++i)
                     os << (i ? ";" : "") << p.vertices[i].x() << "," << p.vertices[i].y();
                 },
                 [&](const RadialBall& b) { os << "ball" << b.dimension << ":" << b.radius; },
             },
             shape);
  return os.str();
}

double Grading::size_at(double d) const {
  if (gamma >= 1.0) return h;
  return h * std::min(1.0, std::max(gamma, d / diameter));
}

const QuadRule& triangle_rule(int order) {
  static const QuadRule r1{1, {{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {1.0}};
  static const QuadRule r2{
      2, {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}},
      {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  static const QuadRule r4 = [] {
    QuadRule q;
    q.order = 4;
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    for (auto [s, w] : {std::pair{a, wa}, std::pair{b, wb}}) {
      const double c = 1.0 - 2.0 * s;
      q.bary.push_back({c, s, s});
      q.bary.push_back({s, c, s});
      q.bary.push_back({s, s, c});
      q.weights.insert(q.weights.end(), 3, w);
    }
    return q;
  }();
  static const QuadRule r8 = [] {
    QuadRule q;
    q.order = 8;
    q.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
    q.weights.push_back(0.144315607677787);
    const std::array<std::pair<double, double>, 3> orbit3{{{0.459292588292723, 0.095091634267285},
                                                           {0.170569307751760, 0.103217370534718},
                                                           {0.050547228317031, 0.032458497623198}}};
    for (auto [s, w] : orbit3) {
      const double c = 1.0 - 2.0 * s;
      q.bary.push_back({c, s, s});
      q.bary.push_back({s, c, s});
      q.bary.push_back({s, s, c});
      q.weights.insert(q.weights.end(), 3, w);
    }
    const double a = 0.008394777409958, b = 0.263112829634638, c = 1.0 - a - b;
    const double w = 0.027230314174435;
    for (const auto& t : std::array<std::array<double, 3>, 6>{
             {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}}) {
      q.bary.push_back(t);
      q.weights.push_back(w);
    }
    return q;
  }();
  switch (order) {
    case 1: return r1;
    case 2: return r2;
    case 4: return r4;
    case 8: return r8;
    default: raise(ErrorCode::PreconditionViolation, "unsupported triangle rule order");
  }
}

}  // namespace plap::geometry
