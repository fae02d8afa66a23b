#include "pointflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "pointflow/errors.hpp"

namespace pointflow {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (x - (a + s * ab)).norm();
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::pair<int, int> key(const Edge& e) { return {e.a, e.b}; }

}  // namespace

// ---------------------------------------------------------------------------
// PolygonDomain

PolygonDomain::PolygonDomain(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw InvalidArgument("polygon needs at least three vertices");
  if (area() <= 0.0) throw InvalidArgument("polygon vertices must be counter-clockwise with positive area");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n])) {
        throw InvalidArgument("polygon is not simple");
      }
    }
  }
}

PolygonDomain PolygonDomain::unit_square() {
  return PolygonDomain({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)});
}

double PolygonDomain::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    a += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return 0.5 * a;
}

double PolygonDomain::diameter() const {
  double d = 0.0;
  for (const auto& a : vertices_)
    for (const auto& b : vertices_) d = std::max(d, (a - b).norm());
  return d;
}

double PolygonDomain::distance_to_boundary(const Vec2& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    d = std::min(d, segment_distance(x, vertices_[i], vertices_[(i + 1) % vertices_.size()]));
  }
  return d;
}

bool PolygonDomain::contains(const Vec2& x, double tol) const {
  if (distance_to_boundary(x) <= tol) return true;
  // even-odd ray casting
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xs = (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (x.x() < xs) inside = !inside;
    }
  }
  return inside;
}

bool PolygonDomain::strictly_contains(const Vec2& x, double tol) const {
  return contains(x) && distance_to_boundary(x) > tol;
}

// ---------------------------------------------------------------------------
// TriMesh

TriMesh::TriMesh(PolygonDomain domain, std::vector<Vec2> nodes, std::vector<Triangle> triangles)
    : domain_(std::move(domain)), nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  const int nn = num_nodes();
  for (const auto& t : triangles_) {
    for (int v : t) {
      if (v < 0 || v >= nn) throw InvalidArgument("triangle references a missing node");
    }
  }
  for (int k = 0; k < num_triangles(); ++k) {
    if (!(signed_area(k) > 0.0)) throw InvalidArgument("triangle with non-positive orientation");
  }

  std::map<std::pair<int, int>, std::vector<int>> edge_map;
  for (int k = 0; k < num_triangles(); ++k) {
    const auto& t = triangles_[k];
    for (int l = 0; l < 3; ++l) edge_map[key(make_edge(t[l], t[(l + 1) % 3]))].push_back(k);
  }
  edges_.reserve(edge_map.size());
  edge_tris_.reserve(edge_map.size());
  std::map<std::pair<int, int>, int> edge_id;
  for (const auto& [k, tris] : edge_map) {
    if (tris.size() > 2) throw InvalidArgument("edge shared by more than two triangles");
    edge_id[k] = static_cast<int>(edges_.size());
    edges_.push_back({k.first, k.second});
    edge_tris_.push_back({tris[0], tris.size() == 2 ? tris[1] : -1});
  }
  tri_edges_.resize(triangles_.size());
  diameters_.resize(triangles_.size());
  for (int k = 0; k < num_triangles(); ++k) {
    const auto& t = triangles_[k];
    double d = 0.0;
    for (int l = 0; l < 3; ++l) {
      tri_edges_[k][l] = edge_id.at(key(make_edge(t[l], t[(l + 1) % 3])));
      d = std::max(d, (nodes_[t[l]] - nodes_[t[(l + 1) % 3]]).norm());
    }
    diameters_[k] = d;
  }
  boundary_node_.assign(nodes_.size(), false);
  for (int e = 0; e < num_edges(); ++e) {
    if (is_boundary_edge(e)) {
      boundary_node_[edges_[e].a] = true;
      boundary_node_[edges_[e].b] = true;
    }
  }
}

double TriMesh::signed_area(int k) const {
  const auto& t = triangles_[k];
  return 0.5 * orient(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
}

double TriMesh::min_diameter() const { return *std::min_element(diameters_.begin(), diameters_.end()); }
double TriMesh::max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }

std::optional<int> TriMesh::find_node(const Vec2& x, double tol) const {
  int best = -1;
  double best_d = tol;
  for (int i = 0; i < num_nodes(); ++i) {
    const double d = (nodes_[i] - x).norm();
    if (d <= best_d) {
      best = i;
      best_d = d;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

bool TriMesh::is_conforming() const {
  const double scale = domain_.diameter();
  const double tol = 1e-12 * scale;
  double total = 0.0;
  for (int k = 0; k < num_triangles(); ++k) total += signed_area(k);
  if (std::abs(total - domain_.area()) > 1e-10 * domain_.area()) return false;

  for (int e = 0; e < num_edges(); ++e) {
    const Vec2& a = nodes_[edges_[e].a];
    const Vec2& b = nodes_[edges_[e].b];
    if (is_boundary_edge(e)) {
      if (domain_.distance_to_boundary(a) > tol || domain_.distance_to_boundary(b) > tol ||
          domain_.distance_to_boundary(0.5 * (a + b)) > tol) {
        return false;
      }
    }
    const double xmin = std::min(a.x(), b.x()) - tol, xmax = std::max(a.x(), b.x()) + tol;
    const double ymin = std::min(a.y(), b.y()) - tol, ymax = std::max(a.y(), b.y()) + tol;
    for (int i = 0; i < num_nodes(); ++i) {
      if (i == edges_[e].a || i == edges_[e].b) continue;
      const Vec2& x = nodes_[i];
      if (x.x() < xmin || x.x() > xmax || x.y() < ymin || x.y() > ymax) continue;
      if (segment_distance(x, a, b) <= tol) return false;  // hanging node
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Structured mesh

TriMesh build_unit_square_mesh(int n) {
  if (n < 2) throw InvalidArgument("build_unit_square_mesh: n must be at least 2");
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      nodes.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);

  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      bool slash = (i + j) % 2 == 0;  // diagonal (i,j)-(i+1,j+1)
      if ((i == 0 && j == 0) || (i == n - 1 && j == n - 1)) slash = true;
      if ((i == n - 1 && j == 0) || (i == 0 && j == n - 1)) slash = false;
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if (slash) {
        tris.push_back({v00, v10, v11});
        tris.push_back({v00, v11, v01});
      } else {
        tris.push_back({v00, v10, v01});
        tris.push_back({v10, v11, v01});
      }
    }
  }
  return TriMesh(PolygonDomain::unit_square(), std::move(nodes), std::move(tris));
}

// ---------------------------------------------------------------------------
// Grading by longest-edge bisection

namespace {

class RefinableMesh {
 public:
  explicit RefinableMesh(const TriMesh& mesh) : nodes_(mesh.nodes()) {
    for (const auto& t : mesh.triangles()) add_triangle(t);
  }

  std::vector<Vec2>& nodes() { return nodes_; }
  const std::vector<Triangle>& triangles() const { return tris_; }
  bool alive(int k) const { return alive_[k]; }
  int size() const { return static_cast<int>(tris_.size()); }

  double diameter(int k) const {
    const auto& t = tris_[k];
    double d = 0.0;
    for (int l = 0; l < 3; ++l) d = std::max(d, (nodes_[t[l]] - nodes_[t[(l + 1) % 3]]).norm());
    return d;
  }

  double distance_to(int k, const Vec2& x) const {
    const auto& t = tris_[k];
    const Vec2 &a = nodes_[t[0]], &b = nodes_[t[1]], &c = nodes_[t[2]];
    if (orient(a, b, x) >= 0 && orient(b, c, x) >= 0 && orient(c, a, x) >= 0) return 0.0;
    return std::min({segment_distance(x, a, b), segment_distance(x, b, c), segment_distance(x, c, a)});
  }

  /// Longest edge of k with a deterministic tie-break on node ids.
  Edge longest_edge(int k) const {
    const auto& t = tris_[k];
    Edge best = make_edge(t[0], t[1]);
    double best_len = (nodes_[t[0]] - nodes_[t[1]]).squaredNorm();
    for (int l = 1; l < 3; ++l) {
      const Edge e = make_edge(t[l], t[(l + 1) % 3]);
      const double len = (nodes_[e.a] - nodes_[e.b]).squaredNorm();
      if (len > best_len || (len == best_len && key(e) < key(best))) {
        best = e;
        best_len = len;
      }
    }
    return best;
  }

  int neighbor(int k, const Edge& e) const {
    for (int other : edge_map_.at(key(e))) {
      if (other != k) return other;
    }
    return -1;
  }

  /// Splits edge e at `at` (its midpoint unless given) together with every
  /// live triangle that contains it. Returns the new node id.
  int split_edge(const Edge& e, std::optional<Vec2> at = std::nullopt) {
    const int m = static_cast<int>(nodes_.size());
    nodes_.push_back(at ? *at : Vec2(0.5 * (nodes_[e.a] + nodes_[e.b])));
    const std::vector<int> owners = edge_map_.at(key(e));
    for (int k : owners) {
      const Triangle t = tris_[k];
      int l = 0;
      while (make_edge(t[l], t[(l + 1) % 3]) != e) ++l;
      const int p = t[l], q = t[(l + 1) % 3], c = t[(l + 2) % 3];
      kill(k);
      add_triangle({p, m, c});
      add_triangle({m, q, c});
    }
    return m;
  }

  int split_interior(int k, const Vec2& x) {
    const int m = static_cast<int>(nodes_.size());
    nodes_.push_back(x);
    const Triangle t = tris_[k];
    kill(k);
    add_triangle({t[0], t[1], m});
    add_triangle({t[1], t[2], m});
    add_triangle({t[2], t[0], m});
    return m;
  }

  /// Longest-edge propagation path refinement of k.
  void refine(int k) {
    while (alive_[k]) {
      int cur = k;
      for (;;) {
        const Edge e = longest_edge(cur);
        const int nb = neighbor(cur, e);
        if (nb < 0 || longest_edge(nb) == e) {
          split_edge(e);
          break;
        }
        cur = nb;
      }
    }
  }

  TriMesh finish(const PolygonDomain& domain) const {
    std::vector<Triangle> out;
    for (int k = 0; k < size(); ++k)
      if (alive_[k]) out.push_back(tris_[k]);
    return TriMesh(domain, nodes_, std::move(out));
  }

 private:
  void add_triangle(const Triangle& t) {
    const int k = static_cast<int>(tris_.size());
    tris_.push_back(t);
    alive_.push_back(true);
    for (int l = 0; l < 3; ++l) edge_map_[key(make_edge(t[l], t[(l + 1) % 3]))].push_back(k);
  }

  void kill(int k) {
    alive_[k] = false;
    const auto& t = tris_[k];
    for (int l = 0; l < 3; ++l) {
      auto& owners = edge_map_[key(make_edge(t[l], t[(l + 1) % 3]))];
      owners.erase(std::remove(owners.begin(), owners.end(), k), owners.end());
    }
  }

  std::vector<Vec2> nodes_;
  std::vector<Triangle> tris_;
  std::vector<bool> alive_;
  std::map<std::pair<int, int>, std::vector<int>> edge_map_;
};

int insert_point(RefinableMesh& rm, const Vec2& x, double snap_tol) {
  auto& nodes = rm.nodes();
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if ((nodes[i] - x).norm() <= snap_tol) return i;
  }
  for (int k = 0; k < rm.size(); ++k) {
    if (!rm.alive(k)) continue;
    const auto& t = rm.triangles()[k];
    const Vec2 &a = nodes[t[0]], &b = nodes[t[1]], &c = nodes[t[2]];
    const double area2 = orient(a, b, c);
    const std::array<double, 3> lam = {orient(b, c, x) / area2, orient(c, a, x) / area2,
                                       orient(a, b, x) / area2};
    const double lam_tol = snap_tol / std::sqrt(area2);
    if (std::min({lam[0], lam[1], lam[2]}) < -lam_tol) continue;
    for (int l = 0; l < 3; ++l) {
      if (std::abs(lam[l]) <= lam_tol) {
        // on the edge opposite vertex l
        return rm.split_edge(make_edge(t[(l + 1) % 3], t[(l + 2) % 3]), x);
      }
    }
    return rm.split_interior(k, x);
  }
  throw DomainError("grade_toward_points: point outside the mesh");
}

}  // namespace

TriMesh grade_toward_points(const TriMesh& mesh, std::span<const Vec2> points, int levels, double ratio) {
  if (levels < 0) throw InvalidArgument("grade_toward_points: levels must be nonnegative");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("grade_toward_points: ratio must lie in (0,1)");
  const double snap_tol = 1e-12 * mesh.domain().diameter();
  for (const auto& p : points) {
    if (!mesh.domain().strictly_contains(p, snap_tol)) {
      throw DomainError("grade_toward_points: point is not strictly inside the domain");
    }
  }

  RefinableMesh rm(mesh);
  std::vector<int> ids;
  for (const auto& p : points) ids.push_back(insert_point(rm, p, snap_tol));

  std::vector<double> h0(ids.size(), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (int k = 0; k < rm.size(); ++k) {
      if (!rm.alive(k)) continue;
      const auto& t = rm.triangles()[k];
      if (t[0] == ids[i] || t[1] == ids[i] || t[2] == ids[i]) h0[i] = std::max(h0[i], rm.diameter(k));
    }
  }

  for (int level = 1; level <= levels; ++level) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Vec2 center = rm.nodes()[ids[i]];
      const double radius = h0[i] * std::pow(ratio, level - 1);
      const double target = h0[i] * std::pow(ratio, level);
      for (;;) {
        std::vector<int> marked;
        for (int k = 0; k < rm.size(); ++k) {
          if (rm.alive(k) && rm.diameter(k) > target && rm.distance_to(k, center) < radius) {
            marked.push_back(k);
          }
        }
        if (marked.empty()) break;
        for (int k : marked) rm.refine(k);
      }
    }
  }
  return rm.finish(mesh.domain());
}

// ---------------------------------------------------------------------------
// Point location

std::array<double, 3> barycentric_coordinates(const TriMesh& mesh, int k, const Vec2& x) {
  const auto& t = mesh.triangles()[k];
  const Vec2 &a = mesh.nodes()[t[0]], &b = mesh.nodes()[t[1]], &c = mesh.nodes()[t[2]];
  const double area2 = orient(a, b, c);
  const double l1 = orient(c, a, x) / area2;
  const double l2 = orient(a, b, x) / area2;
  return {1.0 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  Vec2 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& p : mesh.nodes()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diam = (hi - lo).norm();
  tol_ = 1e-12 * diam;
  const int target = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  nx_ = ny_ = target;
  lo_ = lo;
  cell_ = Vec2((hi.x() - lo.x()) / nx_, (hi.y() - lo.y()) / ny_);
  bins_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  auto clamp_i = [](double v, int n) { return std::clamp(static_cast<int>(std::floor(v)), 0, n - 1); };
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangles()[k];
    Vec2 tlo = mesh.nodes()[t[0]], thi = tlo;
    for (int l = 1; l < 3; ++l) {
      tlo = tlo.cwiseMin(mesh.nodes()[t[l]]);
      thi = thi.cwiseMax(mesh.nodes()[t[l]]);
    }
    const int i0 = clamp_i((tlo.x() - tol_ - lo_.x()) / cell_.x(), nx_);
    const int i1 = clamp_i((thi.x() + tol_ - lo_.x()) / cell_.x(), nx_);
    const int j0 = clamp_i((tlo.y() - tol_ - lo_.y()) / cell_.y(), ny_);
    const int j1 = clamp_i((thi.y() + tol_ - lo_.y()) / cell_.y(), ny_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j * nx_ + i)].push_back(k);
  }
}

PointLocation PointLocator::locate(const Vec2& x) const {
  const Vec2 rel = x - lo_;
  if (rel.x() < -tol_ || rel.y() < -tol_ || rel.x() > nx_ * cell_.x() + tol_ || rel.y() > ny_ * cell_.y() + tol_) {
    throw NotFound("locate_point: point outside mesh bounding box");
  }
  const int i = std::clamp(static_cast<int>(std::floor(rel.x() / cell_.x())), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(rel.y() / cell_.y())), 0, ny_ - 1);
  for (int k : bins_[static_cast<std::size_t>(j * nx_ + i)]) {
    auto lam = barycentric_coordinates(*mesh_, k, x);
    const double lam_tol = tol_ / mesh_->element_diameters()[k];
    if (lam[0] >= -lam_tol && lam[1] >= -lam_tol && lam[2] >= -lam_tol) {
      double sum = 0.0;
      for (auto& l : lam) {
        l = std::max(l, 0.0);
        sum += l;
      }
      for (auto& l : lam) l /= sum;
      return {k, lam};
    }
  }
  throw NotFound("locate_point: point outside the meshed domain");
}

}  // namespace pointflow
