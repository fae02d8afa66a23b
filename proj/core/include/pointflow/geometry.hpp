#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pointflow {

using Vec2 = Eigen::Vector2d;

/// Simply connected polygon with counter-clockwise vertices.
class PolygonDomain {
 public:
  explicit PolygonDomain(std::vector<Vec2> vertices);

  static PolygonDomain unit_square();

  const std::vector<Vec2>& vertices() const { return vertices_; }
  double area() const;
  double diameter() const;

  /// Exact Euclidean distance from `x` to the polygon boundary.
  double distance_to_boundary(const Vec2& x) const;
  /// Closed containment test with absolute tolerance `tol`.
  bool contains(const Vec2& x, double tol = 0.0) const;
  /// True if `x` is inside and at distance > `tol` from the boundary.
  bool strictly_contains(const Vec2& x, double tol = 0.0) const;

 private:
  std::vector<Vec2> vertices_;
};

using Triangle = std::array<int, 3>;

struct Edge {
  int a;  // a < b
  int b;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Conforming triangulation of a PolygonDomain. Immutable after construction.
///
/// Edges are numbered in lexicographic order of their sorted node pairs, so
/// the numbering depends only on the node and triangle lists.
class TriMesh {
 public:
  TriMesh(PolygonDomain domain, std::vector<Vec2> nodes,
          std::vector<Triangle> triangles);

  const PolygonDomain& domain() const { return domain_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<bool>& boundary_node_flags() const { return boundary_node_; }
  const std::vector<double>& element_diameters() const { return diameters_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  /// Local edges (0,1), (1,2), (2,0) of triangle k as global edge ids.
  const std::array<int, 3>& triangle_edges(int k) const { return tri_edges_[k]; }
  /// The one or two triangles sharing edge e; the second is -1 on the boundary.
  const std::array<int, 2>& edge_triangles(int e) const { return edge_tris_[e]; }
  bool is_boundary_edge(int e) const { return edge_tris_[e][1] < 0; }

  double signed_area(int k) const;
  double min_diameter() const;
  double max_diameter() const;

  /// Index of a node within `tol` of x, if any.
  std::optional<int> find_node(const Vec2& x, double tol) const;

  /// Topological and geometric conformity: every edge is shared by at most
  /// two triangles, no node sits inside a foreign edge, boundary edges lie on
  /// the domain boundary, and the triangle areas sum to the domain area.
  bool is_conforming() const;

 private:
  PolygonDomain domain_;
  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<int, 2>> edge_tris_;
  std::vector<bool> boundary_node_;
  std::vector<double> diameters_;
};

/// Unit square split into n x n cells, two triangles per cell. Diagonals
/// alternate by cell parity; the four corner cells are cut through the corner
/// so that no triangle has all three vertices on the boundary.
TriMesh build_unit_square_mesh(int n);

/// Inserts every point as a mesh node and refines toward it.
///
/// With h0 the largest diameter of the triangles incident to a point right
/// after insertion, level k (1..levels) bisects every triangle within distance
/// h0 * ratio^(k-1) of the point until its diameter is at most h0 * ratio^k.
/// Refinement is longest-edge bisection along the longest-edge propagation
/// path, which keeps the mesh conforming. Points within
/// 1e-12 * domain diameter of an existing node are snapped to it.
TriMesh grade_toward_points(const TriMesh& mesh, std::span<const Vec2> points,
                            int levels, double ratio);

struct PointLocation {
  int triangle;
  std::array<double, 3> barycentric;
};

/// Uniform-bin point locator over a mesh.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);

  /// Lowest-index triangle containing x (within tolerance); barycentric
  /// coordinates are clipped to be nonnegative and renormalized.
  PointLocation locate(const Vec2& x) const;

 private:
  const TriMesh* mesh_;
  Vec2 lo_;
  Vec2 cell_;
  int nx_ = 1;
  int ny_ = 1;
  double tol_ = 0.0;
  std::vector<std::vector<int>> bins_;
};

/// Barycentric coordinates of x with respect to triangle k (unclipped).
std::array<double, 3> barycentric_coordinates(const TriMesh& mesh, int k,
                                              const Vec2& x);

}  // namespace pointflow
