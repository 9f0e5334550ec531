#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "avem/geometry.hpp"

namespace avem {

/// An edge of the mesh. `left` traverses it as a -> b; `right` is the cell
/// on the other side, or -1 on the domain boundary.
struct EdgeRecord {
  int a;
  int b;
  int left;
  int right;

  bool boundary() const { return right < 0; }
};

struct SplitResult {
  int kept_cell;   ///< id of the part left of the cut line (reuses the old id)
  int new_cell;    ///< id of the part right of the cut line
  std::vector<int> new_vertices;
  std::vector<int> touched_neighbors;
};

/// Conforming polygonal mesh of convex cells.
///
/// A vertex that lands on a neighbour's edge after a cut becomes a regular
/// (collinear) vertex of that neighbour, so every edge is shared by at most
/// two cells with opposite orientation.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Point2d> vertices, std::vector<std::vector<int>> cells);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Point2d>& vertices() const { return vertices_; }
  const Point2d& vertex(int v) const { return vertices_[v]; }
  const std::vector<std::vector<int>>& cells() const { return cells_; }
  const std::vector<int>& cell(int c) const { return cells_[c]; }
  int generation(int c) const { return generation_[c]; }

  Polygon2d polygon(int c) const;

  /// Edge table sorted by (min vertex, max vertex).
  std::vector<EdgeRecord> edges() const;

  /// The cell across edge (a, b) from `cell`, or -1.
  int neighbor(int cell, int a, int b) const;

  /// Cell pair sharing edge {a, b}; the second entry is -1 on the boundary.
  std::pair<int, int> edge_cells(int a, int b) const;

  std::vector<bool> boundary_vertices() const;

  /// Cells incident to each vertex, in ascending cell order.
  std::vector<std::vector<int>> vertex_cells() const;

  /// Cuts `cell` along the line through `point` with `direction`.
  /// Leaves the mesh untouched if it throws.
  SplitResult split_cell(int cell, const Point2d& point, const Point2d& direction);

  /// Throws InvalidMesh unless cells are convex, CCW, conforming and tile a
  /// region of area `expected_area` (skipped when negative).
  void validate(double expected_area = -1.0) const;

 private:
  struct EdgeSlots {
    int forward = -1;   // cell traversing min -> max
    int backward = -1;  // cell traversing max -> min
  };
  using EdgeKey = std::pair<int, int>;

  static EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }
  void attach(int c);
  void detach(int c);

  std::vector<Point2d> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<int> generation_;
  std::map<EdgeKey, EdgeSlots> edges_;
};

/// n x n uniform grid of squares on (0,1)^2.
Mesh initial_mesh(int n);

struct Patch {
  int center;
  std::vector<int> members;  ///< ascending cell ids
};

/// All cells containing vertex v.
Patch vertex_patch(const Mesh& mesh, int v);

/// All cells whose closure meets the closure of cell c (c included).
Patch cell_patch(const Mesh& mesh, int c);

/// Same as cell_patch for every cell at once.
std::vector<std::vector<int>> cell_patches(const Mesh& mesh);

struct CellRegularity {
  double diameter;
  double chebyshev_radius;
  double aspect_ratio;         ///< h_K / rho_K
  double edge_ratio;           ///< h_K / min h_E
  double mapped_aspect_ratio;  ///< h / rho of F_K(K)
  double mapped_edge_ratio;
  double anisotropy_ratio;     ///< lambda1 / lambda2
  double alpha;
};

struct NeighborRegularity {
  int plus;   ///< K+, the lower cell id
  int minus;  ///< K-
  double delta1;
  double delta2;
  double rotation_deviation;  ///< ||I - R|| (lambda+_1 / lambda+_2)^(1/2)
};

struct RegularityReport {
  std::vector<CellRegularity> cells;
  std::vector<NeighborRegularity> pairs;

  double max_mapped_aspect_ratio() const;
  double max_abs_delta() const;
  double max_rotation_deviation() const;
};

/// Radius of the largest disc inside a convex polygon.
double chebyshev_radius(const Polygon2d& poly);

RegularityReport regularity_report(const Mesh& mesh);

}  // namespace avem
