#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace mpet {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Boundary sides of the unit square. Interior edges carry no label.
enum class BoundaryLabel : int {
  interior = -1,
  bottom = 0,  // y = 0
  right = 1,   // x = 1
  top = 2,     // y = 1
  left = 3     // x = 0
};

struct Edge {
  int a = -1, b = -1;  // endpoint vertex ids, a < b
  // Incident cells. cell[0] is the cell with the smaller index and owns the
  // stored normal; cell[1] = -1 on boundary edges.
  std::array<int, 2> cell{-1, -1};
  Vec2 normal = Vec2::Zero();  // unit normal pointing out of cell[0]
  double length = 0.0;
};

// Structured triangulation of the unit square. Every square of the N x N grid
// is split along its bottom-left to top-right diagonal, giving 2N^2 congruent
// right-angled triangles with positive (counterclockwise) orientation.
struct Mesh {
  int subdivisions = 0;
  double h = 0.0;  // 1/N
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;  // CCW vertex triples
  std::vector<Edge> edges;
  // Per cell: edge ids, local edge k joining local vertices k and (k+1)%3,
  // and whether the stored edge normal points out of this cell.
  std::vector<std::array<int, 3>> cell_edges;
  std::vector<std::array<signed char, 3>> cell_edge_outward;
  std::vector<double> cell_area;
  std::vector<BoundaryLabel> edge_label;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int cell_count() const { return static_cast<int>(cells.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  bool is_boundary_edge(int e) const { return edges[e].cell[1] < 0; }
  int boundary_edge_count() const;

  Vec2 centroid(int cell) const;
  Vec2 edge_point(int e, double t) const;  // (1-t)*vertex(a) + t*vertex(b)
};

Mesh build_structured_mesh(int subdivisions);

// Labels every boundary edge by the side containing its midpoint.
std::vector<BoundaryLabel> classify_boundary(const Mesh& mesh);

// Plain-text vertex/cell/edge listing.
void dump_mesh(const Mesh& mesh, std::ostream& out);

// Jump and average of traces across an edge. The first argument is the trace
// taken from the owning cell (cell[0]); on boundary edges the second argument
// is ignored and the one-sided convention applies.
double trace_jump(double q1, double q2, bool boundary);
Vec2 trace_jump(const Vec2& v1, const Vec2& v2, bool boundary);
// {v} = (v1.n1 - v2.n2)/2 with n1 = n_e, n2 = -n_e; on boundary v.n_e.
double trace_average(const Vec2& v1, const Vec2& v2, const Vec2& normal, bool boundary);
// {tau} = (tau1 n1 - tau2 n2)/2; on boundary tau n_e.
Vec2 trace_average(const Mat2& t1, const Mat2& t2, const Vec2& normal, bool boundary);

}  // namespace mpet
