#include "mesh.hpp"

#include <map>
#include <ostream>
#include <stdexcept>

namespace mpet {

int Mesh::boundary_edge_count() const {
  int count = 0;
  for (int e = 0; e < edge_count(); ++e)
    if (is_boundary_edge(e)) ++count;
  return count;
}

Vec2 Mesh::centroid(int cell) const {
  const auto& c = cells[cell];
  return (vertices[c[0]] + vertices[c[1]] + vertices[c[2]]) / 3.0;
}

Vec2 Mesh::edge_point(int e, double t) const {
  const Edge& ed = edges[e];
  return (1.0 - t) * vertices[ed.a] + t * vertices[ed.b];
}

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

}  // namespace

Mesh build_structured_mesh(int subdivisions) {
  if (subdivisions < 1) throw std::invalid_argument("build_structured_mesh: subdivisions must be >= 1");
  const int N = subdivisions;
  Mesh mesh;
  mesh.subdivisions = N;
  mesh.h = 1.0 / N;

  mesh.vertices.reserve((N + 1) * (N + 1));
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) mesh.vertices.emplace_back(double(i) / N, double(j) / N);
  auto vid = [N](int i, int j) { return j * (N + 1) + i; };

  mesh.cells.reserve(2 * N * N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      // Diagonal runs bottom-left to top-right within each grid square.
      mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.cells.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }

  const int n_cells = mesh.cell_count();
  mesh.cell_area.resize(n_cells);
  mesh.cell_edges.resize(n_cells);
  mesh.cell_edge_outward.resize(n_cells);

  std::map<std::pair<int, int>, int> edge_of;
  for (int c = 0; c < n_cells; ++c) {
    const auto& cv = mesh.cells[c];
    mesh.cell_area[c] = signed_area(mesh.vertices[cv[0]], mesh.vertices[cv[1]], mesh.vertices[cv[2]]);
    if (mesh.cell_area[c] <= 0.0) throw std::logic_error("build_structured_mesh: nonpositive cell area");
    for (int k = 0; k < 3; ++k) {
      const int va = cv[k];
      const int vb = cv[(k + 1) % 3];
      const auto key = std::minmax(va, vb);
      auto it = edge_of.find(key);
      int e;
      if (it == edge_of.end()) {
        e = mesh.edge_count();
        edge_of.emplace(key, e);
        Edge edge;
        edge.a = key.first;
        edge.b = key.second;
        edge.cell[0] = c;  // first incident cell has the smaller cell index
        const Vec2 d = mesh.vertices[vb] - mesh.vertices[va];
        edge.length = d.norm();
        // Outward normal of the first incident cell: rotate the CCW-oriented
        // tangent va->vb by -90 degrees.
        edge.normal = Vec2(d.y(), -d.x()) / edge.length;
        mesh.edges.push_back(edge);
      } else {
        e = it->second;
        if (mesh.edges[e].cell[1] >= 0) throw std::logic_error("build_structured_mesh: edge with >2 cells");
        mesh.edges[e].cell[1] = c;
      }
      mesh.cell_edges[c][k] = e;
      mesh.cell_edge_outward[c][k] = static_cast<signed char>(mesh.edges[e].cell[0] == c ? 1 : -1);
    }
  }

  mesh.edge_label = classify_boundary(mesh);
  return mesh;
}

std::vector<BoundaryLabel> classify_boundary(const Mesh& mesh) {
  std::vector<BoundaryLabel> label(mesh.edge_count(), BoundaryLabel::interior);
  const double tol = 1e-12;
  for (int e = 0; e < mesh.edge_count(); ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    const Vec2 mid = mesh.edge_point(e, 0.5);
    if (std::abs(mid.y()) < tol)
      label[e] = BoundaryLabel::bottom;
    else if (std::abs(mid.x() - 1.0) < tol)
      label[e] = BoundaryLabel::right;
    else if (std::abs(mid.y() - 1.0) < tol)
      label[e] = BoundaryLabel::top;
    else if (std::abs(mid.x()) < tol)
      label[e] = BoundaryLabel::left;
    else
      throw std::logic_error("classify_boundary: boundary edge not on a side of the unit square");
  }
  return label;
}

void dump_mesh(const Mesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.vertex_count() << "\n";
  for (int v = 0; v < mesh.vertex_count(); ++v)
    out << v << " " << mesh.vertices[v].x() << " " << mesh.vertices[v].y() << "\n";
  out << "cells " << mesh.cell_count() << "\n";
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const auto& cv = mesh.cells[c];
    out << c << " " << cv[0] << " " << cv[1] << " " << cv[2] << "\n";
  }
  out << "edges " << mesh.edge_count() << "\n";
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const Edge& ed = mesh.edges[e];
    out << e << " " << ed.a << " " << ed.b << " " << ed.cell[0] << " " << ed.cell[1] << " "
        << ed.normal.x() << " " << ed.normal.y() << " " << static_cast<int>(mesh.edge_label[e]) << "\n";
  }
}

double trace_jump(double q1, double q2, bool boundary) { return boundary ? q1 : q1 - q2; }

Vec2 trace_jump(const Vec2& v1, const Vec2& v2, bool boundary) { return boundary ? v1 : Vec2(v1 - v2); }

double trace_average(const Vec2& v1, const Vec2& v2, const Vec2& normal, bool boundary) {
  if (boundary) return v1.dot(normal);
  return 0.5 * (v1 + v2).dot(normal);
}

Vec2 trace_average(const Mat2& t1, const Mat2& t2, const Vec2& normal, bool boundary) {
  if (boundary) return t1 * normal;
  return 0.5 * (t1 + t2) * normal;
}

}  // namespace mpet
