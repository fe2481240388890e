#pragma once

#include <array>
#include <string>
#include <vector>

#include "rbuq/types.hpp"

namespace rbuq {

/// Uniform triangulation of the square domain (-1/2,1/2)^2.
///
/// Each of the n x n grid cells is split into two triangles along the
/// diagonal from the lower-left to the upper-right corner. All triangles are
/// counter-clockwise oriented. Homogeneous Dirichlet conditions are imposed
/// by restricting to interior nodes; dof_of_node maps node index to interior
/// degree of freedom (-1 on the boundary).
struct Triangulation {
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes; // node coordinates, row per node
  std::vector<std::array<int, 3>> triangles;      // node-index triples, CCW
  std::vector<bool> boundary_node;
  std::vector<int> dof_of_node;
  int n_cells_per_side = 0;
  int n_interior = 0;

  double cell_size() const { return 1.0 / n_cells_per_side; }

  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    Eigen::Vector2d a = nodes.row(tri[0]), b = nodes.row(tri[1]), c = nodes.row(tri[2]);
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }
};

/// Builds the uniform triangulation with n_cells_per_side cells per side.
///
/// n_cells_per_side must be even and >= 2 so that the coordinate axes are
/// mesh lines and the output subdomain (0,1/2)^2 is resolved by whole cells.
inline Triangulation build_mesh(int n_cells_per_side) {
  if (n_cells_per_side < 2 || n_cells_per_side % 2 != 0) {
    throw ConfigError("build_mesh: n_cells_per_side must be even and >= 2 (got " +
                      std::to_string(n_cells_per_side) +
                      "); evenness is required so the quadrant subdomain is resolved exactly");
  }
  const int n = n_cells_per_side;
  const int n_nodes = (n + 1) * (n + 1);
  const double h = 1.0 / n;

  Triangulation mesh;
  mesh.n_cells_per_side = n;
  mesh.nodes.resize(n_nodes, 2);
  mesh.boundary_node.resize(n_nodes);
  mesh.dof_of_node.assign(n_nodes, -1);

  auto node_id = [n](int ix, int iy) { return iy * (n + 1) + ix; };

  int next_dof = 0;
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      const int id = node_id(ix, iy);
      mesh.nodes(id, 0) = -0.5 + ix * h;
      mesh.nodes(id, 1) = -0.5 + iy * h;
      const bool bdry = (ix == 0 || ix == n || iy == 0 || iy == n);
      mesh.boundary_node[id] = bdry;
      if (!bdry) mesh.dof_of_node[id] = next_dof++;
    }
  }
  mesh.n_interior = next_dof;

  mesh.triangles.reserve(2 * n * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int p00 = node_id(ix, iy);
      const int p10 = node_id(ix + 1, iy);
      const int p01 = node_id(ix, iy + 1);
      const int p11 = node_id(ix + 1, iy + 1);
      mesh.triangles.push_back({p00, p10, p11});
      mesh.triangles.push_back({p00, p11, p01});
    }
  }
  return mesh;
}

} // namespace rbuq
