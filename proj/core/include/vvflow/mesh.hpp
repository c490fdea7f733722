// Structured tetrahedral meshes of axis-aligned boxes.
//
// Each grid hex is cut into 6 tetrahedra along the same main diagonal
// (Kuhn split), which keeps the triangulation conforming across hexes and
// self-similar under uniform refinement.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace vvflow {

enum class FaceTag : std::uint8_t { X0, X1, Y0, Y1, Z0, Z1 };

// Outward axis-aligned unit normal encoded by a face tag.
Eigen::Vector3d face_tag_normal(FaceTag tag);
const char* face_tag_name(FaceTag tag);

struct BoundaryFacet {
  int cell;          // owning cell
  int local_facet;   // facet opposite this local vertex
  Eigen::Vector3d normal;  // outward unit normal
  FaceTag tag;
};

struct MeshStats {
  double h_max;
  double volume;
  double surface_area;
  int cell_count;
};

class Mesh {
 public:
  // Vertices, cells, and boundary data are immutable after construction;
  // concurrent reads are safe.
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const Eigen::Vector3d& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 4>& cell(int c) const { return cells_[c]; }
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  // Edge ids of a cell in the local order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
  const std::array<int, 6>& cell_edges(int c) const { return cell_edges_[c]; }
  const std::vector<BoundaryFacet>& boundary_facets() const { return boundary_facets_; }

  // Structured-grid index of a vertex, in doubled units so that P2 edge
  // midpoints live on the same integer lattice: vertex i -> 2*i.
  const std::array<int, 3>& vertex_grid_index(int v) const { return grid_index_[v]; }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  const Eigen::Vector3d& extent() const { return extent_; }
  double h_max() const { return h_max_; }

  // Locates the cell containing x by structured-grid arithmetic.
  // Throws PointOutsideDomainError when x lies outside the box.
  int locate_cell(const Eigen::Vector3d& x) const;

  // Barycentric coordinates of x within cell c.
  Eigen::Vector4d barycentric(int c, const Eigen::Vector3d& x) const;

  double cell_volume(int c) const;

  friend Mesh build_box_mesh(int nx, int ny, int nz, const Eigen::Vector3d& extent);

 private:
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<std::array<int, 3>> grid_index_;
  std::vector<std::array<int, 4>> cells_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 6>> cell_edges_;
  std::vector<BoundaryFacet> boundary_facets_;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  Eigen::Vector3d extent_ = Eigen::Vector3d::Zero();
  double h_max_ = 0.0;
};

// Builds the Kuhn-split box mesh with nx*ny*nz hexes (6 tets each).
// Throws InvalidArgumentError for non-positive counts or extents.
Mesh build_box_mesh(int nx, int ny, int nz,
                    const Eigen::Vector3d& extent = Eigen::Vector3d(1, 1, 1));

// Doubles every structured direction count; volume is preserved and h_max
// halves exactly (the split is self-similar).
Mesh refine_uniform(const Mesh& m);

MeshStats mesh_stats(const Mesh& m);

// Local facet f of a tet consists of the three vertices other than f,
// ordered ascending by local index.
std::array<int, 3> facet_local_vertices(int local_facet);

}  // namespace vvflow
