#include "vvflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "vvflow/errors.hpp"

namespace vvflow {

namespace {

// The six permutations of (0,1,2); tet k of a hex covers the local region
// f[perm[0]] >= f[perm[1]] >= f[perm[2]].
constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

int perm_sign(const int* p) {
  int inv = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (p[i] > p[j]) ++inv;
  return (inv % 2 == 0) ? 1 : -1;
}

}  // namespace

Eigen::Vector3d face_tag_normal(FaceTag tag) {
  switch (tag) {
    case FaceTag::X0: return {-1, 0, 0};
    case FaceTag::X1: return {1, 0, 0};
    case FaceTag::Y0: return {0, -1, 0};
    case FaceTag::Y1: return {0, 1, 0};
    case FaceTag::Z0: return {0, 0, -1};
    case FaceTag::Z1: return {0, 0, 1};
  }
  return Eigen::Vector3d::Zero();
}

const char* face_tag_name(FaceTag tag) {
  switch (tag) {
    case FaceTag::X0: return "x0";
    case FaceTag::X1: return "x1";
    case FaceTag::Y0: return "y0";
    case FaceTag::Y1: return "y1";
    case FaceTag::Z0: return "z0";
    case FaceTag::Z1: return "z1";
  }
  return "?";
}

std::array<int, 3> facet_local_vertices(int local_facet) {
  switch (local_facet) {
    case 0: return {1, 2, 3};
    case 1: return {0, 2, 3};
    case 2: return {0, 1, 3};
    default: return {0, 1, 2};
  }
}

Mesh build_box_mesh(int nx, int ny, int nz, const Eigen::Vector3d& extent) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw InvalidArgumentError("build_box_mesh: subdivision counts must be >= 1");
  if (!(extent.x() > 0 && extent.y() > 0 && extent.z() > 0))
    throw InvalidArgumentError("build_box_mesh: extent must be componentwise positive");

  Mesh m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.nz_ = nz;
  m.extent_ = extent;

  const int nvx = nx + 1, nvy = ny + 1, nvz = nz + 1;
  m.vertices_.reserve(static_cast<size_t>(nvx) * nvy * nvz);
  m.grid_index_.reserve(m.vertices_.capacity());
  auto coord = [](int i, int n, double len) {
    // Division last, endpoints snapped, so boundary detection by index and
    // by coordinate agree exactly.
    if (i == 0) return 0.0;
    if (i == n) return len;
    return (static_cast<double>(i) * len) / n;
  };
  for (int k = 0; k < nvz; ++k)
    for (int j = 0; j < nvy; ++j)
      for (int i = 0; i < nvx; ++i) {
        m.vertices_.emplace_back(coord(i, nx, extent.x()), coord(j, ny, extent.y()),
                                 coord(k, nz, extent.z()));
        m.grid_index_.push_back({2 * i, 2 * j, 2 * k});
      }

  auto vid = [&](int i, int j, int k) { return i + nvx * (j + nvy * k); };

  m.cells_.reserve(static_cast<size_t>(nx) * ny * nz * 6);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (int t = 0; t < 6; ++t) {
          const int* p = kPerms[t];
          int off[4][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}};
          off[1][p[0]] = 1;
          off[2][p[0]] = 1;
          off[2][p[1]] = 1;
          std::array<int, 4> cell = {
              vid(i + off[0][0], j + off[0][1], k + off[0][2]),
              vid(i + off[1][0], j + off[1][1], k + off[1][2]),
              vid(i + off[2][0], j + off[2][1], k + off[2][2]),
              vid(i + off[3][0], j + off[3][1], k + off[3][2])};
          if (perm_sign(p) < 0) std::swap(cell[1], cell[2]);
          m.cells_.push_back(cell);
        }

  // Global edge enumeration, ordered lexicographically for determinism.
  {
    std::vector<std::uint64_t> keys;
    keys.reserve(m.cells_.size() * 6);
    auto key_of = [](int a, int b) {
      if (a > b) std::swap(a, b);
      return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    constexpr int kEdgeVerts[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& c : m.cells_)
      for (auto& ev : kEdgeVerts) keys.push_back(key_of(c[ev[0]], c[ev[1]]));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::unordered_map<std::uint64_t, int> edge_id;
    edge_id.reserve(keys.size() * 2);
    m.edges_.reserve(keys.size());
    for (auto k2 : keys) {
      edge_id.emplace(k2, static_cast<int>(m.edges_.size()));
      m.edges_.push_back({static_cast<int>(k2 >> 32), static_cast<int>(k2 & 0xffffffffu)});
    }
    m.cell_edges_.resize(m.cells_.size());
    for (size_t c = 0; c < m.cells_.size(); ++c)
      for (int e = 0; e < 6; ++e)
        m.cell_edges_[c][e] =
            edge_id.at(key_of(m.cells_[c][kEdgeVerts[e][0]], m.cells_[c][kEdgeVerts[e][1]]));
  }

  // Boundary facets: facets owned by exactly one cell. On a box every such
  // facet lies in a tagged coordinate plane, detected by integer indices.
  {
    struct FacetRef {
      int cell, local;
    };
    std::unordered_map<std::uint64_t, std::pair<FacetRef, int>> count;
    count.reserve(m.cells_.size() * 4);
    auto fkey = [&](std::array<int, 3> v) {
      std::sort(v.begin(), v.end());
      // Vertex ids fit in 21 bits for desk-scale meshes.
      return (static_cast<std::uint64_t>(v[0]) << 42) |
             (static_cast<std::uint64_t>(v[1]) << 21) | static_cast<std::uint64_t>(v[2]);
    };
    for (int c = 0; c < m.n_cells(); ++c)
      for (int f = 0; f < 4; ++f) {
        auto lv = facet_local_vertices(f);
        std::array<int, 3> gv = {m.cells_[c][lv[0]], m.cells_[c][lv[1]], m.cells_[c][lv[2]]};
        auto [it, inserted] = count.try_emplace(fkey(gv), std::make_pair(FacetRef{c, f}, 1));
        if (!inserted) it->second.second += 1;
      }
    for (const auto& [key, val] : count) {
      (void)key;
      if (val.second != 1) continue;
      const auto [c, f] = val.first;
      auto lv = facet_local_vertices(f);
      const auto& gi0 = m.grid_index_[m.cells_[c][lv[0]]];
      const auto& gi1 = m.grid_index_[m.cells_[c][lv[1]]];
      const auto& gi2 = m.grid_index_[m.cells_[c][lv[2]]];
      const int nmax[3] = {2 * nx, 2 * ny, 2 * nz};
      FaceTag tag = FaceTag::X0;
      bool found = false;
      for (int a = 0; a < 3 && !found; ++a) {
        if (gi0[a] == 0 && gi1[a] == 0 && gi2[a] == 0) {
          tag = static_cast<FaceTag>(2 * a);
          found = true;
        } else if (gi0[a] == nmax[a] && gi1[a] == nmax[a] && gi2[a] == nmax[a]) {
          tag = static_cast<FaceTag>(2 * a + 1);
          found = true;
        }
      }
      if (!found) throw Error("build_box_mesh: boundary facet not on a box face");
      m.boundary_facets_.push_back({c, f, face_tag_normal(tag), tag});
    }
    std::sort(m.boundary_facets_.begin(), m.boundary_facets_.end(),
              [](const BoundaryFacet& a, const BoundaryFacet& b) {
                return a.cell != b.cell ? a.cell < b.cell : a.local_facet < b.local_facet;
              });
  }

  double h2 = 0.0;
  for (const auto& c : m.cells_)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        h2 = std::max(h2, (m.vertices_[c[a]] - m.vertices_[c[b]]).squaredNorm());
  m.h_max_ = std::sqrt(h2);

  return m;
}

Mesh refine_uniform(const Mesh& m) {
  if (m.n_cells() == 0) throw InvalidArgumentError("refine_uniform: empty mesh");
  return build_box_mesh(2 * m.nx(), 2 * m.ny(), 2 * m.nz(), m.extent());
}

double Mesh::cell_volume(int c) const {
  const auto& v = cells_[c];
  Eigen::Matrix3d J;
  J.col(0) = vertices_[v[1]] - vertices_[v[0]];
  J.col(1) = vertices_[v[2]] - vertices_[v[0]];
  J.col(2) = vertices_[v[3]] - vertices_[v[0]];
  return J.determinant() / 6.0;
}

int Mesh::locate_cell(const Eigen::Vector3d& x) const {
  const double tol = 1e-12 * std::max({extent_.x(), extent_.y(), extent_.z()});
  for (int a = 0; a < 3; ++a)
    if (x[a] < -tol || x[a] > extent_[a] + tol)
      throw PointOutsideDomainError("point outside the box domain");
  const int n[3] = {nx_, ny_, nz_};
  int idx[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    double t = x[a] / extent_[a] * n[a];
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, n[a] - 1);
    idx[a] = i;
    frac[a] = t - i;
  }
  const int hex = idx[0] + nx_ * (idx[1] + ny_ * idx[2]);
  // Rank the fractional coordinates to pick the Kuhn tet, then confirm with
  // barycentric coordinates (ties on internal faces resolve either way).
  int best = -1;
  double best_min = -1e300;
  for (int t = 0; t < 6; ++t) {
    const int* p = kPerms[t];
    if (!(frac[p[0]] >= frac[p[1]] - 1e-14 && frac[p[1]] >= frac[p[2]] - 1e-14)) continue;
    int c = 6 * hex + t;
    Eigen::Vector4d lam = barycentric(c, x);
    double mn = lam.minCoeff();
    if (mn > best_min) {
      best_min = mn;
      best = c;
    }
  }
  if (best < 0 || best_min < -1e-9) {
    // Fall back to scanning the hex (robust against roundoff at tet faces).
    for (int t = 0; t < 6; ++t) {
      int c = 6 * hex + t;
      double mn = barycentric(c, x).minCoeff();
      if (mn > best_min) {
        best_min = mn;
        best = c;
      }
    }
  }
  if (best < 0 || best_min < -1e-8)
    throw PointOutsideDomainError("point location failed");
  return best;
}

Eigen::Vector4d Mesh::barycentric(int c, const Eigen::Vector3d& x) const {
  const auto& v = cells_[c];
  Eigen::Matrix3d J;
  J.col(0) = vertices_[v[1]] - vertices_[v[0]];
  J.col(1) = vertices_[v[2]] - vertices_[v[0]];
  J.col(2) = vertices_[v[3]] - vertices_[v[0]];
  Eigen::Vector3d lam123 = J.partialPivLu().solve(x - vertices_[v[0]]);
  Eigen::Vector4d lam;
  lam[0] = 1.0 - lam123.sum();
  lam[1] = lam123[0];
  lam[2] = lam123[1];
  lam[3] = lam123[2];
  return lam;
}

MeshStats mesh_stats(const Mesh& m) {
  MeshStats s{};
  s.h_max = m.h_max();
  s.cell_count = m.n_cells();
  double vol = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) vol += m.cell_volume(c);
  s.volume = vol;
  double area = 0.0;
  for (const auto& bf : m.boundary_facets()) {
    auto lv = facet_local_vertices(bf.local_facet);
    const auto& cell = m.cell(bf.cell);
    const Eigen::Vector3d a = m.vertex(cell[lv[1]]) - m.vertex(cell[lv[0]]);
    const Eigen::Vector3d b = m.vertex(cell[lv[2]]) - m.vertex(cell[lv[0]]);
    area += 0.5 * a.cross(b).norm();
  }
  s.surface_area = area;
  return s;
}

}  // namespace vvflow
