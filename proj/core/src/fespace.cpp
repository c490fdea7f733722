#include "vvflow/fespace.hpp"

#include <array>

#include "vvflow/errors.hpp"
#include "vvflow/quadrature.hpp"

namespace vvflow {

namespace {

constexpr int kEdgeVerts[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

// Doubled-unit grid index of a node (vertex or edge midpoint).
std::array<int, 3> node_grid_index(const Mesh& m, int node) {
  if (node < m.n_vertices()) return m.vertex_grid_index(node);
  const auto& e = m.edge(node - m.n_vertices());
  const auto& a = m.vertex_grid_index(e[0]);
  const auto& b = m.vertex_grid_index(e[1]);
  return {(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
}

// Which box faces a node lies on: for axis a, -1 (low face), +1 (high), 0 (neither).
std::array<int, 3> node_face_flags(const Mesh& m, const std::array<int, 3>& gi) {
  const int nmax[3] = {2 * m.nx(), 2 * m.ny(), 2 * m.nz()};
  std::array<int, 3> flags{};
  for (int a = 0; a < 3; ++a) flags[a] = gi[a] == 0 ? -1 : (gi[a] == nmax[a] ? 1 : 0);
  return flags;
}

}  // namespace

namespace shape {

void p1_values(const Eigen::Vector4d& lam, double* values) {
  for (int i = 0; i < 4; ++i) values[i] = lam[i];
}

void p2_values(const Eigen::Vector4d& lam, double* values) {
  for (int i = 0; i < 4; ++i) values[i] = lam[i] * (2.0 * lam[i] - 1.0);
  for (int e = 0; e < 6; ++e) values[4 + e] = 4.0 * lam[kEdgeVerts[e][0]] * lam[kEdgeVerts[e][1]];
}

void p2_bary_derivs(const Eigen::Vector4d& lam, double dvalues[10][4]) {
  for (int i = 0; i < 10; ++i)
    for (int k = 0; k < 4; ++k) dvalues[i][k] = 0.0;
  for (int i = 0; i < 4; ++i) dvalues[i][i] = 4.0 * lam[i] - 1.0;
  for (int e = 0; e < 6; ++e) {
    const int a = kEdgeVerts[e][0], b = kEdgeVerts[e][1];
    dvalues[4 + e][a] = 4.0 * lam[b];
    dvalues[4 + e][b] = 4.0 * lam[a];
  }
}

}  // namespace shape

CellGeometry cell_geometry(const Mesh& m, int cell) {
  const auto& v = m.cell(cell);
  Eigen::Matrix3d J;
  J.col(0) = m.vertex(v[1]) - m.vertex(v[0]);
  J.col(1) = m.vertex(v[2]) - m.vertex(v[0]);
  J.col(2) = m.vertex(v[3]) - m.vertex(v[0]);
  const Eigen::Matrix3d Jinv = J.inverse();
  CellGeometry g;
  for (int i = 1; i < 4; ++i) g.grad_lambda[i] = Jinv.row(i - 1).transpose();
  g.grad_lambda[0] = -(g.grad_lambda[1] + g.grad_lambda[2] + g.grad_lambda[3]);
  g.volume = J.determinant() / 6.0;
  return g;
}

std::shared_ptr<const FeSpace> FeSpace::build(std::shared_ptr<const Mesh> mesh, Family family,
                                              Constraint constraint) {
  auto sp = std::shared_ptr<FeSpace>(new FeSpace());
  sp->mesh_ = std::move(mesh);
  sp->family_ = family;
  sp->constraint_ = constraint;
  const Mesh& m = *sp->mesh_;

  const bool vector = sp->is_vector();
  if (!vector && (constraint == Constraint::ZeroNormalTrace || constraint == Constraint::ZeroTangentialTrace))
    throw InvalidArgumentError("normal/tangential trace constraints need a vector space");
  if (family == Family::VectorP2Broken && constraint != Constraint::None)
    throw InvalidArgumentError("broken spaces do not support constraints");

  switch (family) {
    case Family::ScalarP1: sp->n_nodes_ = m.n_vertices(); break;
    case Family::ScalarP2:
    case Family::VectorP2: sp->n_nodes_ = m.n_vertices() + m.n_edges(); break;
    case Family::VectorP2Broken: sp->n_nodes_ = 10 * m.n_cells(); break;
  }

  const int dim = sp->value_dim();
  sp->dof_index_.assign(static_cast<size_t>(sp->n_nodes_) * dim, 0);

  // Mark eliminated components.
  if (constraint == Constraint::ZeroTrace || constraint == Constraint::ZeroNormalTrace ||
      constraint == Constraint::ZeroTangentialTrace) {
    for (int node = 0; node < sp->n_nodes_; ++node) {
      const auto flags = node_face_flags(m, node_grid_index(m, node));
      const bool on_boundary = flags[0] != 0 || flags[1] != 0 || flags[2] != 0;
      if (!on_boundary) continue;
      if (constraint == Constraint::ZeroTrace) {
        for (int c = 0; c < dim; ++c) sp->dof_index_[node * dim + c] = -1;
      } else if (constraint == Constraint::ZeroNormalTrace) {
        for (int a = 0; a < 3; ++a)
          if (flags[a] != 0) sp->dof_index_[node * dim + a] = -1;
      } else {  // ZeroTangentialTrace
        int n_faces = (flags[0] != 0) + (flags[1] != 0) + (flags[2] != 0);
        for (int a = 0; a < 3; ++a) {
          const bool is_normal_axis = flags[a] != 0;
          if (n_faces >= 2 || !is_normal_axis) sp->dof_index_[node * dim + a] = -1;
        }
      }
    }
  }

  int next = 0;
  for (size_t i = 0; i < sp->dof_index_.size(); ++i) {
    if (sp->dof_index_[i] < 0) {
      sp->constrained_.push_back({static_cast<int>(i) / dim, static_cast<int>(i) % dim});
    } else {
      sp->dof_index_[i] = next++;
    }
  }
  sp->n_dofs_ = next;

  if (constraint == Constraint::ZeroMeanMultiplier) {
    // m_i = \int phi_i, assembled with a rule exact for the basis degree.
    const auto& rule = tet_rule(family == Family::ScalarP1 ? 1 : 2);
    Eigen::VectorXd mv = Eigen::VectorXd::Zero(sp->n_dofs_);
    const int npc = sp->nodes_per_cell();
    double vals[10];
    for (int c = 0; c < m.n_cells(); ++c) {
      const double vol = m.cell_volume(c);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                            rule.points[q][3]);
        if (npc == 4)
          shape::p1_values(lam, vals);
        else
          shape::p2_values(lam, vals);
        const double wq = rule.weights[q] * vol;
        for (int i = 0; i < npc; ++i) {
          int dof = sp->dof_index(sp->cell_node(c, i), 0);
          if (dof >= 0) mv[dof] += wq * vals[i];
        }
      }
    }
    sp->mean_ = std::move(mv);
  }

  return sp;
}

int FeSpace::cell_node(int cell, int local) const {
  if (family_ == Family::VectorP2Broken) return 10 * cell + local;
  if (local < 4) return mesh_->cell(cell)[local];
  if (family_ == Family::ScalarP1) throw InvalidArgumentError("P1 space has 4 nodes per cell");
  return mesh_->n_vertices() + mesh_->cell_edges(cell)[local - 4];
}

Eigen::Vector3d FeSpace::node_coord(int node) const {
  const Mesh& m = *mesh_;
  if (family_ == Family::VectorP2Broken) {
    const int cell = node / 10, local = node % 10;
    if (local < 4) return m.vertex(m.cell(cell)[local]);
    const auto& e = m.edge(m.cell_edges(cell)[local - 4]);
    return 0.5 * (m.vertex(e[0]) + m.vertex(e[1]));
  }
  if (node < m.n_vertices()) return m.vertex(node);
  const auto& e = m.edge(node - m.n_vertices());
  return 0.5 * (m.vertex(e[0]) + m.vertex(e[1]));
}

const Eigen::VectorXd& FeSpace::mean_vector() const {
  if (constraint_ != Constraint::ZeroMeanMultiplier)
    throw InvalidArgumentError("mean_vector: space has no zero-mean multiplier");
  return mean_;
}

FeSpacePtr build_velocity_space(std::shared_ptr<const Mesh> m) {
  return FeSpace::build(std::move(m), Family::VectorP2, Constraint::ZeroTrace);
}
FeSpacePtr build_vorticity_space(std::shared_ptr<const Mesh> m) {
  return FeSpace::build(std::move(m), Family::VectorP2, Constraint::ZeroNormalTrace);
}
FeSpacePtr build_pressure_space(std::shared_ptr<const Mesh> m) {
  return FeSpace::build(std::move(m), Family::ScalarP1, Constraint::ZeroMeanMultiplier);
}
FeSpacePtr build_multiplier_space(std::shared_ptr<const Mesh> m) {
  return FeSpace::build(std::move(m), Family::ScalarP1, Constraint::ZeroMeanMultiplier);
}

Field zero_field(FeSpacePtr s) {
  Field f;
  f.coeffs = Eigen::VectorXd::Zero(s->n_dofs());
  f.space = std::move(s);
  return f;
}

Field interpolate(FeSpacePtr s, const ScalarFn& g) {
  if (s->is_vector()) throw InvalidArgumentError("interpolate: scalar callback on vector space");
  Field f = zero_field(s);
  for (int node = 0; node < s->n_nodes(); ++node) {
    int dof = s->dof_index(node, 0);
    if (dof >= 0) f.coeffs[dof] = g(s->node_coord(node));
  }
  return f;
}

Field interpolate(FeSpacePtr s, const VectorFn& g) {
  if (!s->is_vector()) throw InvalidArgumentError("interpolate: vector callback on scalar space");
  Field f = zero_field(s);
  for (int node = 0; node < s->n_nodes(); ++node) {
    Eigen::Vector3d v = g(s->node_coord(node));
    for (int c = 0; c < 3; ++c) {
      int dof = s->dof_index(node, c);
      if (dof >= 0) f.coeffs[dof] = v[c];
    }
  }
  return f;
}

double evaluate_scalar_on_cell(const Field& f, int cell, const Eigen::Vector4d& lam) {
  const FeSpace& s = *f.space;
  const int npc = s.nodes_per_cell();
  double vals[10];
  if (npc == 4)
    shape::p1_values(lam, vals);
  else
    shape::p2_values(lam, vals);
  double out = 0.0;
  for (int i = 0; i < npc; ++i) {
    int dof = s.dof_index(s.cell_node(cell, i), 0);
    if (dof >= 0) out += f.coeffs[dof] * vals[i];
  }
  return out;
}

Eigen::Vector3d evaluate_vector_on_cell(const Field& f, int cell, const Eigen::Vector4d& lam) {
  const FeSpace& s = *f.space;
  double vals[10];
  shape::p2_values(lam, vals);
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int i = 0; i < 10; ++i) {
    const int node = s.cell_node(cell, i);
    for (int c = 0; c < 3; ++c) {
      int dof = s.dof_index(node, c);
      if (dof >= 0) out[c] += f.coeffs[dof] * vals[i];
    }
  }
  return out;
}

double evaluate_scalar(const Field& f, const Eigen::Vector3d& x) {
  const Mesh& m = f.space->mesh();
  int cell = m.locate_cell(x);
  return evaluate_scalar_on_cell(f, cell, m.barycentric(cell, x));
}

Eigen::Vector3d evaluate_vector(const Field& f, const Eigen::Vector3d& x) {
  const Mesh& m = f.space->mesh();
  int cell = m.locate_cell(x);
  return evaluate_vector_on_cell(f, cell, m.barycentric(cell, x));
}

}  // namespace vvflow
