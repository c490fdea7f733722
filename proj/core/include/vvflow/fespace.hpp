// Continuous P1/P2 scalar and vector spaces on box tet meshes, with the
// essential constraints of the velocity-vorticity problem:
//
//   zero trace          all components eliminated on the boundary (H^1_0)
//   zero normal trace   the outward-normal component eliminated; at box
//                       edges both incident normals, at corners all three
//   zero tangential     the complement of normal elimination (vector
//                       potential space, u x n = 0)
//   zero-mean           no nodal constraints; the space exposes the mean
//                       functional m_i = \int phi_i for a Lagrange border
//
// On the box the normal-trace condition is exactly a component condition,
// so strong nodal elimination makes the discrete spaces conforming.
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "vvflow/mesh.hpp"

namespace vvflow {

enum class Family {
  ScalarP1,
  ScalarP2,
  VectorP2,
  VectorP2Broken,  // cellwise-discontinuous vector P2 (projection target)
};

enum class Constraint {
  None,
  ZeroTrace,
  ZeroNormalTrace,
  ZeroTangentialTrace,
  ZeroMeanMultiplier,
};

struct ConstrainedDof {
  int node;
  int component;  // eliminated component; the prescribed value is always 0
};

class FeSpace {
 public:
  static std::shared_ptr<const FeSpace> build(std::shared_ptr<const Mesh> mesh, Family family,
                                              Constraint constraint);

  Family family() const { return family_; }
  Constraint constraint() const { return constraint_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }

  bool is_vector() const { return family_ == Family::VectorP2 || family_ == Family::VectorP2Broken; }
  bool is_broken() const { return family_ == Family::VectorP2Broken; }
  int value_dim() const { return is_vector() ? 3 : 1; }
  int nodes_per_cell() const { return family_ == Family::ScalarP1 ? 4 : 10; }

  int n_nodes() const { return n_nodes_; }
  // Unconstrained (reduced) degrees of freedom.
  int n_dofs() const { return n_dofs_; }

  // Global node of a cell; locals 0..3 are vertices, 4..9 edge midpoints.
  int cell_node(int cell, int local) const;
  Eigen::Vector3d node_coord(int node) const;

  // Reduced dof index of (node, component), or -1 when eliminated.
  int dof_index(int node, int comp) const { return dof_index_[node * value_dim() + comp]; }

  const std::vector<ConstrainedDof>& constrained_dofs() const { return constrained_; }

  // Mean functional vector, only for ZeroMeanMultiplier spaces.
  const Eigen::VectorXd& mean_vector() const;

 private:
  FeSpace() = default;
  std::shared_ptr<const Mesh> mesh_;
  Family family_;
  Constraint constraint_;
  int n_nodes_ = 0;
  int n_dofs_ = 0;
  std::vector<int> dof_index_;
  std::vector<ConstrainedDof> constrained_;
  Eigen::VectorXd mean_;
};

using FeSpacePtr = std::shared_ptr<const FeSpace>;

// The discrete counterparts of X, W, Q and L^2_0 (Taylor-Hood pairs).
FeSpacePtr build_velocity_space(std::shared_ptr<const Mesh> m);    // vector P2, zero trace
FeSpacePtr build_vorticity_space(std::shared_ptr<const Mesh> m);   // vector P2, zero normal trace
FeSpacePtr build_pressure_space(std::shared_ptr<const Mesh> m);    // scalar P1, zero mean
FeSpacePtr build_multiplier_space(std::shared_ptr<const Mesh> m);  // scalar P1, zero mean

struct Field {
  FeSpacePtr space;
  Eigen::VectorXd coeffs;  // length space->n_dofs()

  bool is_zero() const { return coeffs.size() == 0 || coeffs.isZero(0.0); }
};

Field zero_field(FeSpacePtr s);

using ScalarFn = std::function<double(const Eigen::Vector3d&)>;
using VectorFn = std::function<Eigen::Vector3d(const Eigen::Vector3d&)>;

// Nodal interpolation; eliminated components are set by the constraint rule
// (that is, to zero) regardless of g.
Field interpolate(FeSpacePtr s, const ScalarFn& g);
Field interpolate(FeSpacePtr s, const VectorFn& g);

// Point evaluation with structured point location.
double evaluate_scalar(const Field& f, const Eigen::Vector3d& x);
Eigen::Vector3d evaluate_vector(const Field& f, const Eigen::Vector3d& x);

// Cell-local evaluation (no point location); lam is barycentric.
double evaluate_scalar_on_cell(const Field& f, int cell, const Eigen::Vector4d& lam);
Eigen::Vector3d evaluate_vector_on_cell(const Field& f, int cell, const Eigen::Vector4d& lam);

// The solution tuple of the velocity-vorticity system.
struct State {
  Field u;    // velocity on X_h
  Field P;    // pressure on Q_h
  Field w;    // vorticity on W_h
  Field eta;  // divergence multiplier on L_h
};

// Reference P1/P2 shape values and barycentric derivatives.
namespace shape {
// values[i] for the 10 P2 basis functions at barycentric lam.
void p2_values(const Eigen::Vector4d& lam, double* values);
// dvalues[i][k] = d N_i / d lambda_k.
void p2_bary_derivs(const Eigen::Vector4d& lam, double dvalues[10][4]);
void p1_values(const Eigen::Vector4d& lam, double* values);
}  // namespace shape

// Per-cell affine geometry: constant barycentric gradients and volume.
struct CellGeometry {
  Eigen::Vector3d grad_lambda[4];
  double volume;
};
CellGeometry cell_geometry(const Mesh& m, int cell);

}  // namespace vvflow
