// Assembly of every bilinear/trilinear form and functional of the weak
// velocity-vorticity system, including the pressure boundary functional
// f_bc in volume and surface form.
//
// Cell-parallel assembly uses per-thread triplet buffers over contiguous
// ascending cell ranges; the merge is sorted by (row, col) with insertion
// order preserved, so results are bitwise independent of thread count.
#pragma once

#include <functional>

#include "vvflow/fespace.hpp"
#include "vvflow/sparse.hpp"

namespace vvflow {

struct AssemblyOptions {
  // Exact for every bilinear P2 term. Trilinear P2^3 terms need 6; the
  // default commits that one variational crime, deliberately and visibly.
  int quad_degree = 4;
  int n_threads = 1;
};

struct CellPoint {
  int cell;
  Eigen::Vector4d lam;
  Eigen::Vector3d x;
};

// A vector-valued integrand evaluable cell-by-cell: either analytic data or
// a finite-element Field (evaluated through its basis, no point location).
class CellVectorField {
 public:
  static CellVectorField zero();
  static CellVectorField analytic(VectorFn f);
  static CellVectorField analytic(VectorFn f, std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> jac);
  static CellVectorField from_field(const Field& f);  // keeps a copy of coeffs
  // Arbitrary cell-aware integrand (products of FE fields, closures, ...).
  static CellVectorField compose(std::function<Eigen::Vector3d(const CellPoint&, const CellGeometry&)> f);

  Eigen::Vector3d value(const CellPoint& p, const CellGeometry& g) const;
  // Jacobian J(r,c) = d value_r / d x_c. Throws unless available.
  Eigen::Matrix3d jacobian(const CellPoint& p, const CellGeometry& g) const;
  bool has_jacobian() const;
  bool is_zero() const { return zero_; }

 private:
  std::function<Eigen::Vector3d(const CellPoint&, const CellGeometry&)> value_;
  std::function<Eigen::Matrix3d(const CellPoint&, const CellGeometry&)> jac_;
  bool zero_ = false;
};

class CellScalarField {
 public:
  static CellScalarField analytic(ScalarFn f);
  static CellScalarField from_field(const Field& f);
  double value(const CellPoint& p) const { return value_(p); }

 private:
  std::function<double(const CellPoint&)> value_;
};

// alpha(u,v) terms: symmetric positive definite mass.
SparseMatrix assemble_mass(const FeSpace& s, const AssemblyOptions& opt = {});

// nu(grad u, grad v): symmetric PSD; kernel = constants when unconstrained.
SparseMatrix assemble_gradgrad(const FeSpace& s, const AssemblyOptions& opt = {});

// nu(rot w, rot chi) and nu(div w, div chi) on vector spaces.
SparseMatrix assemble_rotrot(const FeSpace& s, const AssemblyOptions& opt = {});
SparseMatrix assemble_divdiv(const FeSpace& s, const AssemblyOptions& opt = {});

// B[q][v] = (q, div v); rows q_space, cols v_space.
SparseMatrix assemble_div_pressure(const FeSpace& v_space, const FeSpace& q_space,
                                   const AssemblyOptions& opt = {});

// G[psi][q] = (grad q, psi); rows vec_space, cols scalar_space.
SparseMatrix assemble_grad_coupling(const FeSpace& vec_space, const FeSpace& scalar_space,
                                    const AssemblyOptions& opt = {});

// Linearized cross term C[v][u] = (w x u, v). Skew-symmetric when trial and
// test spaces coincide; exactly zero when w is the zero field.
SparseMatrix assemble_cross(const CellVectorField& w, const FeSpace& trial, const FeSpace& test,
                            const AssemblyOptions& opt = {});

enum class ConvectionMode {
  AdvectedTrial,  // b(a, v, w) = (a . grad v_trial, v_test)
  FrozenMiddle,   // b(v, a, w) = (v_trial . grad a, v_test); needs Jacobian of a
};
SparseMatrix assemble_convection(const CellVectorField& a, ConvectionMode mode,
                                 const FeSpace& trial, const FeSpace& test,
                                 const AssemblyOptions& opt = {});

// C[psi][u] = (a x rot u, psi); exactly empty when a is the zero field.
SparseMatrix assemble_a_cross_rot(const CellVectorField& a, const FeSpace& trial,
                                  const FeSpace& test, const AssemblyOptions& opt = {});

// (f, v) over a vector or scalar space.
Eigen::VectorXd assemble_rhs(const FeSpace& s, const CellVectorField& f,
                             const AssemblyOptions& opt = {});
Eigen::VectorXd assemble_rhs(const FeSpace& s, const CellScalarField& f,
                             const AssemblyOptions& opt = {});

// (f, rot chi) over a vector space.
Eigen::VectorXd assemble_rot_rhs(const FeSpace& s, const CellVectorField& f,
                                 const AssemblyOptions& opt = {});

enum class FbcForm { Volume, Surface };

// f_bc(P, .) over test space W_h. The volume form integrates grad P . rot chi;
// the surface form integrates (grad P x n) . chi over boundary facets with
// the gradient trace taken from the adjacent cell. The gradient uses
// mean-deflated coefficients, so a constant P gives an exactly zero vector.
Eigen::VectorXd assemble_fbc(const Field& P, const FeSpace& w_space, FbcForm form,
                             const AssemblyOptions& opt = {});

// Gradient of a scalar Field on a cell (deflated-coefficient evaluation).
Eigen::Vector3d scalar_field_gradient(const Field& f, const CellPoint& p, const CellGeometry& g);

// Gradient (Jacobian) of a vector Field on a cell; J(r,c) = d f_r / d x_c.
Eigen::Matrix3d vector_field_jacobian(const Field& f, const CellPoint& p, const CellGeometry& g);

}  // namespace vvflow
