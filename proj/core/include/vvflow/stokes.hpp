// The linear solution operator T of the coupled Stokes/vorticity system and
// the nonstandard Stokes operator (velocity solution operator with the
// a x rot u convection-like term and boundary conditions
// n.rot rot u = n.rot u = u.n = 0).
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "vvflow/assembly.hpp"
#include "vvflow/fespace.hpp"
#include "vvflow/linalg.hpp"

namespace vvflow {

// The Taylor-Hood space bundle of a mesh: X velocity, Q pressure, W
// vorticity, L divergence multiplier, plus the scalar H1 spaces used by the
// nonstandard solver and potential recovery.
struct Spaces {
  std::shared_ptr<const Mesh> mesh;
  FeSpacePtr X;   // vector P2, zero trace
  FeSpacePtr Q;   // scalar P1, zero mean
  FeSpacePtr W;   // vector P2, zero normal trace
  FeSpacePtr L;   // scalar P1, zero mean
  FeSpacePtr S1;  // scalar P1, zero mean (gradient-constraint multiplier)
  FeSpacePtr S2;  // scalar P2, zero mean (pressure recovery, Helmholtz)
  FeSpacePtr Xt;  // vector P2, zero tangential trace (vector potential)

  static std::shared_ptr<const Spaces> build(std::shared_ptr<const Mesh> m);
};

struct TInput {
  CellVectorField g;   // L2 data of the velocity equation
  Eigen::VectorXd l;   // functional over W_h (vector of duals)
  double nu = 1.0;     // > 0
  double alpha = 0.0;  // >= 0
};

// Realizes T as two sequential saddle solves: the (u,P) no-slip Stokes
// system, then the (w,eta) vorticity system whose right side carries
// l - f_bc(P, .). Factorizations are cached per (nu, alpha); solves are
// reentrant, the cache is guarded.
class TSolver {
 public:
  TSolver(std::shared_ptr<const Spaces> spaces, AssemblyOptions opt = {});

  State solve(const TInput& in) const;

  const Spaces& spaces() const { return *spaces_; }
  const std::shared_ptr<const Spaces>& spaces_ptr() const { return spaces_; }
  const AssemblyOptions& options() const { return opt_; }

  // Assembled constant blocks (unscaled).
  const SparseMatrix& mass_u() const { return Mu_; }
  const SparseMatrix& gradgrad_u() const { return Ku_; }
  const SparseMatrix& div_u() const { return Bu_; }  // rows Q, cols X
  const SparseMatrix& mass_w() const { return Mw_; }
  const SparseMatrix& rotrot_w() const { return Rw_; }
  const SparseMatrix& divdiv_w() const { return Dw_; }
  const SparseMatrix& div_w() const { return Bw_; }  // rows L, cols W

  // Relative residual tolerance required of the inner direct solves.
  static constexpr double kResidualTol = 1e-10;

 private:
  struct Factors;
  std::shared_ptr<const Factors> factors_for(double nu, double alpha) const;

  std::shared_ptr<const Spaces> spaces_;
  AssemblyOptions opt_;
  SparseMatrix Mu_, Ku_, Bu_, Mw_, Rw_, Dw_, Bw_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const Factors>> cache_;
};

struct NonstdParams {
  CellVectorField a;             // coefficient of the a x rot u term
  std::optional<Field> a_field;  // set when a came from a discrete Field
  double alpha = 0.0;
  double nu = 1.0;
  // Relative tolerance of the weak-divergence check applied to a_field.
  double div_check_tol = 1e-8;

  // a given as a Field on X_h: the constructor of the solver verifies that
  // (div a, pi) vanishes over the Q_h basis to div_check_tol.
  static NonstdParams with_field(Field a, double alpha, double nu);
  // Analytic coefficient: the caller guarantees div a = 0.
  static NonstdParams with_analytic(CellVectorField a, double alpha, double nu);
  static NonstdParams none(double alpha, double nu);  // a = 0
};

struct NonstdOptions {
  // Adds the consistent nu (div u, div psi) augmentation. Auto turns it on
  // only for alpha = 0, where the plain rot-rot form admits discrete
  // gradient modes and the monolithic matrix can be singular.
  enum class DivDiv { Auto, On, Off };
  DivDiv divdiv = DivDiv::Auto;
};

class NonstdStokesSolver {
 public:
  NonstdStokesSolver(std::shared_ptr<const Spaces> spaces, NonstdParams params,
                     AssemblyOptions opt = {}, NonstdOptions nopt = {});

  // Velocity u on W_h with the gradient-orthogonality constraint enforced by
  // a scalar P1 multiplier; pressure p on S2 from the Poisson recovery
  // (grad p, grad q) = (g - a x rot u - alpha u, grad q).
  std::pair<Field, Field> solve(const CellVectorField& g) const;

  // hat-Delta^{-1}_a applied to a weakly divergence-free Field on W_h.
  // The override form loosens the divergence tolerance (interpolants of
  // analytic solenoidal fields are only O(h^2) weakly divergence-free).
  Field apply_delta_inv(const Field& w) const;
  Field apply_delta_inv(const Field& w, double div_tol) const;

  // ||grad a|| / (C* nu^{3/4} alpha_+^{1/4}); > 1 violates the conditional
  // well-posedness condition. Advisory, never enforced.
  double smallness_ratio(double c_star, double c_poincare) const;

  double grad_a_norm() const { return grad_a_norm_; }
  const SparseMatrix& cross_block() const { return Ca_; }
  bool divdiv_enabled() const { return divdiv_; }
  const NonstdParams& params() const { return params_; }

 private:
  SparseMatrix assemble_cross_rot() const;
  Eigen::VectorXd solve_velocity(const Eigen::VectorXd& rhs_w) const;

  std::shared_ptr<const Spaces> spaces_;
  NonstdParams params_;
  AssemblyOptions opt_;
  bool divdiv_ = false;
  double grad_a_norm_ = 0.0;
  SparseMatrix Mw_, Rw_, G_, Ca_, Bw_;
  std::unique_ptr<BlockSystem> sys_;
  struct Lu;
  std::shared_ptr<Lu> lu_;
  SparseMatrix K2_;  // pressure-recovery stiffness
  std::unique_ptr<BlockSystem> psys_;
  std::shared_ptr<Lu> plu_;
};

}  // namespace vvflow
