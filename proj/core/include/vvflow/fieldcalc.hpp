// Discrete vector-calculus utilities: norms, the Helmholtz-Weyl
// decomposition at r = 2, vector potentials, and measured constants
// (Poincare, rot/div equivalence, inf-sup).
#pragma once

#include "vvflow/assembly.hpp"
#include "vvflow/stokes.hpp"

namespace vvflow {

struct FieldNorms {
  double l2 = 0;
  double h1_semi = 0;
  double rot = 0;  // 0 for scalar fields
  double div = 0;  // 0 for scalar fields
};

FieldNorms norms(const Field& f, const AssemblyOptions& opt = {});

// ||v||_* = (alpha ||v||^2 + nu ||grad v||^2)^{1/2}, the currency of the a
// priori bounds. Exactly alpha*l2^2 + nu*h1^2 by construction.
double star_norm(const Field& f, double alpha, double nu, const AssemblyOptions& opt = {});
double star_norm_from(const FieldNorms& n, double alpha, double nu);

// alpha_+ = max(alpha, C_P^{-2} nu).
double alpha_plus(double alpha, double nu, double c_poincare);

struct HelmholtzResult {
  Field q;    // scalar potential on S2, zero mean
  Field psi;  // broken vector P2: cellwise L2 projection of g - grad q
  double reconstruction_residual;  // ||g - psi - grad q||_{L2} by quadrature
  double orthogonality;            // max_i |(psi, grad phi_i)| / (||psi|| ||grad phi_i||)
};

// q solves the discrete Neumann problem (grad q, grad phi) = (g, grad phi)
// with a zero-mean border; psi is the cellwise L2 projection of the
// remainder, which is exact for Field inputs.
HelmholtzResult helmholtz_decompose(const CellVectorField& g, const Spaces& sp,
                                    const AssemblyOptions& opt = {});
HelmholtzResult helmholtz_decompose(const Field& g, const Spaces& sp,
                                    const AssemblyOptions& opt = {});

// Right inverse of rot: u on the zero-tangential-trace space with
// (rot u, rot v) + (div-multiplier coupling) = (w, rot v), div u = 0 weakly.
// Throws InvalidArgumentError when w is not weakly divergence-free.
Field vector_potential(const Field& w, const Spaces& sp, const AssemblyOptions& opt = {},
                       double div_tol = 1e-6);

// Smallest eigenvalue of A x = lambda B x (A SPD) by inverse power
// iteration with a sparse LU of A; relative eigenvalue tolerance eig_tol.
double smallest_generalized_eigenvalue(const SparseMatrix& A, const SparseMatrix& B,
                                       double eig_tol = 1e-8, int max_iter = 5000);

// Optimal Poincare constant of a space: 1/sqrt(lambda_min) of the
// (grad u, grad v) vs (u, v) eigenproblem.
double estimate_poincare(const FeSpace& space, const AssemblyOptions& opt = {},
                         double eig_tol = 1e-8);

struct EquivalenceConstants {
  double C0_est;   // sup ||v|| / sqrt(||rot v||^2 + ||div v||^2) over W_h
  double C1_est;   // sup ||grad v||^2 / (||rot v||^2 + ||div v||^2) over W_h
  double beta1_h;  // discrete inf-sup constant of (q, div v) on X_h x Q_h
};

EquivalenceConstants measure_equivalence_constants(const Spaces& sp,
                                                   const AssemblyOptions& opt = {});

// Probe-based estimate of the constant C* in the conditional well-posedness
// bound ||grad a|| <= C* nu^{3/4} alpha_+^{1/4}: the largest scaling of the
// probe direction that keeps the symmetrized nonstandard form positive.
double measure_c_star(const Spaces& sp, double alpha, double nu, const CellVectorField& a_probe,
                      double grad_a_probe_norm, double c_poincare,
                      const AssemblyOptions& opt = {});

}  // namespace vvflow
