#include "vvflow/fieldcalc.hpp"

#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "vvflow/quadrature.hpp"

namespace vvflow {

namespace {

using ColMajor = Eigen::SparseMatrix<double>;

Eigen::Vector3d cell_point_x(const Mesh& m, int c, const Eigen::Vector4d& lam) {
  const auto& v = m.cell(c);
  return lam[0] * m.vertex(v[0]) + lam[1] * m.vertex(v[1]) + lam[2] * m.vertex(v[2]) +
         lam[3] * m.vertex(v[3]);
}

double frobenius(const SparseMatrix& A) {
  double s = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) s += it.value() * it.value();
  return std::sqrt(s);
}

// Deterministic pseudo-random start vector for the eigen iterations.
Eigen::VectorXd start_vector(int n) {
  Eigen::VectorXd v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v[i] = static_cast<double>((state >> 11) & 0xffffffu) / double(0xffffffu) - 0.5;
  }
  return v;
}

}  // namespace

FieldNorms norms(const Field& f, const AssemblyOptions& opt) {
  const Mesh& m = f.space->mesh();
  const auto& rule = tet_rule(std::max(opt.quad_degree, 4));
  const bool vector = f.space->is_vector();
  double l2 = 0, h1 = 0, rot = 0, div = 0;
  for (int c = 0; c < m.n_cells(); ++c) {
    const CellGeometry g = cell_geometry(m, c);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                          rule.points[q][3]);
      const double wq = rule.weights[q] * g.volume;
      CellPoint p{c, lam, cell_point_x(m, c, lam)};
      if (vector) {
        const Eigen::Vector3d v = evaluate_vector_on_cell(f, c, lam);
        const Eigen::Matrix3d J = vector_field_jacobian(f, p, g);
        l2 += wq * v.squaredNorm();
        h1 += wq * J.squaredNorm();
        const Eigen::Vector3d r(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
        rot += wq * r.squaredNorm();
        div += wq * J.trace() * J.trace();
      } else {
        const double v = evaluate_scalar_on_cell(f, c, lam);
        const Eigen::Vector3d gr = scalar_field_gradient(f, p, g);
        l2 += wq * v * v;
        h1 += wq * gr.squaredNorm();
      }
    }
  }
  FieldNorms out;
  out.l2 = std::sqrt(l2);
  out.h1_semi = std::sqrt(h1);
  out.rot = std::sqrt(rot);
  out.div = std::sqrt(div);
  return out;
}

double star_norm_from(const FieldNorms& n, double alpha, double nu) {
  return std::sqrt(alpha * n.l2 * n.l2 + nu * n.h1_semi * n.h1_semi);
}

double star_norm(const Field& f, double alpha, double nu, const AssemblyOptions& opt) {
  return star_norm_from(norms(f, opt), alpha, nu);
}

double alpha_plus(double alpha, double nu, double c_poincare) {
  if (!(c_poincare > 0)) throw InvalidArgumentError("alpha_plus: C_P must be positive");
  return std::max(alpha, nu / (c_poincare * c_poincare));
}

// ---------------------------------------------------------------------------
// Helmholtz-Weyl decomposition (r = 2)

HelmholtzResult helmholtz_decompose(const CellVectorField& g, const Spaces& sp,
                                    const AssemblyOptions& opt) {
  const Mesh& m = *sp.mesh;
  const FeSpace& S2 = *sp.S2;
  const auto& rule = tet_rule(std::max(opt.quad_degree, 4));

  // Neumann solve with zero-mean border: (grad q, grad phi) = (g, grad phi).
  SparseMatrix K = assemble_gradgrad(S2, opt);
  BlockSystem sys(std::vector<int>{S2.n_dofs(), 1});
  sys.set_block(0, 0, K).set_border(0, 1, S2.mean_vector());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.size());
  {
    double d[10][4];
    for (int c = 0; c < m.n_cells(); ++c) {
      const CellGeometry geo = cell_geometry(m, c);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                            rule.points[q][3]);
        CellPoint p{c, lam, cell_point_x(m, c, lam)};
        const Eigen::Vector3d gv = g.value(p, geo);
        shape::p2_bary_derivs(lam, d);
        const double wq = rule.weights[q] * geo.volume;
        for (int i = 0; i < 10; ++i) {
          const int dof = S2.dof_index(S2.cell_node(c, i), 0);
          if (dof < 0) continue;
          Eigen::Vector3d gi = Eigen::Vector3d::Zero();
          for (int k = 0; k < 4; ++k) gi += d[i][k] * geo.grad_lambda[k];
          rhs[dof] += wq * gv.dot(gi);
        }
      }
    }
  }
  auto [qsol, qrep] = solve_direct(sys.matrix(), rhs);
  HelmholtzResult out;
  out.q = Field{sp.S2, qsol.head(S2.n_dofs())};

  // psi: cellwise L2 projection of g - grad q onto broken vector P2.
  auto broken = FeSpace::build(sp.mesh, Family::VectorP2Broken, Constraint::None);
  Field psi = zero_field(broken);
  {
    // The local mass matrix is volume * M_ref on affine tets.
    Eigen::Matrix<double, 10, 10> Mref = Eigen::Matrix<double, 10, 10>::Zero();
    double vals[10];
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                          rule.points[q][3]);
      shape::p2_values(lam, vals);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) Mref(i, j) += rule.weights[q] * vals[i] * vals[j];
    }
    Eigen::LDLT<Eigen::Matrix<double, 10, 10>> Mref_ldlt(Mref);
    for (int c = 0; c < m.n_cells(); ++c) {
      const CellGeometry geo = cell_geometry(m, c);
      Eigen::Matrix<double, 10, 3> local_rhs = Eigen::Matrix<double, 10, 3>::Zero();
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                            rule.points[q][3]);
        CellPoint p{c, lam, cell_point_x(m, c, lam)};
        const Eigen::Vector3d r = g.value(p, geo) - scalar_field_gradient(out.q, p, geo);
        shape::p2_values(lam, vals);
        for (int i = 0; i < 10; ++i) local_rhs.row(i) += rule.weights[q] * vals[i] * r.transpose();
      }
      const Eigen::Matrix<double, 10, 3> coeff = Mref_ldlt.solve(local_rhs);
      for (int i = 0; i < 10; ++i)
        for (int d2 = 0; d2 < 3; ++d2)
          psi.coeffs[broken->dof_index(broken->cell_node(c, i), d2)] = coeff(i, d2);
    }
  }
  out.psi = std::move(psi);

  // Reconstruction residual and gradient orthogonality, both by quadrature.
  {
    double resid2 = 0.0;
    Eigen::VectorXd ortho = Eigen::VectorXd::Zero(S2.n_dofs());
    double psi_l2sq = 0.0;
    double d[10][4];
    for (int c = 0; c < m.n_cells(); ++c) {
      const CellGeometry geo = cell_geometry(m, c);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                            rule.points[q][3]);
        CellPoint p{c, lam, cell_point_x(m, c, lam)};
        const double wq = rule.weights[q] * geo.volume;
        const Eigen::Vector3d pv = evaluate_vector_on_cell(out.psi, c, lam);
        const Eigen::Vector3d gv = g.value(p, geo);
        const Eigen::Vector3d gq = scalar_field_gradient(out.q, p, geo);
        resid2 += wq * (gv - pv - gq).squaredNorm();
        psi_l2sq += wq * pv.squaredNorm();
        shape::p2_bary_derivs(lam, d);
        for (int i = 0; i < 10; ++i) {
          const int dof = S2.dof_index(S2.cell_node(c, i), 0);
          if (dof < 0) continue;
          Eigen::Vector3d gi = Eigen::Vector3d::Zero();
          for (int k = 0; k < 4; ++k) gi += d[i][k] * geo.grad_lambda[k];
          ortho[dof] += wq * pv.dot(gi);
        }
      }
    }
    out.reconstruction_residual = std::sqrt(resid2);
    const double psi_l2 = std::sqrt(psi_l2sq);
    double worst = 0.0;
    for (int i = 0; i < S2.n_dofs(); ++i) {
      const double gnorm = std::sqrt(std::max(K.coeff(i, i), 1e-300));
      worst = std::max(worst, std::abs(ortho[i]) / (std::max(psi_l2, 1e-300) * gnorm));
    }
    out.orthogonality = worst;
  }
  return out;
}

HelmholtzResult helmholtz_decompose(const Field& g, const Spaces& sp,
                                    const AssemblyOptions& opt) {
  return helmholtz_decompose(CellVectorField::from_field(g), sp, opt);
}

// ---------------------------------------------------------------------------
// Vector potential (right inverse of rot)

Field vector_potential(const Field& w, const Spaces& sp, const AssemblyOptions& opt,
                       double div_tol) {
  const FeSpace& Xt = *sp.Xt;
  if (!w.space->is_vector()) throw InvalidArgumentError("vector_potential: w must be a vector field");

  // Reject non-solenoidal input: weak divergence against Q_h.
  {
    SparseMatrix B = assemble_div_pressure(*w.space, *sp.Q, opt);
    const double num = (B * w.coeffs).norm();
    const double den = frobenius(B) * w.coeffs.norm() + 1e-300;
    if (num / den > div_tol)
      throw InvalidArgumentError("vector_potential: w is not weakly divergence-free (measured " +
                                 std::to_string(num / den) + ")");
  }

  // (rot u, rot v) + (div u, div v) + (lambda, div v) = (w, rot v).
  // The div-div term is consistent (the target potential is solenoidal) and
  // makes the form coercive on the zero-tangential-trace space.
  SparseMatrix R = assemble_rotrot(Xt, opt);
  SparseMatrix D = assemble_divdiv(Xt, opt);
  auto P1 = FeSpace::build(sp.mesh, Family::ScalarP1, Constraint::None);
  SparseMatrix B = assemble_div_pressure(Xt, *P1, opt);
  SparseMatrix A = SparseMatrix(R + D);

  BlockSystem sys(std::vector<int>{Xt.n_dofs(), P1->n_dofs()});
  sys.set_block(0, 0, A)
      .set_block(0, 1, B, 1.0, /*transpose=*/true)
      .set_block(1, 0, B);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.size());
  rhs.head(Xt.n_dofs()) = assemble_rot_rhs(Xt, CellVectorField::from_field(w), opt);
  auto [sol, rep] = solve_direct(sys.matrix(), rhs);
  if (rep.rel_residual > 1e-8)
    throw SingularSystemError("vector_potential: solve residual " +
                              std::to_string(rep.rel_residual));
  return Field{sp.Xt, sol.head(Xt.n_dofs())};
}

// ---------------------------------------------------------------------------
// Eigenvalue-based constant measurements

double smallest_generalized_eigenvalue(const SparseMatrix& A, const SparseMatrix& B,
                                       double eig_tol, int max_iter) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw InvalidArgumentError("smallest_generalized_eigenvalue: shape mismatch");
  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
  ColMajor Ac(A);
  lu.compute(Ac);
  if (lu.info() != Eigen::Success)
    throw SingularSystemError("smallest_generalized_eigenvalue: A is singular");
  Eigen::VectorXd x = start_vector(static_cast<int>(A.rows()));
  double lambda_prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd bx = B * x;
    Eigen::VectorXd y = lu.solve(bx);
    const double bnorm = std::sqrt(y.dot(B * y));
    if (!(bnorm > 0)) throw SingularSystemError("smallest_generalized_eigenvalue: B-degenerate iterate");
    y /= bnorm;
    const double lambda = y.dot(A * y);  // Rayleigh quotient, B-normalized
    if (it > 0 && std::abs(lambda - lambda_prev) <= eig_tol * std::abs(lambda)) return lambda;
    lambda_prev = lambda;
    x = y;
  }
  return lambda_prev;
}

double estimate_poincare(const FeSpace& space, const AssemblyOptions& opt, double eig_tol) {
  SparseMatrix K = assemble_gradgrad(space, opt);
  SparseMatrix M = assemble_mass(space, opt);
  const double lam = smallest_generalized_eigenvalue(K, M, eig_tol);
  if (!(lam > 0)) throw SingularSystemError("estimate_poincare: nonpositive eigenvalue");
  return 1.0 / std::sqrt(lam);
}

EquivalenceConstants measure_equivalence_constants(const Spaces& sp, const AssemblyOptions& opt) {
  EquivalenceConstants out{};
  const FeSpace& W = *sp.W;
  SparseMatrix R = assemble_rotrot(W, opt);
  SparseMatrix D = assemble_divdiv(W, opt);
  SparseMatrix RD = SparseMatrix(R + D);
  SparseMatrix M = assemble_mass(W, opt);
  SparseMatrix K = assemble_gradgrad(W, opt);
  out.C0_est = 1.0 / std::sqrt(smallest_generalized_eigenvalue(RD, M));
  out.C1_est = 1.0 / smallest_generalized_eigenvalue(RD, K);

  // Discrete inf-sup of (q, div v): beta^2 is the second-smallest eigenvalue
  // of the pressure Schur complement B K^{-1} B^T against the Q mass matrix
  // (the smallest belongs to the constant mode).
  {
    const FeSpace& X = *sp.X;
    const FeSpace& Q = *sp.Q;
    SparseMatrix Kx = assemble_gradgrad(X, opt);
    SparseMatrix B = assemble_div_pressure(X, Q, opt);
    SparseMatrix Mq = assemble_mass(Q, opt);
    Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
    ColMajor Kc(Kx);
    lu.compute(Kc);
    if (lu.info() != Eigen::Success)
      throw SingularSystemError("measure_equivalence_constants: velocity stiffness singular");
    const int nq = Q.n_dofs();
    Eigen::MatrixXd S(nq, nq);
    for (int j = 0; j < nq; ++j) {
      Eigen::RowVectorXd rowj = B.row(j);
      Eigen::VectorXd col = lu.solve(rowj.transpose());
      S.col(j) = B * col;
    }
    S = 0.5 * (S + S.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::MatrixXd(Mq));
    if (es.info() != Eigen::Success)
      throw SingularSystemError("measure_equivalence_constants: Schur eigensolve failed");
    // Skip the constant-pressure zero mode.
    const auto& ev = es.eigenvalues();
    double beta2 = 0.0;
    for (int i = 0; i < ev.size(); ++i)
      if (ev[i] > 1e-10 * ev[ev.size() - 1]) {
        beta2 = ev[i];
        break;
      }
    out.beta1_h = std::sqrt(std::max(beta2, 0.0));
  }
  return out;
}

double measure_c_star(const Spaces& sp, double alpha, double nu, const CellVectorField& a_probe,
                      double grad_a_probe_norm, double c_poincare, const AssemblyOptions& opt) {
  const FeSpace& W = *sp.W;
  const double ap = alpha_plus(alpha, nu, c_poincare);
  SparseMatrix M = assemble_mass(W, opt);
  SparseMatrix R = assemble_rotrot(W, opt);
  SparseMatrix A0 = SparseMatrix(ap * M + nu * R);

  // Cross block for the probe direction, symmetrized.
  SparseMatrix C = assemble_a_cross_rot(a_probe, W, W, opt);
  SparseMatrix Csym = SparseMatrix(0.5 * (C + SparseMatrix(C.transpose())));

  // lambda_min(A0 + t Csym vs A0) = 1 + t lambda_min(Csym vs A0); the form
  // stays positive up to t* = -1 / lambda_min when that eigenvalue is
  // negative, so C* ~= t* ||grad a_probe|| / (nu^{3/4} alpha_+^{1/4}).
  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
  ColMajor A0c(A0);
  lu.compute(A0c);
  if (lu.info() != Eigen::Success) throw SingularSystemError("measure_c_star: A0 singular");
  const int n = static_cast<int>(A0.rows());
  auto extreme = [&](double shift) {
    // Power iteration on A0^{-1} Csym - shift I (A0-self-adjoint).
    Eigen::VectorXd x = start_vector(n);
    x /= std::sqrt(x.dot(A0 * x));
    double mu = 0.0;
    for (int it = 0; it < 400; ++it) {
      Eigen::VectorXd y = lu.solve(Csym * x) - shift * x;
      const double nrm = std::sqrt(std::max(y.dot(A0 * y), 1e-300));
      y /= nrm;
      const double mu_new = y.dot(Csym * y) / y.dot(A0 * y);
      if (it > 3 && std::abs(mu_new - mu) < 1e-6 * std::max(1.0, std::abs(mu_new))) {
        mu = mu_new;
        break;
      }
      mu = mu_new;
      x = y;
    }
    return mu;
  };
  const double mu1 = extreme(0.0);
  const double mu2 = extreme(mu1);  // opposite end of the spectrum
  const double mu_min = std::min(mu1, mu2);
  if (mu_min >= 0) return std::numeric_limits<double>::infinity();
  const double t_star = -1.0 / mu_min;
  return t_star * grad_a_probe_norm / (std::pow(nu, 0.75) * std::pow(ap, 0.25));
}

}  // namespace vvflow
