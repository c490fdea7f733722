#include "vvflow/stokes.hpp"

#include <Eigen/SparseLU>

#include "vvflow/quadrature.hpp"

namespace vvflow {

std::shared_ptr<const Spaces> Spaces::build(std::shared_ptr<const Mesh> m) {
  auto sp = std::make_shared<Spaces>();
  sp->mesh = m;
  sp->X = build_velocity_space(m);
  sp->Q = build_pressure_space(m);
  sp->W = build_vorticity_space(m);
  sp->L = build_multiplier_space(m);
  sp->S1 = FeSpace::build(m, Family::ScalarP1, Constraint::ZeroMeanMultiplier);
  sp->S2 = FeSpace::build(m, Family::ScalarP2, Constraint::ZeroMeanMultiplier);
  sp->Xt = FeSpace::build(m, Family::VectorP2, Constraint::ZeroTangentialTrace);
  return sp;
}

namespace {

using ColMajor = Eigen::SparseMatrix<double>;

struct LuSolver {
  ColMajor A;
  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;

  explicit LuSolver(const SparseMatrix& M) : A(M) {
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw SingularSystemError("sparse LU factorization failed: " + lu.lastErrorMessage());
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b, const char* who,
                        double tol = TSolver::kResidualTol) const {
    Eigen::VectorXd x = lu.solve(b);
    const double bn = b.norm();
    const double res = bn > 0 ? (A * x - b).norm() / bn : (A * x).norm();
    if (!(res <= tol))
      throw SingularSystemError(std::string(who) + ": direct solve residual " +
                                std::to_string(res) + " exceeds tolerance");
    return x;
  }
};

double frobenius(const SparseMatrix& A) {
  double s = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) s += it.value() * it.value();
  return std::sqrt(s);
}

Eigen::Vector3d cell_point_x(const Mesh& m, int c, const Eigen::Vector4d& lam) {
  const auto& v = m.cell(c);
  return lam[0] * m.vertex(v[0]) + lam[1] * m.vertex(v[1]) + lam[2] * m.vertex(v[2]) +
         lam[3] * m.vertex(v[3]);
}

}  // namespace

struct TSolver::Factors {
  std::unique_ptr<BlockSystem> vel_sys;
  std::unique_ptr<LuSolver> vel_lu;
  std::unique_ptr<BlockSystem> vor_sys;
  std::unique_ptr<LuSolver> vor_lu;
};

TSolver::TSolver(std::shared_ptr<const Spaces> spaces, AssemblyOptions opt)
    : spaces_(std::move(spaces)), opt_(opt) {
  const Spaces& sp = *spaces_;
  Mu_ = assemble_mass(*sp.X, opt_);
  Ku_ = assemble_gradgrad(*sp.X, opt_);
  Bu_ = assemble_div_pressure(*sp.X, *sp.Q, opt_);
  Mw_ = assemble_mass(*sp.W, opt_);
  Rw_ = assemble_rotrot(*sp.W, opt_);
  Dw_ = assemble_divdiv(*sp.W, opt_);
  Bw_ = assemble_div_pressure(*sp.W, *sp.L, opt_);
}

std::shared_ptr<const TSolver::Factors> TSolver::factors_for(double nu, double alpha) const {
  if (!(nu > 0)) throw InvalidArgumentError("TSolver: nu must be positive");
  if (alpha < 0) throw InvalidArgumentError("TSolver: alpha must be nonnegative");
  const auto key = std::make_pair(nu, alpha);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const Spaces& sp = *spaces_;
  auto f = std::make_shared<Factors>();

  // [A -B^T 0; -B 0 m; 0 m^T 0] with the zero-mean border on the pressure.
  SparseMatrix Au = SparseMatrix(alpha * Mu_ + nu * Ku_);
  f->vel_sys = std::make_unique<BlockSystem>(std::vector<int>{sp.X->n_dofs(), sp.Q->n_dofs(), 1});
  f->vel_sys->set_block(0, 0, Au)
      .set_block(0, 1, Bu_, -1.0, /*transpose=*/true)
      .set_block(1, 0, Bu_, -1.0)
      .set_border(1, 2, sp.Q->mean_vector());
  f->vel_lu = std::make_unique<LuSolver>(f->vel_sys->matrix());

  SparseMatrix Aw = SparseMatrix(alpha * Mw_ + nu * (Rw_ + Dw_));
  f->vor_sys = std::make_unique<BlockSystem>(std::vector<int>{sp.W->n_dofs(), sp.L->n_dofs(), 1});
  f->vor_sys->set_block(0, 0, Aw)
      .set_block(0, 1, Bw_, -1.0, /*transpose=*/true)
      .set_block(1, 0, Bw_, -1.0)
      .set_border(1, 2, sp.L->mean_vector());
  f->vor_lu = std::make_unique<LuSolver>(f->vor_sys->matrix());

  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(f));
  (void)inserted;
  return it->second;
}

State TSolver::solve(const TInput& in) const {
  const Spaces& sp = *spaces_;
  if (in.l.size() != sp.W->n_dofs()) throw InvalidArgumentError("TSolver: l has wrong size");
  auto f = factors_for(in.nu, in.alpha);

  const int nX = sp.X->n_dofs(), nQ = sp.Q->n_dofs();
  const int nW = sp.W->n_dofs(), nL = sp.L->n_dofs();

  Eigen::VectorXd rhs_vel = Eigen::VectorXd::Zero(nX + nQ + 1);
  rhs_vel.head(nX) = assemble_rhs(*sp.X, in.g, opt_);
  Eigen::VectorXd sol_vel = f->vel_lu->solve(rhs_vel, "T velocity solve");

  State st;
  st.u = Field{sp.X, sol_vel.head(nX)};
  st.P = Field{sp.Q, sol_vel.segment(nX, nQ)};

  // The second solve consumes f_bc(P, .), hence the sequencing.
  Eigen::VectorXd rhs_vor = Eigen::VectorXd::Zero(nW + nL + 1);
  rhs_vor.head(nW) = in.l - assemble_fbc(st.P, *sp.W, FbcForm::Volume, opt_);
  Eigen::VectorXd sol_vor = f->vor_lu->solve(rhs_vor, "T vorticity solve");

  st.w = Field{sp.W, sol_vor.head(nW)};
  st.eta = Field{sp.L, sol_vor.segment(nW, nL)};
  return st;
}

// ---------------------------------------------------------------------------
// Nonstandard Stokes

NonstdParams NonstdParams::with_field(Field a, double alpha, double nu) {
  NonstdParams p;
  p.a = CellVectorField::from_field(a);
  p.a_field = std::move(a);
  p.alpha = alpha;
  p.nu = nu;
  return p;
}

NonstdParams NonstdParams::with_analytic(CellVectorField a, double alpha, double nu) {
  NonstdParams p;
  p.a = std::move(a);
  p.alpha = alpha;
  p.nu = nu;
  return p;
}

NonstdParams NonstdParams::none(double alpha, double nu) {
  NonstdParams p;
  p.a = CellVectorField::zero();
  p.alpha = alpha;
  p.nu = nu;
  return p;
}

struct NonstdStokesSolver::Lu : LuSolver {
  using LuSolver::LuSolver;
};

NonstdStokesSolver::NonstdStokesSolver(std::shared_ptr<const Spaces> spaces, NonstdParams params,
                                       AssemblyOptions opt, NonstdOptions nopt)
    : spaces_(std::move(spaces)), params_(std::move(params)), opt_(opt) {
  if (!(params_.nu > 0)) throw InvalidArgumentError("NonstdStokesSolver: nu must be positive");
  if (params_.alpha < 0) throw InvalidArgumentError("NonstdStokesSolver: alpha must be >= 0");
  const Spaces& sp = *spaces_;

  divdiv_ = nopt.divdiv == NonstdOptions::DivDiv::On ||
            (nopt.divdiv == NonstdOptions::DivDiv::Auto && params_.alpha == 0.0);

  // Weak-divergence precondition on a Field coefficient.
  if (params_.a_field) {
    if (params_.a_field->space != sp.X && params_.a_field->space != sp.W)
      throw InvalidArgumentError("NonstdStokesSolver: a must live on X_h or W_h");
    SparseMatrix B = assemble_div_pressure(*params_.a_field->space, *sp.Q, opt_);
    const double num = (B * params_.a_field->coeffs).norm();
    const double den = frobenius(B) * params_.a_field->coeffs.norm() + 1e-300;
    if (num / den > params_.div_check_tol)
      throw InvalidArgumentError("NonstdStokesSolver: a is not weakly divergence-free (measured " +
                                 std::to_string(num / den) + ")");
  }

  Mw_ = assemble_mass(*sp.W, opt_);
  Rw_ = assemble_rotrot(*sp.W, opt_);
  G_ = assemble_grad_coupling(*sp.W, *sp.S1, opt_);
  Bw_ = assemble_div_pressure(*sp.W, *sp.L, opt_);
  Ca_ = assemble_cross_rot();

  // ||grad a|| for the (2.17) diagnostic.
  grad_a_norm_ = 0.0;
  if (!params_.a.is_zero() && params_.a.has_jacobian()) {
    const Mesh& m = *sp.mesh;
    const auto& rule = tet_rule(opt_.quad_degree);
    double acc = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
      const CellGeometry g = cell_geometry(m, c);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                            rule.points[q][3]);
        CellPoint p{c, lam, cell_point_x(m, c, lam)};
        acc += rule.weights[q] * g.volume * params_.a.jacobian(p, g).squaredNorm();
      }
    }
    grad_a_norm_ = std::sqrt(acc);
  }

  SparseMatrix A = SparseMatrix(params_.alpha * Mw_ + params_.nu * Rw_);
  if (divdiv_) A = SparseMatrix(A + params_.nu * assemble_divdiv(*sp.W, opt_));
  if (Ca_.nonZeros() > 0) A = SparseMatrix(A + Ca_);

  sys_ = std::make_unique<BlockSystem>(std::vector<int>{sp.W->n_dofs(), sp.S1->n_dofs(), 1});
  sys_->set_block(0, 0, A)
      .set_block(0, 1, G_)
      .set_block(1, 0, G_, 1.0, /*transpose=*/true)
      .set_border(1, 2, sp.S1->mean_vector());
  lu_ = std::make_shared<Lu>(sys_->matrix());

  K2_ = assemble_gradgrad(*sp.S2, opt_);
  psys_ = std::make_unique<BlockSystem>(std::vector<int>{sp.S2->n_dofs(), 1});
  psys_->set_block(0, 0, K2_).set_border(0, 1, sp.S2->mean_vector());
  plu_ = std::make_shared<Lu>(psys_->matrix());
}

SparseMatrix NonstdStokesSolver::assemble_cross_rot() const {
  return assemble_a_cross_rot(params_.a, *spaces_->W, *spaces_->W, opt_);
}

Eigen::VectorXd NonstdStokesSolver::solve_velocity(const Eigen::VectorXd& rhs_w) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys_->size());
  rhs.head(rhs_w.size()) = rhs_w;
  return lu_->solve(rhs, "nonstandard Stokes solve", 1e-9);
}

std::pair<Field, Field> NonstdStokesSolver::solve(const CellVectorField& g) const {
  const Spaces& sp = *spaces_;
  Eigen::VectorXd sol = solve_velocity(assemble_rhs(*sp.W, g, opt_));
  Field u{sp.W, sol.head(sp.W->n_dofs())};

  // Pressure recovery: (grad p, grad q) = (g - a x rot u - alpha u, grad q).
  const Mesh& m = *sp.mesh;
  const FeSpace& S2 = *sp.S2;
  const auto& rule = tet_rule(opt_.quad_degree);
  Eigen::VectorXd prhs = Eigen::VectorXd::Zero(psys_->size());
  double d[10][4];
  for (int c = 0; c < m.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(m, c);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                          rule.points[q][3]);
      CellPoint p{c, lam, cell_point_x(m, c, lam)};
      const Eigen::Vector3d uv = evaluate_vector_on_cell(u, c, lam);
      const Eigen::Matrix3d Ju = vector_field_jacobian(u, p, geo);
      const Eigen::Vector3d rot_u(Ju(2, 1) - Ju(1, 2), Ju(0, 2) - Ju(2, 0), Ju(1, 0) - Ju(0, 1));
      Eigen::Vector3d Fv = g.value(p, geo) - params_.alpha * uv;
      if (!params_.a.is_zero()) Fv -= params_.a.value(p, geo).cross(rot_u);
      shape::p2_bary_derivs(lam, d);
      const double wq = rule.weights[q] * geo.volume;
      for (int i = 0; i < 10; ++i) {
        const int dof = S2.dof_index(S2.cell_node(c, i), 0);
        if (dof < 0) continue;
        Eigen::Vector3d gi = Eigen::Vector3d::Zero();
        for (int k = 0; k < 4; ++k) gi += d[i][k] * geo.grad_lambda[k];
        prhs[dof] += wq * Fv.dot(gi);
      }
    }
  }
  Eigen::VectorXd psol = plu_->solve(prhs, "nonstandard pressure recovery", 1e-9);
  return {std::move(u), Field{sp.S2, psol.head(sp.S2->n_dofs())}};
}

Field NonstdStokesSolver::apply_delta_inv(const Field& w) const {
  return apply_delta_inv(w, params_.div_check_tol);
}

Field NonstdStokesSolver::apply_delta_inv(const Field& w, double div_tol) const {
  const Spaces& sp = *spaces_;
  if (w.space != sp.W) throw InvalidArgumentError("apply_delta_inv: w must live on W_h");
  const double num = (Bw_ * w.coeffs).norm();
  const double den = frobenius(Bw_) * w.coeffs.norm() + 1e-300;
  if (num / den > div_tol)
    throw InvalidArgumentError("apply_delta_inv: w is not weakly divergence-free (measured " +
                               std::to_string(num / den) + ")");
  Eigen::VectorXd sol = solve_velocity(Mw_ * w.coeffs);
  return Field{sp.W, sol.head(sp.W->n_dofs())};
}

double NonstdStokesSolver::smallness_ratio(double c_star, double c_poincare) const {
  const double ap = std::max(params_.alpha, params_.nu / (c_poincare * c_poincare));
  return grad_a_norm_ / (c_star * std::pow(params_.nu, 0.75) * std::pow(ap, 0.25));
}

}  // namespace vvflow
