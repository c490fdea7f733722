#include "vvflow/picard.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "vvflow/fieldcalc.hpp"
#include "vvflow/quadrature.hpp"

namespace vvflow {

void PicardConfig::validate() const {
  if (!(tol > 0)) throw InvalidArgumentError("PicardConfig: tol must be positive");
  if (!(theta > 0 && theta <= 1)) throw InvalidArgumentError("PicardConfig: theta must be in (0,1]");
  if (max_iter < 1) throw InvalidArgumentError("PicardConfig: max_iter must be >= 1");
  if (lambda_schedule.empty() || lambda_schedule.back() != 1.0)
    throw InvalidArgumentError("PicardConfig: lambda schedule must end at 1");
  double prev = 0.0;
  for (double l : lambda_schedule) {
    if (l < prev || l < 0.0 || l > 1.0)
      throw InvalidArgumentError("PicardConfig: lambda schedule must be nondecreasing in [0,1]");
    prev = l;
  }
  if (quad_degree != 4 && quad_degree != 6)
    throw InvalidArgumentError("PicardConfig: quad_degree must be 4 or 6");
}

std::vector<double> PicardConfig::uniform_schedule(int steps) {
  if (steps < 1) throw InvalidArgumentError("uniform_schedule: steps must be >= 1");
  std::vector<double> s(steps);
  for (int i = 0; i < steps; ++i) s[i] = static_cast<double>(i + 1) / steps;
  return s;
}

void PicardTrace::write_csv(std::ostream& os) const {
  os << "iteration,lambda,increment,ratio,residual_u,residual_w\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration, r.lambda,
                  r.increment, r.ratio, r.res_u, r.res_w);
    os << buf;
  }
}

SmallnessReport check_smallness(double f_norm, double nu, double alpha,
                                const SmallnessConstants& c) {
  if (!(nu > 0)) throw InvalidArgumentError("check_smallness: nu must be positive");
  if (alpha < 0) throw InvalidArgumentError("check_smallness: alpha must be >= 0");
  SmallnessReport r;
  r.nu = nu;
  r.alpha = alpha;
  r.C_P = c.C_P;
  r.f_norm = f_norm;
  r.alpha_plus = alpha_plus(alpha, nu, c.C_P);
  const double ap = r.alpha_plus;

  r.forcing_lhs = f_norm;
  r.forcing_rhs = c.C_star / std::sqrt(2.0) * std::pow(nu, 1.25) * std::pow(ap, 0.75);
  r.forcing_ok = r.forcing_lhs <= r.forcing_rhs;

  r.alpha1 = 1.0 - 2.0 * std::sqrt(2.0) * c.M * std::pow(nu, -1.25) * std::pow(ap, -0.75) * f_norm;
  r.alpha1_positive = r.alpha1 > 0;

  // H^{-1} surrogate ||f||_{H^-1} <= C_P ||f||.
  r.K1 = c.C_omega / nu * c.C_P * f_norm;
  if (r.alpha1_positive) {
    r.uniqueness_product =
        2.0 * std::sqrt(2.0) * c.M * c.M / (nu * nu) / ap / r.alpha1 * f_norm * r.K1;
    r.uniqueness_ok = r.uniqueness_product < 1.0;
  } else {
    r.uniqueness_product = std::numeric_limits<double>::infinity();
    r.uniqueness_ok = false;
  }

  // Surrogates of the a priori chain; only negative powers of alpha_+
  // appear, so they stay bounded as alpha grows.
  const double co = c.C_omega;
  const double c0 = co / std::sqrt(nu * ap) * r.K1 * f_norm;
  const double c1 = co * f_norm + c0;
  const double c2 = co * f_norm + co / nu * r.K1 * c1;
  r.K2 = co * f_norm + co / nu * r.K1 * c2;
  r.K3 = co / std::sqrt(nu) * (f_norm + r.K2 + r.K1 * r.K2 / nu);
  return r;
}

void SmallnessReport::write_text(std::ostream& os) const {
  char buf[192];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    os << buf << "\n";
  };
  os << "smallness report\n";
  line("  nu          = %.17g", nu);
  line("  alpha       = %.17g", alpha);
  line("  alpha_plus  = %.17g", alpha_plus);
  line("  C_P         = %.17g", C_P);
  line("  ||f||       = %.17g", f_norm);
  line("  forcing: ||f|| <= (C*/sqrt2) nu^{5/4} alpha_+^{3/4}: %.17g <= %.17g  [%s]", forcing_lhs,
       forcing_rhs, forcing_ok ? "ok" : "FAIL");
  line("  alpha_1 = %.17g  [%s]", alpha1, alpha1_positive ? "ok" : "FAIL");
  line("  uniqueness product = %.17g  [%s]", uniqueness_product, uniqueness_ok ? "ok" : "FAIL");
  line("  K1 = %.17g  K2 = %.17g  K3 = %.17g", K1, K2, K3);
}

namespace {

AssemblyOptions trilinear_options(const PicardConfig& cfg, const AssemblyOptions& opt) {
  cfg.validate();
  AssemblyOptions t = opt;
  t.quad_degree = cfg.quad_degree;
  return t;
}

}  // namespace

VVSolver::VVSolver(std::shared_ptr<const Spaces> spaces, double nu, double alpha, PicardConfig cfg,
                   AssemblyOptions opt)
    : spaces_(std::move(spaces)),
      nu_(nu),
      alpha_(alpha),
      cfg_(std::move(cfg)),
      opt_(opt),
      tri_opt_(trilinear_options(cfg_, opt)),
      T_(spaces_, tri_opt_) {
  if (!(nu_ > 0)) throw InvalidArgumentError("VVSolver: nu must be positive");
  if (alpha_ < 0) throw InvalidArgumentError("VVSolver: alpha must be >= 0");
}

TInput VVSolver::apply_n(const State& s, const CellVectorField& f, double lambda) const {
  const Spaces& sp = *spaces_;
  TInput in;
  in.nu = nu_;
  in.alpha = alpha_;

  // g = lambda (f - w x u).
  if (lambda == 0.0 || (f.is_zero() && s.u.is_zero())) {
    in.g = CellVectorField::zero();
  } else {
    Field u = s.u, w = s.w;
    CellVectorField fc = f;
    const bool with_cross = !u.is_zero() && !w.is_zero();
    in.g = CellVectorField::compose(
        [fc, u, w, lambda, with_cross](const CellPoint& p, const CellGeometry& geo) {
          Eigen::Vector3d v = fc.value(p, geo);
          if (with_cross) {
            const Eigen::Vector3d uv = evaluate_vector_on_cell(u, p.cell, p.lam);
            const Eigen::Vector3d wv = evaluate_vector_on_cell(w, p.cell, p.lam);
            v -= wv.cross(uv);
          }
          return (lambda * v).eval();
        });
  }

  // l(chi) = lambda [ (f, rot chi) + b(w,u,chi) - b(u,w,chi) ].
  Eigen::VectorXd l = Eigen::VectorXd::Zero(sp.W->n_dofs());
  if (lambda != 0.0) {
    l = assemble_rot_rhs(*sp.W, f, tri_opt_);
    if (!(s.u.is_zero() && s.w.is_zero())) l += convection_dual(s);
    l *= lambda;
  }
  in.l = std::move(l);
  return in;
}

Eigen::VectorXd VVSolver::convection_dual(const State& s) const {
  // Duals of b(w,u,chi) - b(u,w,chi) = (w . grad u - u . grad w, chi).
  // The explicitly skew variant adds 1/2 (div a)(v . chi) per term, which is
  // the exact correction when a . n = 0 on the boundary (it does here).
  const Spaces& sp = *spaces_;
  Field u = s.u, w = s.w;
  const bool skew = cfg_.skew_symmetrize;
  CellVectorField conv =
      CellVectorField::compose([u, w, skew](const CellPoint& p, const CellGeometry& geo) {
        const Eigen::Vector3d uv = evaluate_vector_on_cell(u, p.cell, p.lam);
        const Eigen::Vector3d wv = evaluate_vector_on_cell(w, p.cell, p.lam);
        const Eigen::Matrix3d Ju = vector_field_jacobian(u, p, geo);
        const Eigen::Matrix3d Jw = vector_field_jacobian(w, p, geo);
        Eigen::Vector3d v = Ju * wv - Jw * uv;  // (w . grad) u - (u . grad) w
        if (skew) v += 0.5 * Jw.trace() * uv - 0.5 * Ju.trace() * wv;
        return v.eval();
      });
  return assemble_rhs(*sp.W, conv, tri_opt_);
}

State VVSolver::step(const State& s, const CellVectorField& f, double lambda,
                     double theta) const {
  State t = T_.solve(apply_n(s, f, lambda));
  if (theta == 1.0) return t;
  State out = t;
  out.u.coeffs = (1.0 - theta) * s.u.coeffs + theta * t.u.coeffs;
  out.P.coeffs = (1.0 - theta) * s.P.coeffs + theta * t.P.coeffs;
  out.w.coeffs = (1.0 - theta) * s.w.coeffs + theta * t.w.coeffs;
  out.eta.coeffs = (1.0 - theta) * s.eta.coeffs + theta * t.eta.coeffs;
  return out;
}

double VVSolver::increment_norm(const State& a, const State& b) const {
  const Eigen::VectorXd du = a.u.coeffs - b.u.coeffs;
  const Eigen::VectorXd dw = a.w.coeffs - b.w.coeffs;
  const double star2 = alpha_ * du.dot(T_.mass_u() * du) + nu_ * du.dot(T_.gradgrad_u() * du);
  const double wl2 = std::sqrt(std::max(0.0, dw.dot(T_.mass_w() * dw)));
  return std::sqrt(std::max(0.0, star2)) + wl2;
}

double VVSolver::state_norm(const State& s) const {
  const double star2 = alpha_ * s.u.coeffs.dot(T_.mass_u() * s.u.coeffs) +
                       nu_ * s.u.coeffs.dot(T_.gradgrad_u() * s.u.coeffs);
  const double wl2 = std::sqrt(std::max(0.0, s.w.coeffs.dot(T_.mass_w() * s.w.coeffs)));
  return std::sqrt(std::max(0.0, star2)) + wl2;
}

std::pair<double, double> VVSolver::residuals(const State& s, const CellVectorField& f,
                                              double lambda) const {
  const Spaces& sp = *spaces_;
  const TInput in = apply_n(s, f, lambda);

  Eigen::VectorXd rhs_u = assemble_rhs(*sp.X, in.g, tri_opt_);
  Eigen::VectorXd op_u = alpha_ * (T_.mass_u() * s.u.coeffs) +
                         nu_ * (T_.gradgrad_u() * s.u.coeffs) -
                         T_.div_u().transpose() * s.P.coeffs;
  const double den_u = std::max({rhs_u.norm(), op_u.norm(), 1e-300});
  const double res_u = (rhs_u - op_u).norm() / den_u;

  Eigen::VectorXd rhs_w = in.l - assemble_fbc(s.P, *sp.W, FbcForm::Volume, opt_);
  Eigen::VectorXd op_w = alpha_ * (T_.mass_w() * s.w.coeffs) +
                         nu_ * ((T_.rotrot_w() + T_.divdiv_w()) * s.w.coeffs) -
                         T_.div_w().transpose() * s.eta.coeffs;
  const double den_w = std::max({rhs_w.norm(), op_w.norm(), 1e-300});
  const double res_w = (rhs_w - op_w).norm() / den_w;
  return {res_u, res_w};
}

VVSolver::EnergyIdentity VVSolver::energy_identity(const State& s, const CellVectorField& f,
                                                   double lambda, double c_poincare) const {
  EnergyIdentity e{};
  const Spaces& sp = *spaces_;
  const double l2sq = s.u.coeffs.dot(T_.mass_u() * s.u.coeffs);
  const double h1sq = s.u.coeffs.dot(T_.gradgrad_u() * s.u.coeffs);
  e.kinetic = alpha_ * l2sq + nu_ * h1sq;
  Eigen::VectorXd fdual = assemble_rhs(*sp.X, f, tri_opt_);
  e.work = lambda * fdual.dot(s.u.coeffs);
  e.defect = std::abs(e.kinetic - e.work);
  e.star_norm_u = std::sqrt(std::max(0.0, e.kinetic));

  double f2 = 0.0;  // ||f||^2 by quadrature
  {
    const Mesh& m = *sp.mesh;
    const auto& rule = tet_rule(tri_opt_.quad_degree);
    for (int c = 0; c < m.n_cells(); ++c) {
      const CellGeometry g = cell_geometry(m, c);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                            rule.points[q][3]);
        const auto& v = m.cell(c);
        Eigen::Vector3d x = lam[0] * m.vertex(v[0]) + lam[1] * m.vertex(v[1]) +
                            lam[2] * m.vertex(v[2]) + lam[3] * m.vertex(v[3]);
        CellPoint p{c, lam, x};
        f2 += rule.weights[q] * g.volume * f.value(p, g).squaredNorm();
      }
    }
  }
  const double ap = alpha_plus(alpha_, nu_, c_poincare);
  e.apriori_bound = std::sqrt(2.0 / ap) * lambda * std::sqrt(f2);
  e.slack = e.star_norm_u > 0 ? e.apriori_bound / e.star_norm_u
                              : std::numeric_limits<double>::infinity();
  return e;
}

std::pair<State, PicardTrace> VVSolver::solve(const CellVectorField& f,
                                              const State* initial) const {
  const Spaces& sp = *spaces_;
  State s;
  if (initial) {
    s = *initial;
  } else {
    s.u = zero_field(sp.X);
    s.P = zero_field(sp.Q);
    s.w = zero_field(sp.W);
    s.eta = zero_field(sp.L);
  }

  PicardTrace trace;
  int global_iter = 0;

  for (double lambda : cfg_.lambda_schedule) {
    double theta = cfg_.theta;
    double prev_inc = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    bool converged = false;

    for (int it = 0; it < cfg_.max_iter && !converged; ++it) {
      State next = step(s, f, lambda, theta);
      const double inc = increment_norm(next, s);
      const double ratio = std::isfinite(prev_inc) && prev_inc > 0 ? inc / prev_inc : 0.0;
      auto [res_u, res_w] = residuals(next, f, lambda);
      ++global_iter;
      trace.rows.push_back({global_iter, lambda, inc, ratio, res_u, res_w});

      if (std::isfinite(prev_inc) && inc > prev_inc) {
        if (++growth_streak >= 3 && theta > 0.5) {
          theta = 0.5;
          growth_streak = 0;
        }
      } else {
        growth_streak = 0;
      }

      const double rel = inc / std::max(state_norm(next), 1e-300);
      prev_inc = inc;
      s = std::move(next);
      if ((rel <= cfg_.tol || state_norm(s) == 0.0) && std::max(res_u, res_w) <= 10.0 * cfg_.tol)
        converged = true;
    }
    if (!converged)
      throw PicardConvergenceError(
          "Picard iteration did not converge at lambda = " + std::to_string(lambda), trace, s);
  }
  return {std::move(s), std::move(trace)};
}

std::pair<State, PicardTrace> solve_vvs(std::shared_ptr<const Spaces> spaces,
                                        const CellVectorField& f, double nu, double alpha,
                                        const PicardConfig& cfg, const AssemblyOptions& opt) {
  VVSolver solver(std::move(spaces), nu, alpha, cfg, opt);
  return solver.solve(f);
}

}  // namespace vvflow
