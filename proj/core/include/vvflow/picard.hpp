// Fixed-point solution of the nonlinear velocity-vorticity system: iterate
// F = T o N with optional damping, continued in the homotopy parameter
// lambda that scales the forcing and the nonlinear terms together.
#pragma once

#include <iosfwd>

#include "vvflow/stokes.hpp"

namespace vvflow {

struct PicardConfig {
  int max_iter = 100;
  // Relative increment tolerance in the stopping norm: the *-norm of the
  // velocity increment plus the L2 norm of the vorticity increment.
  double tol = 1e-9;
  double theta = 1.0;  // damping in (0, 1]
  std::vector<double> lambda_schedule{1.0};
  int quad_degree = 4;         // trilinear terms; 6 removes the quadrature crime
  bool skew_symmetrize = false;  // explicitly skew convection in the vorticity equation

  void validate() const;
  static std::vector<double> uniform_schedule(int steps);
};

struct PicardIterate {
  int iteration;     // global count across the schedule
  double lambda;
  double increment;  // ||du||_* + ||dw||, absolute
  double ratio;      // increment / previous increment (0 before iteration 2)
  double res_u;      // relative residual of the momentum equation
  double res_w;      // relative residual of the vorticity equation
};

struct PicardTrace {
  std::vector<PicardIterate> rows;
  void write_csv(std::ostream& os) const;
};

class PicardConvergenceError : public Error {
 public:
  PicardConvergenceError(const std::string& what, PicardTrace trace, State best)
      : Error(what), trace(std::move(trace)), best(std::move(best)) {}
  PicardTrace trace;
  State best;
};

struct SmallnessConstants {
  double C_P = 0.3;     // measured Poincare constant of W_h
  double M = 1.0;       // measured trilinear constant (Lemma-style ratio maxima)
  double C_star = 1.0;  // conditional well-posedness constant
  double C_omega = 1.0; // generic domain constant used by the surrogates
};

// Every inequality of the small-data theory evaluated with measured or
// supplied constants. Purely advisory: reported, never enforced.
struct SmallnessReport {
  double nu = 0, alpha = 0, alpha_plus = 0, C_P = 0, f_norm = 0;
  double forcing_lhs = 0, forcing_rhs = 0;  // ||f|| <= (C*/sqrt(2)) nu^{5/4} alpha_+^{3/4}
  bool forcing_ok = false;
  double alpha1 = 0;  // 1 - 2 sqrt(2) M nu^{-5/4} alpha_+^{-3/4} ||f||
  bool alpha1_positive = false;
  double uniqueness_product = 0;  // 2 sqrt(2) M^2 nu^{-2} alpha_+^{-1} alpha_1^{-1} ||f|| K1
  bool uniqueness_ok = false;
  double K1 = 0, K2 = 0, K3 = 0;  // a priori bound surrogates

  bool all_ok() const { return forcing_ok && alpha1_positive && uniqueness_ok; }
  void write_text(std::ostream& os) const;
};

SmallnessReport check_smallness(double f_norm, double nu, double alpha,
                                const SmallnessConstants& c);

class VVSolver {
 public:
  VVSolver(std::shared_ptr<const Spaces> spaces, double nu, double alpha, PicardConfig cfg = {},
           AssemblyOptions opt = {});

  // N at state s, scaled by lambda: g = lambda (f - w x u),
  // l(chi) = lambda [ (f, rot chi) + b(w,u,chi) - b(u,w,chi) ].
  TInput apply_n(const State& s, const CellVectorField& f, double lambda = 1.0) const;

  // One damped fixed-point step s+ = (1-theta) s + theta T(N_lambda(s)).
  State step(const State& s, const CellVectorField& f, double lambda, double theta) const;

  // Full continuation solve, warm-started from `initial` when given;
  // throws PicardConvergenceError with the trace and best iterate on
  // failure.
  std::pair<State, PicardTrace> solve(const CellVectorField& f,
                                      const State* initial = nullptr) const;

  // Relative residuals of the momentum and vorticity equations at s for
  // homotopy level lambda.
  std::pair<double, double> residuals(const State& s, const CellVectorField& f,
                                      double lambda) const;

  // ||du||_* + ||dw|| between two states (the stopping currency).
  double increment_norm(const State& a, const State& b) const;
  double state_norm(const State& s) const;

  // |alpha ||u||^2 + nu ||grad u||^2 - lambda (f,u)|, the discrete energy
  // identity defect, plus the tested quantities.
  struct EnergyIdentity {
    double kinetic;   // alpha ||u||^2 + nu ||grad u||^2
    double work;      // lambda (f, u), via the assembled dual
    double defect;    // |kinetic - work|
    double star_norm_u;
    double apriori_bound;  // sqrt(2) alpha_+^{-1/2} lambda ||f||
    double slack;          // bound / star_norm_u
  };
  EnergyIdentity energy_identity(const State& s, const CellVectorField& f, double lambda,
                                 double c_poincare) const;

  const TSolver& t_solver() const { return T_; }
  double nu() const { return nu_; }
  double alpha() const { return alpha_; }
  const PicardConfig& config() const { return cfg_; }

 private:
  Eigen::VectorXd convection_dual(const State& s) const;

  std::shared_ptr<const Spaces> spaces_;
  double nu_, alpha_;
  PicardConfig cfg_;
  AssemblyOptions opt_;       // bilinear assembly options
  AssemblyOptions tri_opt_;   // trilinear quadrature (cfg.quad_degree)
  TSolver T_;
};

// Free-function forms of the module operations.
std::pair<State, PicardTrace> solve_vvs(std::shared_ptr<const Spaces> spaces,
                                        const CellVectorField& f, double nu, double alpha,
                                        const PicardConfig& cfg = {},
                                        const AssemblyOptions& opt = {});

}  // namespace vvflow
