// Manufactured solutions, convergence studies, invariant suites, and
// measured-constant diagnostics.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "vvflow/analytic.hpp"
#include "vvflow/picard.hpp"

namespace vvflow {

// A manufactured solution of the full velocity-vorticity system on the unit
// cube: u* = rot(0,0,phi) with quartic-bump phi (so u* is in H^1_0 and
// divergence-free), w* = rot u*, P* = sin(pi x) cos(pi y) (zero mean),
// eta* = 0, and f = alpha u* - nu Lap u* + w* x u* + grad P*.
struct ManufacturedCase {
  double nu = 0.1;
  double alpha = 1.0;
  VecField u;
  VecField w;
  VectorFn rot_w;  // = -Lap u*
  ScalarFn P;
  VectorFn grad_P;
  VectorFn f;
};

ManufacturedCase make_manufactured_case(double nu, double alpha);

// Manufactured case for the nonstandard Stokes problem: tangential trig
// velocity with bump z-profile (u.n = 0 and rot u x n = 0 on every face),
// pressure cos(pi x) cos(pi y) cos(pi z), coefficient field a = the
// stream-bump velocity (solenoidal, zero trace).
struct NonstdCase {
  double nu = 1.0;
  double alpha = 1.0;
  VecField a;
  VecField u;
  ScalarFn p;
  VectorFn g;  // alpha u - nu Lap u + a x rot u + grad p
};

NonstdCase make_nonstd_case(double nu, double alpha);

// Error norms of a discrete field against a closed-form exact field.
struct ErrorNorms {
  double l2 = 0;
  double h1_semi = 0;
  double rot = 0;
};
ErrorNorms field_error(const Field& fh, const VecField& exact, int quad_degree = 6);
double scalar_error_l2(const Field& fh, const ScalarFn& exact, int quad_degree = 6);

struct RateRow {
  int n;
  double h;
  double err_u_l2, err_u_h1, err_w_l2, err_w_rot, err_P_l2, eta_l2;
  int iterations;
};

struct RateTable {
  std::vector<RateRow> rows;
  // Observed orders between consecutive rows, in the column order
  // u_l2, u_h1, w_l2, w_rot, P_l2.
  std::vector<std::array<double, 5>> orders;
  void write_csv(std::ostream& os) const;
};

RateTable run_convergence_study(const ManufacturedCase& mc, const std::vector<int>& mesh_ns,
                                const PicardConfig& cfg = {}, const AssemblyOptions& opt = {});

// Probe-based estimates of the trilinear-form constants; all three are
// lower bounds for the continuous suprema.
struct TrilinearConstants {
  double M_cross = 0;       // |(w x u, v)| / (||w|| ||grad u||^.5 ||u||^.5 ||grad v||)
  double M_conv_delta0 = 0; // (|b(u,w,D0 v)| + |b(w,u,D0 v)|) nu / (||grad u||^.5 ||u||^.5 ||w|| ||v||)
  double M_cross_rot = 0;   // |(w x u, rot D0 w)| nu / (||w||^2 ||grad u||^.5 ||u||^.5)
};

TrilinearConstants measure_trilinear_constants(std::shared_ptr<const Spaces> spaces, double nu,
                                               int n_probes, std::uint64_t seed,
                                               const AssemblyOptions& opt = {});

struct Diagnostics {
  std::vector<std::pair<std::string, double>> values;
  void set(const std::string& name, double v) { values.emplace_back(name, v); }
  double get(const std::string& name) const;
  void write_text(std::ostream& os) const;
};

struct InvariantCheck {
  std::string name;
  double measured = 0;
  double threshold = 0;
  bool upper_bound = true;  // pass iff measured <= threshold (>= otherwise)
  bool pass = false;
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  Diagnostics diagnostics;
  bool all_pass() const;
  void write_text(std::ostream& os) const;
};

struct InvariantSuiteOptions {
  int mesh_n = 2;
  double nu = 0.1;
  double alpha = 1.0;
  std::uint64_t seed = 12345;
  int n_probes = 20;
  AssemblyOptions assembly{};
};

// Evaluates every runtime-checkable invariant of the modules plus the
// measured-constant diagnostics; the single entry point used by CI and the
// verify CLI command.
InvariantReport run_invariant_suite(const InvariantSuiteOptions& opt = {});

}  // namespace vvflow
