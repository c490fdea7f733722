#include "vvflow/verify.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "vvflow/fieldcalc.hpp"
#include "vvflow/quadrature.hpp"

namespace vvflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector3d cell_point_x(const Mesh& m, int c, const Eigen::Vector4d& lam) {
  const auto& v = m.cell(c);
  return lam[0] * m.vertex(v[0]) + lam[1] * m.vertex(v[1]) + lam[2] * m.vertex(v[2]) +
         lam[3] * m.vertex(v[3]);
}

// Quadrature of an arbitrary cell integrand over the whole mesh.
template <class F>
double integrate(const Mesh& m, int quad_degree, F&& f) {
  const auto& rule = tet_rule(quad_degree);
  double acc = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    const CellGeometry g = cell_geometry(m, c);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                          rule.points[q][3]);
      CellPoint p{c, lam, cell_point_x(m, c, lam)};
      acc += rule.weights[q] * g.volume * f(p, g);
    }
  }
  return acc;
}

Eigen::Vector3d field_rot(const Field& f, const CellPoint& p, const CellGeometry& g) {
  const Eigen::Matrix3d J = vector_field_jacobian(f, p, g);
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

}  // namespace

ManufacturedCase make_manufactured_case(double nu, double alpha) {
  if (!(nu > 0)) throw InvalidArgumentError("make_manufactured_case: nu must be positive");
  if (alpha < 0) throw InvalidArgumentError("make_manufactured_case: alpha must be >= 0");
  ManufacturedCase mc;
  mc.nu = nu;
  mc.alpha = alpha;
  mc.u = stream_bump_field();
  mc.w = stream_bump_vorticity();
  mc.rot_w = stream_bump_neg_laplacian();
  mc.P = [](const Eigen::Vector3d& p) { return std::sin(kPi * p.x()) * std::cos(kPi * p.y()); };
  mc.grad_P = [](const Eigen::Vector3d& p) {
    return Eigen::Vector3d(kPi * std::cos(kPi * p.x()) * std::cos(kPi * p.y()),
                           -kPi * std::sin(kPi * p.x()) * std::sin(kPi * p.y()), 0.0);
  };
  VecField u = mc.u, w = mc.w;
  VectorFn neg_lap = mc.rot_w;
  VectorFn grad_P = mc.grad_P;
  mc.f = [u, w, neg_lap, grad_P, nu, alpha](const Eigen::Vector3d& x) {
    const Eigen::Vector3d uv = u.value(x);
    const Eigen::Vector3d wv = w.value(x);
    return (alpha * uv + nu * neg_lap(x) + wv.cross(uv) + grad_P(x)).eval();
  };
  return mc;
}

NonstdCase make_nonstd_case(double nu, double alpha) {
  if (!(nu > 0)) throw InvalidArgumentError("make_nonstd_case: nu must be positive");
  NonstdCase nc;
  nc.nu = nu;
  nc.alpha = alpha;
  nc.a = stream_bump_field();
  nc.u = nonstd_velocity();
  nc.p = [](const Eigen::Vector3d& x) {
    return std::cos(kPi * x.x()) * std::cos(kPi * x.y()) * std::cos(kPi * x.z());
  };
  VecField a = nc.a, u = nc.u;
  VectorFn neg_lap = nonstd_velocity_neg_laplacian();
  nc.g = [a, u, neg_lap, nu, alpha](const Eigen::Vector3d& x) {
    const double sx = std::sin(kPi * x.x()), cx = std::cos(kPi * x.x());
    const double sy = std::sin(kPi * x.y()), cy = std::cos(kPi * x.y());
    const double sz = std::sin(kPi * x.z()), cz = std::cos(kPi * x.z());
    const Eigen::Vector3d grad_p(-kPi * sx * cy * cz, -kPi * cx * sy * cz, -kPi * cx * cy * sz);
    return (alpha * u.value(x) + nu * neg_lap(x) + a.value(x).cross(u.rot(x)) + grad_p).eval();
  };
  return nc;
}

ErrorNorms field_error(const Field& fh, const VecField& exact, int quad_degree) {
  const Mesh& m = fh.space->mesh();
  const auto& rule = tet_rule(quad_degree);
  double l2 = 0, h1 = 0, rot = 0;
  for (int c = 0; c < m.n_cells(); ++c) {
    const CellGeometry g = cell_geometry(m, c);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                          rule.points[q][3]);
      CellPoint p{c, lam, cell_point_x(m, c, lam)};
      const double wq = rule.weights[q] * g.volume;
      const Eigen::Vector3d dv = evaluate_vector_on_cell(fh, c, lam) - exact.value(p.x);
      const Eigen::Matrix3d dJ = vector_field_jacobian(fh, p, g) - exact.jacobian(p.x);
      l2 += wq * dv.squaredNorm();
      h1 += wq * dJ.squaredNorm();
      const Eigen::Vector3d dr(dJ(2, 1) - dJ(1, 2), dJ(0, 2) - dJ(2, 0), dJ(1, 0) - dJ(0, 1));
      rot += wq * dr.squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(rot)};
}

double scalar_error_l2(const Field& fh, const ScalarFn& exact, int quad_degree) {
  const Mesh& m = fh.space->mesh();
  return std::sqrt(integrate(m, quad_degree, [&](const CellPoint& p, const CellGeometry&) {
    const double d = evaluate_scalar_on_cell(fh, p.cell, p.lam) - exact(p.x);
    return d * d;
  }));
}

void RateTable::write_csv(std::ostream& os) const {
  os << "n,h,err_u_l2,err_u_h1,err_w_l2,err_w_rot,err_P_l2,eta_l2,iterations,"
        "ord_u_l2,ord_u_h1,ord_w_l2,ord_w_rot,ord_P_l2\n";
  char buf[512];
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d", r.n, r.h,
                  r.err_u_l2, r.err_u_h1, r.err_w_l2, r.err_w_rot, r.err_P_l2, r.eta_l2,
                  r.iterations);
    os << buf;
    if (i > 0) {
      const auto& o = orders[i - 1];
      std::snprintf(buf, sizeof buf, ",%.6g,%.6g,%.6g,%.6g,%.6g\n", o[0], o[1], o[2], o[3], o[4]);
    } else {
      std::snprintf(buf, sizeof buf, ",,,,,\n");
    }
    os << buf;
  }
}

RateTable run_convergence_study(const ManufacturedCase& mc, const std::vector<int>& mesh_ns,
                                const PicardConfig& cfg, const AssemblyOptions& opt) {
  RateTable table;
  for (int n : mesh_ns) {
    auto mesh = std::make_shared<const Mesh>(build_box_mesh(n, n, n));
    auto spaces = Spaces::build(mesh);
    VVSolver solver(spaces, mc.nu, mc.alpha, cfg, opt);
    auto [state, trace] = solver.solve(CellVectorField::analytic(mc.f));

    RateRow row{};
    row.n = n;
    row.h = mesh->h_max();
    const ErrorNorms eu = field_error(state.u, mc.u);
    VecField wfield = mc.w;
    const ErrorNorms ew = field_error(state.w, wfield);
    row.err_u_l2 = eu.l2;
    row.err_u_h1 = eu.h1_semi;
    row.err_w_l2 = ew.l2;
    row.err_w_rot = ew.rot;
    row.err_P_l2 = scalar_error_l2(state.P, mc.P);
    row.eta_l2 = norms(state.eta, opt).l2;
    row.iterations = static_cast<int>(trace.rows.size());
    table.rows.push_back(row);
  }
  for (size_t i = 1; i < table.rows.size(); ++i) {
    const auto& a = table.rows[i - 1];
    const auto& b = table.rows[i];
    const double lh = std::log(a.h / b.h);
    auto ord = [&](double ea, double eb) { return std::log(ea / eb) / lh; };
    table.orders.push_back({ord(a.err_u_l2, b.err_u_l2), ord(a.err_u_h1, b.err_u_h1),
                            ord(a.err_w_l2, b.err_w_l2), ord(a.err_w_rot, b.err_w_rot),
                            ord(a.err_P_l2, b.err_P_l2)});
  }
  return table;
}

TrilinearConstants measure_trilinear_constants(std::shared_ptr<const Spaces> spaces, double nu,
                                               int n_probes, std::uint64_t seed,
                                               const AssemblyOptions& opt) {
  const Spaces& sp = *spaces;
  const Mesh& m = *sp.mesh;
  TrilinearConstants out;

  auto solenoidal = make_probes(n_probes, seed, /*solenoidal_only=*/true);
  std::vector<Field> probes;
  probes.reserve(solenoidal.size());
  for (const auto& pf : solenoidal) probes.push_back(interpolate(sp.W, pf.value));

  std::vector<FieldNorms> pnorms;
  pnorms.reserve(probes.size());
  for (const auto& f : probes) pnorms.push_back(norms(f, opt));

  auto cross_integral = [&](const Field& w, const Field& u, const Field& v) {
    return integrate(m, opt.quad_degree, [&](const CellPoint& p, const CellGeometry&) {
      const Eigen::Vector3d wv = evaluate_vector_on_cell(w, p.cell, p.lam);
      const Eigen::Vector3d uv = evaluate_vector_on_cell(u, p.cell, p.lam);
      const Eigen::Vector3d vv = evaluate_vector_on_cell(v, p.cell, p.lam);
      return wv.cross(uv).dot(vv);
    });
  };
  auto b_integral = [&](const Field& a, const Field& v, const Field& w) {
    return integrate(m, opt.quad_degree, [&](const CellPoint& p, const CellGeometry& g) {
      const Eigen::Vector3d av = evaluate_vector_on_cell(a, p.cell, p.lam);
      const Eigen::Matrix3d Jv = vector_field_jacobian(v, p, g);
      const Eigen::Vector3d wv = evaluate_vector_on_cell(w, p.cell, p.lam);
      return (Jv * av).dot(wv);
    });
  };

  // (2.25)-style ratios over probe triples.
  const int npr = static_cast<int>(probes.size());
  for (int i = 0; i < npr; ++i)
    for (int j = 0; j < npr; ++j) {
      if (pnorms[i].l2 == 0 || pnorms[j].l2 == 0) continue;
      const int k = (i + j + 1) % npr;
      if (pnorms[k].h1_semi == 0) continue;
      const double num = std::abs(cross_integral(probes[i], probes[j], probes[k]));
      const double den = pnorms[i].l2 * std::sqrt(pnorms[j].h1_semi) *
                         std::sqrt(pnorms[j].l2) * pnorms[k].h1_semi;
      if (den > 0) out.M_cross = std::max(out.M_cross, num / den);
    }

  // Ratios through the a = 0, alpha = 0 solution operator. Interpolated
  // probes are only O(h^2) weakly divergence-free, hence the loose check.
  NonstdStokesSolver delta0(spaces, NonstdParams::none(0.0, nu), opt);
  std::vector<Field> hats;
  hats.reserve(probes.size());
  for (const auto& f : probes) hats.push_back(delta0.apply_delta_inv(f, 0.05));

  for (int i = 0; i < npr; ++i)    // u
    for (int j = 0; j < npr; ++j)  // w
    {
      const int k = (i + 2 * j + 1) % npr;  // v
      const double den = std::sqrt(pnorms[i].h1_semi) * std::sqrt(pnorms[i].l2) * pnorms[j].l2 *
                         pnorms[k].l2;
      if (den == 0) continue;
      const double num =
          std::abs(b_integral(probes[i], probes[j], hats[k])) +
          std::abs(b_integral(probes[j], probes[i], hats[k]));
      out.M_conv_delta0 = std::max(out.M_conv_delta0, nu * num / den);
    }

  for (int i = 0; i < npr; ++i)    // w
    for (int j = 0; j < npr; ++j)  // u
    {
      const double den = pnorms[i].l2 * pnorms[i].l2 * std::sqrt(pnorms[j].h1_semi) *
                         std::sqrt(pnorms[j].l2);
      if (den == 0) continue;
      const Field& w = probes[i];
      const Field& u = probes[j];
      const Field& hat = hats[i];
      const double num = std::abs(
          integrate(m, opt.quad_degree, [&](const CellPoint& p, const CellGeometry& g) {
            const Eigen::Vector3d wv = evaluate_vector_on_cell(w, p.cell, p.lam);
            const Eigen::Vector3d uv = evaluate_vector_on_cell(u, p.cell, p.lam);
            return wv.cross(uv).dot(field_rot(hat, p, g));
          }));
      out.M_cross_rot = std::max(out.M_cross_rot, nu * num / den);
    }
  return out;
}

double Diagnostics::get(const std::string& name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  throw InvalidArgumentError("Diagnostics: no entry named " + name);
}

void Diagnostics::write_text(std::ostream& os) const {
  char buf[160];
  for (const auto& [k, v] : values) {
    std::snprintf(buf, sizeof buf, "  %-32s = %.17g\n", k.c_str(), v);
    os << buf;
  }
}

bool InvariantReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void InvariantReport::write_text(std::ostream& os) const {
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "[%s] %-40s measured %.6g %s threshold %.6g\n",
                  c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                  c.upper_bound ? "<=" : ">=", c.threshold);
    os << buf;
  }
  os << "diagnostics:\n";
  diagnostics.write_text(os);
}

InvariantReport run_invariant_suite(const InvariantSuiteOptions& sopt) {
  InvariantReport rep;
  auto check_le = [&](const std::string& name, double measured, double threshold) {
    rep.checks.push_back({name, measured, threshold, true, measured <= threshold});
  };
  auto check_ge = [&](const std::string& name, double measured, double threshold) {
    rep.checks.push_back({name, measured, threshold, false, measured >= threshold});
  };

  const AssemblyOptions& opt = sopt.assembly;
  auto mesh = std::make_shared<const Mesh>(build_box_mesh(sopt.mesh_n, sopt.mesh_n, sopt.mesh_n));
  auto spaces = Spaces::build(mesh);
  const MeshStats ms = mesh_stats(*mesh);

  check_le("mesh.volume_rel_error", std::abs(ms.volume - 1.0), 1e-12);
  check_le("mesh.surface_area_rel_error", std::abs(ms.surface_area - 6.0) / 6.0, 1e-12);

  // Symmetry of the symmetric forms, relative to the largest entry.
  auto rel_sym = [&](const SparseMatrix& A) {
    double amax = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it)
        amax = std::max(amax, std::abs(it.value()));
    return amax > 0 ? symmetry_defect(A) / amax : 0.0;
  };
  SparseMatrix Mw = assemble_mass(*spaces->W, opt);
  SparseMatrix Kw = assemble_gradgrad(*spaces->W, opt);
  SparseMatrix Rw = assemble_rotrot(*spaces->W, opt);
  SparseMatrix Dw = assemble_divdiv(*spaces->W, opt);
  check_le("assembly.mass_symmetry", rel_sym(Mw), 1e-14);
  check_le("assembly.gradgrad_symmetry", rel_sym(Kw), 1e-14);
  check_le("assembly.rotrot_symmetry", rel_sym(Rw), 1e-14);
  check_le("assembly.divdiv_symmetry", rel_sym(Dw), 1e-14);

  // Cross-term skew symmetry on interpolated probes.
  {
    auto probes = make_probes(3, sopt.seed, false);
    double worst = 0.0;
    for (const auto& pf : probes) {
      Field w = interpolate(spaces->W, pf.value);
      Field u = interpolate(spaces->W, probes[0].value);
      SparseMatrix C = assemble_cross(CellVectorField::from_field(w), *spaces->W, *spaces->W, opt);
      const double quad = std::abs(u.coeffs.dot(C * u.coeffs));
      const double scale = norms(w, opt).l2 * norms(u, opt).l2 * norms(u, opt).l2 + 1e-300;
      worst = std::max(worst, quad / scale);
    }
    check_le("assembly.cross_skew", worst, 1e-13);
  }

  // f_bc: exact zero for constants, volume vs surface agreement, and the
  // Cauchy-Schwarz continuity bound.
  {
    Field Pconst = interpolate(spaces->Q, ScalarFn([](const Eigen::Vector3d&) { return 3.7; }));
    Eigen::VectorXd v = assemble_fbc(Pconst, *spaces->W, FbcForm::Volume, opt);
    check_le("fbc.constant_pressure_zero", v.norm(), 0.0);

    AssemblyOptions opt6 = opt;
    opt6.quad_degree = 6;
    Field P = interpolate(spaces->Q, ScalarFn([](const Eigen::Vector3d& x) {
                            return std::sin(kPi * x.x()) * std::cos(kPi * x.y());
                          }));
    Eigen::VectorXd vol = assemble_fbc(P, *spaces->W, FbcForm::Volume, opt6);
    Eigen::VectorXd sur = assemble_fbc(P, *spaces->W, FbcForm::Surface, opt6);
    check_le("fbc.volume_vs_surface", (vol - sur).lpNorm<Eigen::Infinity>(), 1e-10);

    Field chi = interpolate(spaces->W, tangential_zero_solenoidal().value);
    const double fbc_val = std::abs(vol.dot(chi.coeffs));
    const FieldNorms Pn = norms(P, opt);
    const FieldNorms cn = norms(chi, opt);
    check_ge("fbc.cauchy_schwarz_slack", Pn.h1_semi * cn.rot / std::max(fbc_val, 1e-300), 1.0);
  }

  // Manufactured solve: energy identity, a priori bound, fixed-point
  // consistency, trace behavior.
  const double c_poincare_W = estimate_poincare(*spaces->W, opt);
  {
    ManufacturedCase mc = make_manufactured_case(sopt.nu, sopt.alpha);
    PicardConfig cfg;
    cfg.tol = 1e-10;
    VVSolver solver(spaces, mc.nu, mc.alpha, cfg, opt);
    CellVectorField f = CellVectorField::analytic(mc.f);
    auto [state, trace] = solver.solve(f);

    auto e = solver.energy_identity(state, f, 1.0, c_poincare_W);
    check_le("picard.energy_identity_rel", e.defect / std::max(std::abs(e.work), 1e-300), 1e-8);
    check_ge("picard.apriori_3_12_slack", e.slack, 1.0);

    const State next = solver.step(state, f, 1.0, 1.0);
    check_le("picard.fixed_point_consistency",
             solver.increment_norm(next, state) / std::max(solver.state_norm(state), 1e-300),
             10 * cfg.tol);
  }

  // Linearity of T.
  {
    TSolver T(spaces, opt);
    std::mt19937_64 rng(sopt.seed);
    std::uniform_real_distribution<double> dist(-1, 1);
    const double c1 = dist(rng), c2 = dist(rng);
    VecField g1 = stream_bump_field(), g2 = polynomial_probe();
    TInput in1{to_cell_field(g1), Eigen::VectorXd::Zero(spaces->W->n_dofs()), sopt.nu, sopt.alpha};
    TInput in2{to_cell_field(g2), Eigen::VectorXd::Zero(spaces->W->n_dofs()), sopt.nu, sopt.alpha};
    in2.l = assemble_rot_rhs(*spaces->W, in2.g, opt);
    TInput in3;
    in3.nu = sopt.nu;
    in3.alpha = sopt.alpha;
    VecField g1c = g1, g2c = g2;
    in3.g = CellVectorField::analytic([g1c, g2c, c1, c2](const Eigen::Vector3d& x) {
      return (c1 * g1c.value(x) + c2 * g2c.value(x)).eval();
    });
    in3.l = c1 * in1.l + c2 * in2.l;
    State s1 = T.solve(in1), s2 = T.solve(in2), s3 = T.solve(in3);
    Eigen::VectorXd lin_u = c1 * s1.u.coeffs + c2 * s2.u.coeffs - s3.u.coeffs;
    Eigen::VectorXd lin_w = c1 * s1.w.coeffs + c2 * s2.w.coeffs - s3.w.coeffs;
    const double scale = s3.u.coeffs.norm() + s3.w.coeffs.norm() + 1e-300;
    check_le("stokes.T_linearity", (lin_u.norm() + lin_w.norm()) / scale, 1e-9);
  }

  // Nonstandard operator: zero cross block at a = 0 and the energy identity.
  {
    NonstdStokesSolver d0(spaces, NonstdParams::none(0.0, sopt.nu), opt);
    check_le("nonstd.a0_cross_block_nnz", static_cast<double>(d0.cross_block().nonZeros()), 0.0);

    ManufacturedCase mc = make_manufactured_case(sopt.nu, sopt.alpha);
    PicardConfig cfg;
    cfg.tol = 1e-10;
    VVSolver solver(spaces, mc.nu, mc.alpha, cfg, opt);
    auto [state, trace] = solver.solve(CellVectorField::analytic(mc.f));
    NonstdParams params = NonstdParams::with_field(state.u, sopt.alpha, sopt.nu);
    params.div_check_tol = 1e-6;
    NonstdStokesSolver na(spaces, params, opt);
    Field w = state.w;
    // w from the T solve is weakly divergence-free by construction.
    Field hat = na.apply_delta_inv(w);
    const double lhs = w.coeffs.dot(Mw * hat.coeffs);
    const FieldNorms hn = norms(hat, opt);
    double cross_term = integrate(*mesh, opt.quad_degree,
                                  [&](const CellPoint& p, const CellGeometry& g) {
                                    const Eigen::Vector3d av =
                                        evaluate_vector_on_cell(state.u, p.cell, p.lam);
                                    const Eigen::Vector3d hv =
                                        evaluate_vector_on_cell(hat, p.cell, p.lam);
                                    return av.cross(field_rot(hat, p, g)).dot(hv);
                                  });
    const double rhs = sopt.nu * hn.rot * hn.rot + sopt.alpha * hn.l2 * hn.l2 + cross_term;
    check_le("nonstd.energy_2_21_rel", std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300),
             1e-9);
  }

  // Helmholtz decomposition invariants.
  {
    Field g = interpolate(spaces->W, tangential_zero_solenoidal().value);
    HelmholtzResult hr = helmholtz_decompose(g, *spaces, opt);
    const double gn = norms(g, opt).l2;
    check_le("helmholtz.orthogonality", hr.orthogonality, 1e-9);
    check_le("helmholtz.reconstruction_rel", hr.reconstruction_residual / std::max(gn, 1e-300),
             1e-9);
  }

  // star-norm bookkeeping and the alpha_+ inequalities (2.15)/(2.16).
  {
    auto probes = make_probes(sopt.n_probes, sopt.seed + 1, false);
    double worst_215 = std::numeric_limits<double>::infinity();
    double worst_216 = std::numeric_limits<double>::infinity();
    double worst_star = 0.0;
    const double ap = alpha_plus(sopt.alpha, sopt.nu, c_poincare_W);
    for (size_t i = 0; i < probes.size(); ++i) {
      Field v = interpolate(spaces->W, probes[i].value);
      const FieldNorms vn = norms(v, opt);
      const double star = star_norm_from(vn, sopt.alpha, sopt.nu);
      worst_star = std::max(worst_star,
                            std::abs(star * star - (sopt.alpha * vn.l2 * vn.l2 +
                                                    sopt.nu * vn.h1_semi * vn.h1_semi)) /
                                std::max(star * star, 1e-300));
      Field ggg = interpolate(spaces->W, probes[(i + 3) % probes.size()].value);
      const double gdotv = std::abs(ggg.coeffs.dot(Mw * v.coeffs));
      const double bound215 = std::sqrt(2.0 / ap) * norms(ggg, opt).l2 * star;
      if (gdotv > 0) worst_215 = std::min(worst_215, bound215 / gdotv);
      const double lhs216 = vn.l2 * vn.h1_semi;
      const double bound216 = star * star / std::sqrt(ap * sopt.nu);
      if (lhs216 > 0) worst_216 = std::min(worst_216, bound216 / lhs216);
    }
    check_le("fieldcalc.star_norm_identity", worst_star, 1e-14);
    check_ge("ineq.2_15_slack", worst_215, 1.0);
    check_ge("ineq.2_16_slack", worst_216, 1.0);
  }

  // Measured constants.
  {
    auto scalar_zero_trace = FeSpace::build(mesh, Family::ScalarP2, Constraint::ZeroTrace);
    const double cp_scalar = estimate_poincare(*scalar_zero_trace, opt);
    rep.diagnostics.set("C_P_scalar_zero_trace", cp_scalar);
    rep.diagnostics.set("C_P_W", c_poincare_W);
    EquivalenceConstants eq = measure_equivalence_constants(*spaces, opt);
    rep.diagnostics.set("C0_est", eq.C0_est);
    rep.diagnostics.set("C1_est", eq.C1_est);
    rep.diagnostics.set("beta1_h", eq.beta1_h);
    check_le("fieldcalc.C1_convex_cube", eq.C1_est, 1.05);
    check_ge("fieldcalc.beta1_h", eq.beta1_h, 0.1);

    TrilinearConstants tc = measure_trilinear_constants(spaces, sopt.nu, 6, sopt.seed + 3, opt);
    rep.diagnostics.set("M_cross", tc.M_cross);
    rep.diagnostics.set("M_conv_delta0", tc.M_conv_delta0);
    rep.diagnostics.set("M_cross_rot", tc.M_cross_rot);
    const double M = std::max({tc.M_cross, tc.M_conv_delta0, tc.M_cross_rot});
    check_le("trilinear.M_finite", M, 1e6);

    VecField aprobe = stream_bump_field();
    double ga = std::sqrt(integrate(*mesh, opt.quad_degree,
                                    [&](const CellPoint& p, const CellGeometry&) {
                                      return aprobe.jacobian(p.x).squaredNorm();
                                    }));
    const double cstar =
        measure_c_star(*spaces, sopt.alpha, sopt.nu, to_cell_field(aprobe), ga, c_poincare_W, opt);
    rep.diagnostics.set("C_star_est", cstar);

    ManufacturedCase mc = make_manufactured_case(sopt.nu, sopt.alpha);
    double fnorm = std::sqrt(integrate(*mesh, 6, [&](const CellPoint& p, const CellGeometry&) {
      return mc.f(p.x).squaredNorm();
    }));
    SmallnessConstants sc{c_poincare_W, M, std::isfinite(cstar) ? cstar : 1.0, 1.0};
    SmallnessReport sr = check_smallness(fnorm, sopt.nu, sopt.alpha, sc);
    rep.diagnostics.set("K1", sr.K1);
    rep.diagnostics.set("K2", sr.K2);
    rep.diagnostics.set("K3", sr.K3);
    rep.diagnostics.set("alpha_plus", sr.alpha_plus);
  }

  return rep;
}

}  // namespace vvflow
