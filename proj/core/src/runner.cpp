#include "vvflow/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "vvflow/expression.hpp"
#include "vvflow/fieldcalc.hpp"
#include "vvflow/verify.hpp"
#include "vvflow/vtk_io.hpp"

namespace vvflow {

namespace {

CellVectorField forcing_field(const RunConfig& cfg, const ManufacturedCase& mc) {
  if (cfg.forcing == "zero") return CellVectorField::zero();
  if (cfg.forcing == "manufactured") return CellVectorField::analytic(mc.f);
  Expression ex = parse_expression(cfg.fx);
  Expression ey = parse_expression(cfg.fy);
  Expression ez = parse_expression(cfg.fz);
  return CellVectorField::analytic([ex, ey, ez](const Eigen::Vector3d& p) {
    return Eigen::Vector3d(ex.eval(p), ey.eval(p), ez.eval(p));
  });
}

std::ofstream open_report(const std::filesystem::path& dir, const std::string& name,
                          const RunConfig& cfg, const Mesh* mesh) {
  std::ofstream os(dir / name);
  os << "# vvflow report\n# --- configuration ---\n";
  std::istringstream echo(config_echo(cfg));
  std::string line;
  while (std::getline(echo, line)) os << "# " << line << "\n";
  if (mesh) {
    const MeshStats ms = mesh_stats(*mesh);
    os << "# --- mesh ---\n";
    os << "# h_max = " << ms.h_max << "\n# volume = " << ms.volume
       << "\n# surface_area = " << ms.surface_area << "\n# cells = " << ms.cell_count << "\n";
  }
  os << "# --- tolerances ---\n";
  os << "# direct_solve_residual <= " << TSolver::kResidualTol << "\n";
  os << "# picard_tol = " << cfg.tol << "\n";
  os << "# ---\n";
  return os;
}

int run_solve(const RunConfig& cfg) {
  auto mesh = std::make_shared<const Mesh>(
      build_box_mesh(cfg.mesh_nx, cfg.mesh_ny, cfg.mesh_nz,
                     Eigen::Vector3d(cfg.extent_x, cfg.extent_y, cfg.extent_z)));
  auto spaces = Spaces::build(mesh);
  const std::filesystem::path dir(cfg.out_dir);

  ManufacturedCase mc = make_manufactured_case(cfg.nu, cfg.alpha);
  CellVectorField f = forcing_field(cfg, mc);

  PicardConfig pc;
  pc.tol = cfg.tol;
  pc.max_iter = cfg.max_iter;
  pc.theta = cfg.theta;
  pc.lambda_schedule = PicardConfig::uniform_schedule(cfg.lambda_steps);
  pc.quad_degree = cfg.quad_degree;
  AssemblyOptions opt;
  opt.n_threads = cfg.threads;

  VVSolver solver(spaces, cfg.nu, cfg.alpha, pc, opt);
  State state;
  PicardTrace trace;
  bool failed = false;
  std::string failure;
  try {
    std::tie(state, trace) = solver.solve(f);
  } catch (const PicardConvergenceError& e) {
    failed = true;
    failure = e.what();
    trace = e.trace;
    state = e.best;
  }

  {
    std::ofstream os(dir / "trace.csv");
    trace.write_csv(os);
  }
  if (state.u.space) {
    write_vtk_fields((dir / "solution.vtk").string(), *mesh,
                     {{"u", &state.u}, {"P", &state.P}, {"w", &state.w}, {"eta", &state.eta}});
  }

  auto os = open_report(dir, "report.txt", cfg, mesh.get());
  if (failed) {
    os << "status: FAILED: " << failure << "\n";
    return 1;
  }
  os << "status: converged in " << trace.rows.size() << " iterations\n";

  const double c_poincare = estimate_poincare(*spaces->W, opt);
  auto e = solver.energy_identity(state, f, 1.0, c_poincare);
  os << "energy identity: kinetic = " << e.kinetic << ", work = " << e.work
     << ", defect = " << e.defect << "\n";
  os << "a priori (3.12): ||u||_* = " << e.star_norm_u << " <= " << e.apriori_bound
     << " (slack " << e.slack << ")\n";

  double fnorm = 0.0;
  {
    FieldNorms un = norms(state.u, opt);
    FieldNorms wn = norms(state.w, opt);
    os << "norms: |u|_l2 = " << un.l2 << ", |u|_h1 = " << un.h1_semi << ", |w|_l2 = " << wn.l2
       << ", |w|_rot = " << wn.rot << "\n";
  }
  // Smallness report with measured constants.
  {
    TrilinearConstants tc = measure_trilinear_constants(spaces, cfg.nu, 4, cfg.seed, opt);
    const double M = std::max({tc.M_cross, tc.M_conv_delta0, tc.M_cross_rot});
    double f2 = 0.0;  // ||f||^2 by quadrature
    {
      const auto& rule = tet_rule(6);
      for (int c = 0; c < mesh->n_cells(); ++c) {
        const CellGeometry g = cell_geometry(*mesh, c);
        for (size_t q = 0; q < rule.points.size(); ++q) {
          Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                              rule.points[q][3]);
          const auto& v = mesh->cell(c);
          Eigen::Vector3d x = lam[0] * mesh->vertex(v[0]) + lam[1] * mesh->vertex(v[1]) +
                              lam[2] * mesh->vertex(v[2]) + lam[3] * mesh->vertex(v[3]);
          CellPoint p{c, lam, x};
          f2 += rule.weights[q] * g.volume * f.value(p, g).squaredNorm();
        }
      }
    }
    fnorm = std::sqrt(f2);
    SmallnessConstants sc{c_poincare, M, 1.0, 1.0};
    SmallnessReport sr = check_smallness(fnorm, cfg.nu, cfg.alpha, sc);
    std::ofstream sos(dir / "smallness.txt");
    sr.write_text(sos);
    os << "smallness: forcing " << (sr.forcing_ok ? "ok" : "FAIL") << ", alpha1 = " << sr.alpha1
       << ", uniqueness " << (sr.uniqueness_ok ? "ok" : "FAIL") << "\n";
  }
  return 0;
}

int run_stokes_nonstd(const RunConfig& cfg) {
  auto mesh = std::make_shared<const Mesh>(
      build_box_mesh(cfg.mesh_nx, cfg.mesh_ny, cfg.mesh_nz,
                     Eigen::Vector3d(cfg.extent_x, cfg.extent_y, cfg.extent_z)));
  auto spaces = Spaces::build(mesh);
  const std::filesystem::path dir(cfg.out_dir);
  AssemblyOptions opt;
  opt.n_threads = cfg.threads;
  opt.quad_degree = cfg.quad_degree;

  NonstdCase nc = make_nonstd_case(cfg.nu, cfg.alpha);
  NonstdParams params =
      cfg.a_field == "zero"
          ? NonstdParams::none(cfg.alpha, cfg.nu)
          : NonstdParams::with_analytic(to_cell_field(nc.a), cfg.alpha, cfg.nu);
  NonstdStokesSolver solver(spaces, params, opt);

  CellVectorField g;
  ManufacturedCase mc = make_manufactured_case(cfg.nu, cfg.alpha);
  if (cfg.forcing == "manufactured")
    g = CellVectorField::analytic(nc.g);
  else
    g = forcing_field(cfg, mc);
  auto [u, p] = solver.solve(g);

  write_vtk_fields((dir / "nonstd.vtk").string(), *mesh, {{"u", &u}, {"p", &p}});
  auto os = open_report(dir, "report.txt", cfg, mesh.get());
  const double c_poincare = estimate_poincare(*spaces->W, opt);
  os << "status: solved\n";
  os << "||grad a|| = " << solver.grad_a_norm() << "\n";
  os << "smallness (2.17) ratio at C* = 1: " << solver.smallness_ratio(1.0, c_poincare)
     << " (<= 1 satisfies the condition)\n";
  FieldNorms un = norms(u, opt);
  os << "|u|_l2 = " << un.l2 << ", |u|_rot = " << un.rot << ", |u|_div = " << un.div << "\n";
  if (cfg.forcing == "manufactured" && cfg.a_field == "manufactured") {
    ErrorNorms err = field_error(u, nc.u);
    os << "errors vs manufactured: l2 = " << err.l2 << ", rot = " << err.rot << "\n";
  }
  return 0;
}

int run_decompose(const RunConfig& cfg) {
  auto mesh = std::make_shared<const Mesh>(
      build_box_mesh(cfg.mesh_nx, cfg.mesh_ny, cfg.mesh_nz,
                     Eigen::Vector3d(cfg.extent_x, cfg.extent_y, cfg.extent_z)));
  auto spaces = Spaces::build(mesh);
  const std::filesystem::path dir(cfg.out_dir);
  AssemblyOptions opt;
  opt.n_threads = cfg.threads;

  ManufacturedCase mc = make_manufactured_case(cfg.nu, cfg.alpha);
  CellVectorField g = forcing_field(cfg, mc);
  Field gh = interpolate(spaces->W, [&](const Eigen::Vector3d& x) {
    CellPoint p{};
    (void)p;
    return Eigen::Vector3d::Zero();
  });
  // Interpolate the forcing onto W_h so the decomposition input is a Field.
  {
    const ManufacturedCase& m2 = mc;
    if (cfg.forcing == "manufactured") {
      gh = interpolate(spaces->W, m2.f);
    } else if (cfg.forcing == "zero") {
      gh = zero_field(spaces->W);
    } else {
      Expression ex = parse_expression(cfg.fx), ey = parse_expression(cfg.fy),
                 ez = parse_expression(cfg.fz);
      gh = interpolate(spaces->W, [ex, ey, ez](const Eigen::Vector3d& p) {
        return Eigen::Vector3d(ex.eval(p), ey.eval(p), ez.eval(p));
      });
    }
  }
  HelmholtzResult hr = helmholtz_decompose(gh, *spaces, opt);
  write_vtk_fields((dir / "decomposition.vtk").string(), *mesh,
                   {{"g", &gh}, {"q", &hr.q}, {"psi", &hr.psi}});
  auto os = open_report(dir, "report.txt", cfg, mesh.get());
  os << "status: decomposed\n";
  os << "reconstruction residual = " << hr.reconstruction_residual << "\n";
  os << "orthogonality = " << hr.orthogonality << "\n";
  os << "|psi|_l2 = " << norms(hr.psi, opt).l2 << ", |grad q|_l2 = " << norms(hr.q, opt).h1_semi
     << "\n";
  (void)g;
  return 0;
}

int run_study(const RunConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  ManufacturedCase mc = make_manufactured_case(cfg.nu, cfg.alpha);
  PicardConfig pc;
  pc.tol = cfg.tol;
  pc.max_iter = cfg.max_iter;
  pc.theta = cfg.theta;
  pc.lambda_schedule = PicardConfig::uniform_schedule(cfg.lambda_steps);
  pc.quad_degree = cfg.quad_degree;
  AssemblyOptions opt;
  opt.n_threads = cfg.threads;
  RateTable table = run_convergence_study(mc, cfg.study_ns, pc, opt);
  {
    std::ofstream os(dir / "rates.csv");
    table.write_csv(os);
  }
  auto os = open_report(dir, "report.txt", cfg, nullptr);
  os << "status: study complete (" << table.rows.size() << " meshes)\n";
  if (!table.orders.empty()) {
    const auto& o = table.orders.back();
    os << "final observed orders: u_l2 = " << o[0] << ", u_h1 = " << o[1] << ", w_l2 = " << o[2]
       << ", w_rot = " << o[3] << ", P_l2 = " << o[4] << "\n";
  }
  return 0;
}

int run_verify(const RunConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  InvariantSuiteOptions sopt;
  sopt.mesh_n = cfg.mesh_nx;
  sopt.nu = cfg.nu;
  sopt.alpha = cfg.alpha;
  sopt.seed = cfg.seed;
  sopt.assembly.n_threads = cfg.threads;
  sopt.assembly.quad_degree = cfg.quad_degree;
  InvariantReport rep = run_invariant_suite(sopt);
  auto os = open_report(dir, "verify.txt", cfg, nullptr);
  rep.write_text(os);
  rep.write_text(std::cout);
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    std::filesystem::create_directories(cfg.out_dir);
    switch (cfg.command) {
      case Command::Solve: return run_solve(cfg);
      case Command::StokesNonstd: return run_stokes_nonstd(cfg);
      case Command::Decompose: return run_decompose(cfg);
      case Command::Study: return run_study(cfg);
      case Command::Verify: return run_verify(cfg);
    }
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vvflow
