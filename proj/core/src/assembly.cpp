#include "vvflow/assembly.hpp"

#include <thread>

#include "vvflow/errors.hpp"
#include "vvflow/quadrature.hpp"

namespace vvflow {

namespace {

struct RefBasis {
  int npc = 0;
  int nq = 0;
  std::vector<Eigen::Vector4d> lam;
  std::vector<double> wq;
  std::vector<std::array<double, 10>> N;                         // [q][i]
  std::vector<std::array<std::array<double, 4>, 10>> dNdl;      // [q][i][k]
};

RefBasis make_ref_basis(int nodes_per_cell, const QuadratureRule& rule) {
  RefBasis b;
  b.npc = nodes_per_cell;
  b.nq = static_cast<int>(rule.points.size());
  b.lam.resize(b.nq);
  b.wq = rule.weights;
  b.N.resize(b.nq);
  b.dNdl.resize(b.nq);
  for (int q = 0; q < b.nq; ++q) {
    Eigen::Vector4d lam(rule.points[q][0], rule.points[q][1], rule.points[q][2],
                        rule.points[q][3]);
    b.lam[q] = lam;
    double vals[10];
    if (nodes_per_cell == 4) {
      shape::p1_values(lam, vals);
      for (int i = 0; i < 4; ++i) {
        b.N[q][i] = vals[i];
        for (int k = 0; k < 4; ++k) b.dNdl[q][i][k] = (i == k) ? 1.0 : 0.0;
      }
    } else {
      shape::p2_values(lam, vals);
      double d[10][4];
      shape::p2_bary_derivs(lam, d);
      for (int i = 0; i < 10; ++i) {
        b.N[q][i] = vals[i];
        for (int k = 0; k < 4; ++k) b.dNdl[q][i][k] = d[i][k];
      }
    }
  }
  return b;
}

void physical_gradients(const RefBasis& b, int q, const CellGeometry& g,
                        Eigen::Vector3d grad[10]) {
  for (int i = 0; i < b.npc; ++i) {
    Eigen::Vector3d gi = Eigen::Vector3d::Zero();
    for (int k = 0; k < 4; ++k) gi += b.dNdl[q][i][k] * g.grad_lambda[k];
    grad[i] = gi;
  }
}

Eigen::Vector3d physical_point(const Mesh& m, int cell, const Eigen::Vector4d& lam) {
  const auto& v = m.cell(cell);
  return lam[0] * m.vertex(v[0]) + lam[1] * m.vertex(v[1]) + lam[2] * m.vertex(v[2]) +
         lam[3] * m.vertex(v[3]);
}

// Runs kernel(cell, buffer) over all cells, cell-parallel with contiguous
// ascending ranges, and returns the buffers concatenated in rank order.
std::vector<Triplet> run_cell_loop(int n_cells, int n_threads,
                                   const std::function<void(int, std::vector<Triplet>&)>& kernel) {
  n_threads = std::max(1, n_threads);
  if (n_threads == 1) {
    std::vector<Triplet> buf;
    for (int c = 0; c < n_cells; ++c) kernel(c, buf);
    return buf;
  }
  std::vector<std::vector<Triplet>> bufs(n_threads);
  std::vector<std::thread> workers;
  const int chunk = (n_cells + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int begin = t * chunk, end = std::min(n_cells, begin + chunk);
    workers.emplace_back([&, t, begin, end] {
      for (int c = begin; c < end; ++c) kernel(c, bufs[t]);
    });
  }
  for (auto& w : workers) w.join();
  std::vector<Triplet> all;
  size_t total = 0;
  for (auto& b : bufs) total += b.size();
  all.reserve(total);
  for (auto& b : bufs) all.insert(all.end(), b.begin(), b.end());
  return all;
}

Eigen::VectorXd reduce_vector_triplets(int size, std::vector<Triplet>&& trip) {
  std::stable_sort(trip.begin(), trip.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row < b.row; });
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  for (const auto& t : trip) v[t.row] += t.value;
  return v;
}

void require_vector_space(const FeSpace& s, const char* who) {
  if (!s.is_vector()) throw InvalidArgumentError(std::string(who) + ": needs a vector space");
}

void require_scalar_space(const FeSpace& s, const char* who) {
  if (s.is_vector()) throw InvalidArgumentError(std::string(who) + ": needs a scalar space");
}

}  // namespace

// ---------------------------------------------------------------------------
// CellVectorField / CellScalarField

CellVectorField CellVectorField::zero() {
  CellVectorField f;
  f.zero_ = true;
  f.value_ = [](const CellPoint&, const CellGeometry&) { return Eigen::Vector3d::Zero(); };
  f.jac_ = [](const CellPoint&, const CellGeometry&) { return Eigen::Matrix3d::Zero(); };
  return f;
}

CellVectorField CellVectorField::analytic(VectorFn fn) {
  CellVectorField f;
  f.value_ = [fn = std::move(fn)](const CellPoint& p, const CellGeometry&) { return fn(p.x); };
  return f;
}

CellVectorField CellVectorField::analytic(VectorFn fn,
                                          std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> jac) {
  CellVectorField f;
  f.value_ = [fn = std::move(fn)](const CellPoint& p, const CellGeometry&) { return fn(p.x); };
  f.jac_ = [jac = std::move(jac)](const CellPoint& p, const CellGeometry&) { return jac(p.x); };
  return f;
}

CellVectorField CellVectorField::compose(
    std::function<Eigen::Vector3d(const CellPoint&, const CellGeometry&)> f) {
  CellVectorField out;
  out.value_ = std::move(f);
  return out;
}

CellVectorField CellVectorField::from_field(const Field& fld) {
  CellVectorField f;
  if (!fld.space->is_vector())
    throw InvalidArgumentError("CellVectorField::from_field: scalar field");
  f.zero_ = fld.is_zero();
  Field copy = fld;
  f.value_ = [copy](const CellPoint& p, const CellGeometry&) {
    return evaluate_vector_on_cell(copy, p.cell, p.lam);
  };
  f.jac_ = [copy](const CellPoint& p, const CellGeometry& g) {
    return vector_field_jacobian(copy, p, g);
  };
  return f;
}

Eigen::Vector3d CellVectorField::value(const CellPoint& p, const CellGeometry& g) const {
  return value_(p, g);
}

Eigen::Matrix3d CellVectorField::jacobian(const CellPoint& p, const CellGeometry& g) const {
  if (!jac_) throw InvalidArgumentError("CellVectorField: Jacobian not available");
  return jac_(p, g);
}

bool CellVectorField::has_jacobian() const { return static_cast<bool>(jac_); }

CellScalarField CellScalarField::analytic(ScalarFn fn) {
  CellScalarField f;
  f.value_ = [fn = std::move(fn)](const CellPoint& p) { return fn(p.x); };
  return f;
}

CellScalarField CellScalarField::from_field(const Field& fld) {
  if (fld.space->is_vector())
    throw InvalidArgumentError("CellScalarField::from_field: vector field");
  CellScalarField f;
  Field copy = fld;
  f.value_ = [copy](const CellPoint& p) { return evaluate_scalar_on_cell(copy, p.cell, p.lam); };
  return f;
}

Eigen::Vector3d scalar_field_gradient(const Field& f, const CellPoint& p, const CellGeometry& g) {
  const FeSpace& s = *f.space;
  const int npc = s.nodes_per_cell();
  double coeff[10];
  for (int i = 0; i < npc; ++i) {
    int dof = s.dof_index(s.cell_node(p.cell, i), 0);
    coeff[i] = dof >= 0 ? f.coeffs[dof] : 0.0;
  }
  // Deflate by the first coefficient: the basis is a partition of unity
  // (sum of gradients is zero), so this is algebraically the same gradient
  // but exactly zero for constant coefficient vectors.
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  if (npc == 4) {
    for (int i = 1; i < 4; ++i) grad += (coeff[i] - coeff[0]) * g.grad_lambda[i];
  } else {
    double d[10][4];
    shape::p2_bary_derivs(p.lam, d);
    for (int i = 1; i < 10; ++i) {
      const double ci = coeff[i] - coeff[0];
      if (ci == 0.0) continue;
      for (int k = 0; k < 4; ++k) grad += ci * d[i][k] * g.grad_lambda[k];
    }
  }
  return grad;
}

Eigen::Matrix3d vector_field_jacobian(const Field& f, const CellPoint& p, const CellGeometry& g) {
  const FeSpace& s = *f.space;
  double d[10][4];
  shape::p2_bary_derivs(p.lam, d);
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 10; ++i) {
    Eigen::Vector3d gi = Eigen::Vector3d::Zero();
    for (int k = 0; k < 4; ++k) gi += d[i][k] * g.grad_lambda[k];
    const int node = s.cell_node(p.cell, i);
    for (int r = 0; r < 3; ++r) {
      int dof = s.dof_index(node, r);
      if (dof >= 0) J.row(r) += f.coeffs[dof] * gi.transpose();
    }
  }
  return J;
}

// ---------------------------------------------------------------------------
// Matrix assemblies

namespace {

// Shared scaffold: loops cells/quadrature and calls emit(i, j, value-factor)
// for scalar basis pairs, where the emitter decides the component pattern.
template <class CellQpKernel>
SparseMatrix assemble_generic(const FeSpace& trial, const FeSpace& test,
                              const AssemblyOptions& opt, CellQpKernel&& kernel) {
  const Mesh& m = trial.mesh();
  const auto& rule = tet_rule(opt.quad_degree);
  const RefBasis btrial = make_ref_basis(trial.nodes_per_cell(), rule);
  const RefBasis btest = make_ref_basis(test.nodes_per_cell(), rule);
  auto loop = [&](int c, std::vector<Triplet>& buf) {
    const CellGeometry g = cell_geometry(m, c);
    kernel(c, g, btrial, btest, buf);
  };
  auto trip = run_cell_loop(m.n_cells(), opt.n_threads, loop);
  return build_csr(test.n_dofs(), trial.n_dofs(), std::move(trip));
}

}  // namespace

SparseMatrix assemble_mass(const FeSpace& s, const AssemblyOptions& opt) {
  const int dim = s.value_dim();
  return assemble_generic(s, s, opt, [&](int c, const CellGeometry& g, const RefBasis& b,
                                         const RefBasis&, std::vector<Triplet>& buf) {
    const int npc = b.npc;
    double local[10][10] = {};
    for (int q = 0; q < b.nq; ++q) {
      const double wq = b.wq[q] * g.volume;
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j) local[i][j] += wq * b.N[q][i] * b.N[q][j];
    }
    for (int i = 0; i < npc; ++i) {
      const int ni = s.cell_node(c, i);
      for (int j = 0; j < npc; ++j) {
        const int nj = s.cell_node(c, j);
        for (int d = 0; d < dim; ++d) {
          const int r = s.dof_index(ni, d), col = s.dof_index(nj, d);
          if (r >= 0 && col >= 0) buf.push_back({r, col, local[i][j]});
        }
      }
    }
  });
}

SparseMatrix assemble_gradgrad(const FeSpace& s, const AssemblyOptions& opt) {
  const int dim = s.value_dim();
  return assemble_generic(s, s, opt, [&](int c, const CellGeometry& g, const RefBasis& b,
                                         const RefBasis&, std::vector<Triplet>& buf) {
    const int npc = b.npc;
    double local[10][10] = {};
    Eigen::Vector3d grad[10];
    for (int q = 0; q < b.nq; ++q) {
      physical_gradients(b, q, g, grad);
      const double wq = b.wq[q] * g.volume;
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j) local[i][j] += wq * grad[i].dot(grad[j]);
    }
    for (int i = 0; i < npc; ++i) {
      const int ni = s.cell_node(c, i);
      for (int j = 0; j < npc; ++j) {
        const int nj = s.cell_node(c, j);
        for (int d = 0; d < dim; ++d) {
          const int r = s.dof_index(ni, d), col = s.dof_index(nj, d);
          if (r >= 0 && col >= 0) buf.push_back({r, col, local[i][j]});
        }
      }
    }
  });
}

SparseMatrix assemble_rotrot(const FeSpace& s, const AssemblyOptions& opt) {
  require_vector_space(s, "assemble_rotrot");
  return assemble_generic(s, s, opt, [&](int c, const CellGeometry& g, const RefBasis& b,
                                         const RefBasis&, std::vector<Triplet>& buf) {
    const int npc = b.npc;
    Eigen::Vector3d grad[10];
    // rot(N_i e_c) = grad N_i x e_c.
    double local[30][30] = {};
    for (int q = 0; q < b.nq; ++q) {
      physical_gradients(b, q, g, grad);
      const double wq = b.wq[q] * g.volume;
      Eigen::Vector3d rot[30];
      for (int i = 0; i < npc; ++i)
        for (int d = 0; d < 3; ++d)
          rot[3 * i + d] = grad[i].cross(Eigen::Vector3d::Unit(d));
      for (int a = 0; a < 3 * npc; ++a)
        for (int bidx = 0; bidx < 3 * npc; ++bidx)
          local[a][bidx] += wq * rot[a].dot(rot[bidx]);
    }
    for (int i = 0; i < npc; ++i)
      for (int di = 0; di < 3; ++di) {
        const int r = s.dof_index(s.cell_node(c, i), di);
        if (r < 0) continue;
        for (int j = 0; j < npc; ++j)
          for (int dj = 0; dj < 3; ++dj) {
            const int col = s.dof_index(s.cell_node(c, j), dj);
            if (col >= 0) buf.push_back({r, col, local[3 * i + di][3 * j + dj]});
          }
      }
  });
}

SparseMatrix assemble_divdiv(const FeSpace& s, const AssemblyOptions& opt) {
  require_vector_space(s, "assemble_divdiv");
  return assemble_generic(s, s, opt, [&](int c, const CellGeometry& g, const RefBasis& b,
                                         const RefBasis&, std::vector<Triplet>& buf) {
    const int npc = b.npc;
    Eigen::Vector3d grad[10];
    double local[30][30] = {};
    for (int q = 0; q < b.nq; ++q) {
      physical_gradients(b, q, g, grad);
      const double wq = b.wq[q] * g.volume;
      for (int i = 0; i < npc; ++i)
        for (int di = 0; di < 3; ++di)
          for (int j = 0; j < npc; ++j)
            for (int dj = 0; dj < 3; ++dj)
              local[3 * i + di][3 * j + dj] += wq * grad[i][di] * grad[j][dj];
    }
    for (int i = 0; i < npc; ++i)
      for (int di = 0; di < 3; ++di) {
        const int r = s.dof_index(s.cell_node(c, i), di);
        if (r < 0) continue;
        for (int j = 0; j < npc; ++j)
          for (int dj = 0; dj < 3; ++dj) {
            const int col = s.dof_index(s.cell_node(c, j), dj);
            if (col >= 0) buf.push_back({r, col, local[3 * i + di][3 * j + dj]});
          }
      }
  });
}

SparseMatrix assemble_div_pressure(const FeSpace& v_space, const FeSpace& q_space,
                                   const AssemblyOptions& opt) {
  require_vector_space(v_space, "assemble_div_pressure");
  require_scalar_space(q_space, "assemble_div_pressure");
  return assemble_generic(v_space, q_space, opt, [&](int c, const CellGeometry& g,
                                                     const RefBasis& bv, const RefBasis& bq,
                                                     std::vector<Triplet>& buf) {
    Eigen::Vector3d grad[10];
    double local[10][30] = {};  // [q_i][v_j]
    for (int q = 0; q < bv.nq; ++q) {
      physical_gradients(bv, q, g, grad);
      const double wq = bv.wq[q] * g.volume;
      for (int i = 0; i < bq.npc; ++i) {
        const double qi = wq * bq.N[q][i];
        for (int j = 0; j < bv.npc; ++j)
          for (int dj = 0; dj < 3; ++dj) local[i][3 * j + dj] += qi * grad[j][dj];
      }
    }
    for (int i = 0; i < bq.npc; ++i) {
      const int r = q_space.dof_index(q_space.cell_node(c, i), 0);
      if (r < 0) continue;
      for (int j = 0; j < bv.npc; ++j)
        for (int dj = 0; dj < 3; ++dj) {
          const int col = v_space.dof_index(v_space.cell_node(c, j), dj);
          if (col >= 0) buf.push_back({r, col, local[i][3 * j + dj]});
        }
    }
  });
}

SparseMatrix assemble_grad_coupling(const FeSpace& vec_space, const FeSpace& scalar_space,
                                    const AssemblyOptions& opt) {
  require_vector_space(vec_space, "assemble_grad_coupling");
  require_scalar_space(scalar_space, "assemble_grad_coupling");
  return assemble_generic(scalar_space, vec_space, opt, [&](int c, const CellGeometry& g,
                                                            const RefBasis& bq, const RefBasis& bv,
                                                            std::vector<Triplet>& buf) {
    Eigen::Vector3d gradq[10];
    double local[30][10] = {};  // [psi_i][q_j]
    for (int q = 0; q < bq.nq; ++q) {
      physical_gradients(bq, q, g, gradq);
      const double wq = bq.wq[q] * g.volume;
      for (int i = 0; i < bv.npc; ++i) {
        const double Ni = wq * bv.N[q][i];
        for (int di = 0; di < 3; ++di)
          for (int j = 0; j < bq.npc; ++j) local[3 * i + di][j] += Ni * gradq[j][di];
      }
    }
    for (int i = 0; i < bv.npc; ++i)
      for (int di = 0; di < 3; ++di) {
        const int r = vec_space.dof_index(vec_space.cell_node(c, i), di);
        if (r < 0) continue;
        for (int j = 0; j < bq.npc; ++j) {
          const int col = scalar_space.dof_index(scalar_space.cell_node(c, j), 0);
          if (col >= 0) buf.push_back({r, col, local[3 * i + di][j]});
        }
      }
  });
}

SparseMatrix assemble_cross(const CellVectorField& w, const FeSpace& trial, const FeSpace& test,
                            const AssemblyOptions& opt) {
  require_vector_space(trial, "assemble_cross");
  require_vector_space(test, "assemble_cross");
  if (w.is_zero()) return SparseMatrix(test.n_dofs(), trial.n_dofs());
  return assemble_generic(trial, test, opt, [&](int c, const CellGeometry& g, const RefBasis& bt,
                                                const RefBasis& bs, std::vector<Triplet>& buf) {
    // (w x e_cj) . e_ci = Wx(ci, cj), the hat-map of w.
    double local[30][30] = {};
    for (int q = 0; q < bt.nq; ++q) {
      CellPoint p{c, bt.lam[q], physical_point(trial.mesh(), c, bt.lam[q])};
      const Eigen::Vector3d wv = w.value(p, g);
      Eigen::Matrix3d Wx;
      Wx << 0, -wv.z(), wv.y(), wv.z(), 0, -wv.x(), -wv.y(), wv.x(), 0;
      const double wq = bt.wq[q] * g.volume;
      for (int i = 0; i < bs.npc; ++i)
        for (int j = 0; j < bt.npc; ++j) {
          const double nn = wq * bs.N[q][i] * bt.N[q][j];
          for (int ci = 0; ci < 3; ++ci)
            for (int cj = 0; cj < 3; ++cj) {
              if (ci == cj) continue;
              local[3 * i + ci][3 * j + cj] += nn * Wx(ci, cj);
            }
        }
    }
    for (int i = 0; i < bs.npc; ++i)
      for (int ci = 0; ci < 3; ++ci) {
        const int r = test.dof_index(test.cell_node(c, i), ci);
        if (r < 0) continue;
        for (int j = 0; j < bt.npc; ++j)
          for (int cj = 0; cj < 3; ++cj) {
            if (ci == cj) continue;
            const int col = trial.dof_index(trial.cell_node(c, j), cj);
            if (col >= 0) buf.push_back({r, col, local[3 * i + ci][3 * j + cj]});
          }
      }
  });
}

SparseMatrix assemble_convection(const CellVectorField& a, ConvectionMode mode,
                                 const FeSpace& trial, const FeSpace& test,
                                 const AssemblyOptions& opt) {
  require_vector_space(trial, "assemble_convection");
  require_vector_space(test, "assemble_convection");
  if (a.is_zero()) return SparseMatrix(test.n_dofs(), trial.n_dofs());
  if (mode == ConvectionMode::FrozenMiddle && !a.has_jacobian())
    throw InvalidArgumentError("assemble_convection: FrozenMiddle needs the Jacobian of a");
  return assemble_generic(trial, test, opt, [&](int c, const CellGeometry& g, const RefBasis& bt,
                                                const RefBasis& bs, std::vector<Triplet>& buf) {
    Eigen::Vector3d grad[10];
    double diag_local[10][10] = {};   // AdvectedTrial: component-diagonal
    double full_local[30][30] = {};   // FrozenMiddle
    for (int q = 0; q < bt.nq; ++q) {
      CellPoint p{c, bt.lam[q], physical_point(trial.mesh(), c, bt.lam[q])};
      const double wq = bt.wq[q] * g.volume;
      if (mode == ConvectionMode::AdvectedTrial) {
        physical_gradients(bt, q, g, grad);
        const Eigen::Vector3d av = a.value(p, g);
        for (int i = 0; i < bs.npc; ++i)
          for (int j = 0; j < bt.npc; ++j)
            diag_local[i][j] += wq * bs.N[q][i] * av.dot(grad[j]);
      } else {
        const Eigen::Matrix3d Ja = a.jacobian(p, g);
        for (int i = 0; i < bs.npc; ++i)
          for (int j = 0; j < bt.npc; ++j) {
            const double nn = wq * bs.N[q][i] * bt.N[q][j];
            for (int ci = 0; ci < 3; ++ci)
              for (int cj = 0; cj < 3; ++cj)
                full_local[3 * i + ci][3 * j + cj] += nn * Ja(ci, cj);
          }
      }
    }
    for (int i = 0; i < bs.npc; ++i)
      for (int ci = 0; ci < 3; ++ci) {
        const int r = test.dof_index(test.cell_node(c, i), ci);
        if (r < 0) continue;
        for (int j = 0; j < bt.npc; ++j)
          for (int cj = 0; cj < 3; ++cj) {
            const int col = trial.dof_index(trial.cell_node(c, j), cj);
            if (col < 0) continue;
            const double v = mode == ConvectionMode::AdvectedTrial
                                 ? (ci == cj ? diag_local[i][j] : 0.0)
                                 : full_local[3 * i + ci][3 * j + cj];
            if (v != 0.0 || ci == cj) buf.push_back({r, col, v});
          }
      }
  });
}

SparseMatrix assemble_a_cross_rot(const CellVectorField& a, const FeSpace& trial,
                                  const FeSpace& test, const AssemblyOptions& opt) {
  require_vector_space(trial, "assemble_a_cross_rot");
  require_vector_space(test, "assemble_a_cross_rot");
  if (a.is_zero()) return SparseMatrix(test.n_dofs(), trial.n_dofs());
  return assemble_generic(trial, test, opt, [&](int c, const CellGeometry& g, const RefBasis& bt,
                                                const RefBasis& bs, std::vector<Triplet>& buf) {
    Eigen::Vector3d grad[10];
    double local[30][30] = {};
    for (int q = 0; q < bt.nq; ++q) {
      CellPoint p{c, bt.lam[q], physical_point(trial.mesh(), c, bt.lam[q])};
      const Eigen::Vector3d av = a.value(p, g);
      physical_gradients(bt, q, g, grad);
      const double wq = bt.wq[q] * g.volume;
      for (int j = 0; j < bt.npc; ++j)
        for (int cj = 0; cj < 3; ++cj) {
          // a x rot(N_j e_cj) with rot(N_j e_cj) = grad N_j x e_cj.
          const Eigen::Vector3d axr = av.cross(grad[j].cross(Eigen::Vector3d::Unit(cj)));
          for (int i = 0; i < bs.npc; ++i) {
            const double Ni = wq * bs.N[q][i];
            for (int ci = 0; ci < 3; ++ci)
              local[3 * i + ci][3 * j + cj] += Ni * axr[ci];
          }
        }
    }
    for (int i = 0; i < bs.npc; ++i)
      for (int ci = 0; ci < 3; ++ci) {
        const int r = test.dof_index(test.cell_node(c, i), ci);
        if (r < 0) continue;
        for (int j = 0; j < bt.npc; ++j)
          for (int cj = 0; cj < 3; ++cj) {
            const int col = trial.dof_index(trial.cell_node(c, j), cj);
            if (col >= 0) buf.push_back({r, col, local[3 * i + ci][3 * j + cj]});
          }
      }
  });
}

Eigen::VectorXd assemble_rhs(const FeSpace& s, const CellVectorField& f,
                             const AssemblyOptions& opt) {
  require_vector_space(s, "assemble_rhs");
  if (f.is_zero()) return Eigen::VectorXd::Zero(s.n_dofs());
  const Mesh& m = s.mesh();
  const auto& rule = tet_rule(opt.quad_degree);
  const RefBasis b = make_ref_basis(s.nodes_per_cell(), rule);
  auto trip = run_cell_loop(m.n_cells(), opt.n_threads, [&](int c, std::vector<Triplet>& buf) {
    const CellGeometry g = cell_geometry(m, c);
    for (int q = 0; q < b.nq; ++q) {
      CellPoint p{c, b.lam[q], physical_point(m, c, b.lam[q])};
      const Eigen::Vector3d fv = f.value(p, g);
      const double wq = b.wq[q] * g.volume;
      for (int i = 0; i < b.npc; ++i) {
        const int node = s.cell_node(c, i);
        for (int d = 0; d < 3; ++d) {
          const int r = s.dof_index(node, d);
          if (r >= 0) buf.push_back({r, 0, wq * b.N[q][i] * fv[d]});
        }
      }
    }
  });
  return reduce_vector_triplets(s.n_dofs(), std::move(trip));
}

Eigen::VectorXd assemble_rhs(const FeSpace& s, const CellScalarField& f,
                             const AssemblyOptions& opt) {
  require_scalar_space(s, "assemble_rhs");
  const Mesh& m = s.mesh();
  const auto& rule = tet_rule(opt.quad_degree);
  const RefBasis b = make_ref_basis(s.nodes_per_cell(), rule);
  auto trip = run_cell_loop(m.n_cells(), opt.n_threads, [&](int c, std::vector<Triplet>& buf) {
    const CellGeometry g = cell_geometry(m, c);
    for (int q = 0; q < b.nq; ++q) {
      CellPoint p{c, b.lam[q], physical_point(m, c, b.lam[q])};
      const double fv = f.value(p);
      const double wq = b.wq[q] * g.volume;
      for (int i = 0; i < b.npc; ++i) {
        const int r = s.dof_index(s.cell_node(c, i), 0);
        if (r >= 0) buf.push_back({r, 0, wq * b.N[q][i] * fv});
      }
    }
  });
  return reduce_vector_triplets(s.n_dofs(), std::move(trip));
}

Eigen::VectorXd assemble_rot_rhs(const FeSpace& s, const CellVectorField& f,
                                 const AssemblyOptions& opt) {
  require_vector_space(s, "assemble_rot_rhs");
  if (f.is_zero()) return Eigen::VectorXd::Zero(s.n_dofs());
  const Mesh& m = s.mesh();
  const auto& rule = tet_rule(opt.quad_degree);
  const RefBasis b = make_ref_basis(s.nodes_per_cell(), rule);
  auto trip = run_cell_loop(m.n_cells(), opt.n_threads, [&](int c, std::vector<Triplet>& buf) {
    const CellGeometry g = cell_geometry(m, c);
    Eigen::Vector3d grad[10];
    for (int q = 0; q < b.nq; ++q) {
      CellPoint p{c, b.lam[q], physical_point(m, c, b.lam[q])};
      const Eigen::Vector3d fv = f.value(p, g);
      physical_gradients(b, q, g, grad);
      const double wq = b.wq[q] * g.volume;
      for (int i = 0; i < b.npc; ++i) {
        const int node = s.cell_node(c, i);
        for (int d = 0; d < 3; ++d) {
          const int r = s.dof_index(node, d);
          // (f, rot(N_i e_d)) = f . (grad N_i x e_d)
          if (r >= 0) buf.push_back({r, 0, wq * fv.dot(grad[i].cross(Eigen::Vector3d::Unit(d)))});
        }
      }
    }
  });
  return reduce_vector_triplets(s.n_dofs(), std::move(trip));
}

Eigen::VectorXd assemble_fbc(const Field& P, const FeSpace& w_space, FbcForm form,
                             const AssemblyOptions& opt) {
  require_vector_space(w_space, "assemble_fbc");
  if (P.space->is_vector() || P.space->is_broken())
    throw InvalidArgumentError("assemble_fbc: P must live on an H1-conforming scalar space");
  const Mesh& m = w_space.mesh();
  if (&P.space->mesh() != &m) throw InvalidArgumentError("assemble_fbc: mesh mismatch");

  if (form == FbcForm::Volume) {
    const auto& rule = tet_rule(opt.quad_degree);
    const RefBasis b = make_ref_basis(w_space.nodes_per_cell(), rule);
    auto trip = run_cell_loop(m.n_cells(), opt.n_threads, [&](int c, std::vector<Triplet>& buf) {
      const CellGeometry g = cell_geometry(m, c);
      Eigen::Vector3d grad[10];
      for (int q = 0; q < b.nq; ++q) {
        CellPoint p{c, b.lam[q], physical_point(m, c, b.lam[q])};
        const Eigen::Vector3d gp = scalar_field_gradient(P, p, g);
        physical_gradients(b, q, g, grad);
        const double wq = b.wq[q] * g.volume;
        for (int i = 0; i < b.npc; ++i) {
          const int node = w_space.cell_node(c, i);
          for (int d = 0; d < 3; ++d) {
            const int r = w_space.dof_index(node, d);
            if (r >= 0) buf.push_back({r, 0, wq * gp.dot(grad[i].cross(Eigen::Vector3d::Unit(d)))});
          }
        }
      }
    });
    return reduce_vector_triplets(w_space.n_dofs(), std::move(trip));
  }

  // Surface form over boundary facets, degree-matched triangle rule.
  if (m.boundary_facets().empty())
    throw InvalidArgumentError("assemble_fbc: mesh carries no boundary facet data");
  const auto& trule = tri_rule(std::min(opt.quad_degree, 6));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w_space.n_dofs());
  double vals[10];
  for (const auto& bf : m.boundary_facets()) {
    const auto lv = facet_local_vertices(bf.local_facet);
    const auto& cell = m.cell(bf.cell);
    const Eigen::Vector3d p0 = m.vertex(cell[lv[0]]);
    const Eigen::Vector3d e1 = m.vertex(cell[lv[1]]) - p0;
    const Eigen::Vector3d e2 = m.vertex(cell[lv[2]]) - p0;
    const double area = 0.5 * e1.cross(e2).norm();
    const CellGeometry g = cell_geometry(m, bf.cell);
    for (size_t q = 0; q < trule.points.size(); ++q) {
      Eigen::Vector4d lam = Eigen::Vector4d::Zero();
      for (int j = 0; j < 3; ++j) lam[lv[j]] = trule.points[q][j];
      CellPoint p{bf.cell, lam, physical_point(m, bf.cell, lam)};
      const Eigen::Vector3d gp = scalar_field_gradient(P, p, g);
      const Eigen::Vector3d gpxn = gp.cross(bf.normal);
      shape::p2_values(lam, vals);
      const double wq = trule.weights[q] * area;
      for (int i = 0; i < w_space.nodes_per_cell(); ++i) {
        const int node = w_space.cell_node(bf.cell, i);
        for (int d = 0; d < 3; ++d) {
          const int r = w_space.dof_index(node, d);
          if (r >= 0) out[r] += wq * gpxn[d] * vals[i];
        }
      }
    }
  }
  return out;
}

}  // namespace vvflow
