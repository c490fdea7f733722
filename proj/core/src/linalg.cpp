#include "vvflow/linalg.hpp"

#include <chrono>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace vvflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

using ColMajor = Eigen::SparseMatrix<double>;

}  // namespace

BlockSystem::BlockSystem(std::vector<int> block_sizes) : sizes_(std::move(block_sizes)) {
  offsets_.resize(sizes_.size());
  int off = 0;
  for (size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] < 1) throw InvalidArgumentError("BlockSystem: block sizes must be positive");
    offsets_[i] = off;
    off += sizes_[i];
  }
  total_ = off;
  rhs_ = Eigen::VectorXd::Zero(total_);
}

BlockSystem& BlockSystem::set_block(int bi, int bj, const SparseMatrix& A, double scale,
                                    bool transpose) {
  SparseMatrix B = transpose ? SparseMatrix(A.transpose()) : A;
  if (scale != 1.0) B *= scale;
  if (B.rows() != sizes_[bi] || B.cols() != sizes_[bj])
    throw InvalidArgumentError("BlockSystem::set_block: shape mismatch at block (" +
                               std::to_string(bi) + "," + std::to_string(bj) + ")");
  entries_.push_back({bi, bj, std::move(B)});
  mono_valid_ = false;
  return *this;
}

BlockSystem& BlockSystem::set_border(int bi, int bj, const Eigen::VectorXd& m, double scale) {
  if (sizes_[bj] != 1 || m.size() != sizes_[bi])
    throw InvalidArgumentError("BlockSystem::set_border: bj must be a size-1 block");
  SparseMatrix col(m.size(), 1);
  std::vector<Triplet> trip;
  for (int i = 0; i < m.size(); ++i)
    if (m[i] != 0.0) trip.push_back({i, 0, scale * m[i]});
  col = build_csr(static_cast<int>(m.size()), 1, std::move(trip));
  entries_.push_back({bi, bj, col});
  entries_.push_back({bj, bi, SparseMatrix(col.transpose())});
  mono_valid_ = false;
  return *this;
}

BlockSystem& BlockSystem::set_rhs(int bi, const Eigen::VectorXd& r) {
  if (r.size() != sizes_[bi]) throw InvalidArgumentError("BlockSystem::set_rhs: size mismatch");
  rhs_.segment(offsets_[bi], sizes_[bi]) = r;
  return *this;
}

const SparseMatrix& BlockSystem::matrix() const {
  if (!mono_valid_) {
    std::vector<Triplet> trip;
    size_t nnz = 0;
    for (const auto& e : entries_) nnz += e.A.nonZeros();
    trip.reserve(nnz);
    for (const auto& e : entries_) {
      const int r0 = offsets_[e.bi], c0 = offsets_[e.bj];
      for (int k = 0; k < e.A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(e.A, k); it; ++it)
          trip.push_back({r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()),
                          it.value()});
    }
    mono_ = build_csr(total_, total_, std::move(trip));
    mono_valid_ = true;
  }
  return mono_;
}

Eigen::VectorXd BlockSystem::block_of(const Eigen::VectorXd& x, int bi) const {
  return x.segment(offsets_[bi], sizes_[bi]);
}

const SparseMatrix* BlockSystem::diagonal_block(int bi) const {
  for (const auto& e : entries_)
    if (e.bi == bi && e.bj == bi) return &e.A;
  return nullptr;
}

std::pair<Eigen::VectorXd, SolveReport> solve_direct(const SparseMatrix& A,
                                                     const Eigen::VectorXd& b) {
  const auto t0 = Clock::now();
  if (A.rows() != A.cols()) throw InvalidArgumentError("solve_direct: matrix not square");
  // Catch structurally empty rows/columns up front with a useful message.
  {
    std::vector<char> row_used(A.rows(), 0), col_used(A.cols(), 0);
    for (int k = 0; k < A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it)
        if (it.value() != 0.0) {
          row_used[it.row()] = 1;
          col_used[it.col()] = 1;
        }
    for (int i = 0; i < A.rows(); ++i) {
      if (!row_used[i])
        throw SingularSystemError("solve_direct: row " + std::to_string(i) + " is identically zero");
      if (!col_used[i])
        throw SingularSystemError("solve_direct: column " + std::to_string(i) +
                                  " is identically zero");
    }
  }
  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
  ColMajor Ac(A);
  lu.compute(Ac);
  if (lu.info() != Eigen::Success)
    throw SingularSystemError("solve_direct: factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(b);
  SolveReport rep;
  rep.method = "sparse-lu";
  rep.iterations = 1;
  const double bn = b.norm();
  rep.rel_residual = bn > 0 ? (A * x - b).norm() / bn : (A * x).norm();
  rep.wall_seconds = seconds_since(t0);
  return {std::move(x), rep};
}

std::pair<Eigen::VectorXd, SolveReport> solve_direct(const BlockSystem& sys) {
  return solve_direct(sys.matrix(), sys.rhs());
}

namespace {

// Block-diagonal right preconditioner: ILUT on the leading (velocity) block,
// scaled diagonal of a mass matrix as the Schur-complement approximation on
// the remaining unknowns, identity on borders.
class BlockDiagPreconditioner {
 public:
  BlockDiagPreconditioner(const BlockSystem& sys, const KrylovOptions& opt) {
    const int vb = opt.velocity_block;
    begin_ = sys.offset(vb);
    size_ = sys.block_size(vb);
    n_ = sys.size();
    const SparseMatrix* Auu = sys.diagonal_block(vb);
    if (Auu && Auu->nonZeros() > 0) {
      ilut_.setDroptol(1e-4);
      ilut_.setFillfactor(20);
      ColMajor Ac(*Auu);
      ilut_.compute(Ac);
      use_ilut_ = ilut_.info() == Eigen::Success;
    }
    inv_diag_ = Eigen::VectorXd::Ones(n_);
    if (opt.schur_mass) {
      Eigen::VectorXd d = opt.schur_mass->diagonal();
      const int off = begin_ == 0 ? size_ : 0;  // schur block follows/precedes velocity
      for (int i = 0; i < d.size() && off + i < n_; ++i)
        if (d[i] != 0.0) inv_diag_[off + i] = 1.0 / (opt.schur_scale * d[i]);
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const {
    Eigen::VectorXd z = r.cwiseProduct(inv_diag_);
    if (use_ilut_) z.segment(begin_, size_) = ilut_.solve(r.segment(begin_, size_));
    return z;
  }

 private:
  int begin_ = 0, size_ = 0, n_ = 0;
  bool use_ilut_ = false;
  Eigen::IncompleteLUT<double> ilut_;
  Eigen::VectorXd inv_diag_;
};

}  // namespace

std::pair<Eigen::VectorXd, SolveReport> solve_krylov(const BlockSystem& sys, double tol,
                                                     int max_iter, const KrylovOptions& opt) {
  const auto t0 = Clock::now();
  const SparseMatrix& A = sys.matrix();
  const Eigen::VectorXd& b = sys.rhs();
  const int n = static_cast<int>(A.rows());
  const double bnorm = b.norm();
  SolveReport rep;
  rep.method = "gmres+block-ilut";

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (bnorm == 0.0) {
    rep.rel_residual = 0.0;
    rep.wall_seconds = seconds_since(t0);
    return {std::move(x), rep};
  }

  BlockDiagPreconditioner M(sys, opt);
  const int restart = std::max(2, opt.restart);
  int total_iters = 0;

  Eigen::VectorXd best_x = x;
  double best_res = 1e300;

  while (total_iters < max_iter) {
    Eigen::VectorXd r = b - A * x;
    double beta = r.norm();
    if (beta / bnorm <= tol) break;

    // Right-preconditioned GMRES(restart): minimize ||b - A M^{-1} y||.
    const int m = std::min(restart, max_iter - total_iters);
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m, 0.0), sn(m, 0.0);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g[0] = beta;
    int k = 0;
    bool breakdown = false;
    for (; k < m; ++k) {
      Eigen::VectorXd zk = M.apply(V.col(k));
      Eigen::VectorXd w = A * zk;
      for (int i = 0; i <= k; ++i) {
        H(i, k) = w.dot(V.col(i));
        w -= H(i, k) * V.col(i);
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) < 1e-300) {
        breakdown = true;
      } else {
        V.col(k + 1) = w / H(k + 1, k);
      }
      // Apply stored Givens rotations, then create a new one.
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = denom == 0 ? 1.0 : H(k, k) / denom;
      sn[k] = denom == 0 ? 0.0 : H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++total_iters;
      if (std::abs(g[k + 1]) / bnorm <= tol || breakdown) {
        ++k;
        break;
      }
    }
    // Solve the small triangular system and update x.
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = H(i, i) != 0.0 ? s / H(i, i) : 0.0;
    }
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < k; ++j) dz += y[j] * V.col(j);
    x += M.apply(dz);

    const double res = (b - A * x).norm() / bnorm;
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (breakdown) break;
  }

  rep.iterations = total_iters;
  rep.rel_residual = (b - A * x).norm() / bnorm;
  rep.wall_seconds = seconds_since(t0);
  if (rep.rel_residual > tol) {
    if (best_res < rep.rel_residual) {
      x = best_x;
      rep.rel_residual = best_res;
    }
    if (rep.rel_residual > tol)
      throw MaxIterationsError("solve_krylov: no convergence to " + std::to_string(tol) + " in " +
                                   std::to_string(max_iter) + " iterations",
                               std::move(x), rep);
  }
  return {std::move(x), rep};
}

}  // namespace vvflow
