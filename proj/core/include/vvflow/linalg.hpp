// Block saddle-point systems and their direct / Krylov solution.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vvflow/errors.hpp"
#include "vvflow/sparse.hpp"

namespace vvflow {

// A square system assembled from named sparse blocks on a block partition.
// Zero-mean constraints enter as size-1 border blocks (rank-1 row/column).
class BlockSystem {
 public:
  explicit BlockSystem(std::vector<int> block_sizes);

  // Places scale * A (or scale * A^T) at block (bi, bj).
  BlockSystem& set_block(int bi, int bj, const SparseMatrix& A, double scale = 1.0,
                         bool transpose = false);
  // Border column m at (bi, bj) where block bj has size 1, and its mirror.
  BlockSystem& set_border(int bi, int bj, const Eigen::VectorXd& m, double scale = 1.0);
  BlockSystem& set_rhs(int bi, const Eigen::VectorXd& r);

  int size() const { return total_; }
  int n_blocks() const { return static_cast<int>(sizes_.size()); }
  int block_size(int bi) const { return sizes_[bi]; }
  int offset(int bi) const { return offsets_[bi]; }

  const SparseMatrix& matrix() const;  // monolithic, cached
  const Eigen::VectorXd& rhs() const { return rhs_; }

  Eigen::VectorXd block_of(const Eigen::VectorXd& x, int bi) const;

  // The (bi,bi) diagonal block as stored, if set (used by preconditioners).
  const SparseMatrix* diagonal_block(int bi) const;

 private:
  struct Entry {
    int bi, bj;
    SparseMatrix A;  // already scaled/transposed
  };
  std::vector<int> sizes_, offsets_;
  int total_ = 0;
  std::vector<Entry> entries_;
  Eigen::VectorXd rhs_;
  mutable SparseMatrix mono_;
  mutable bool mono_valid_ = false;
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  // ||Ax - b|| / ||b||, recomputed from the returned iterate.
  double rel_residual = 0.0;
  double wall_seconds = 0.0;
};

// Sparse LU with fill-reducing ordering. Throws SingularSystemError naming
// an identically-zero row/column or the failing pivot.
std::pair<Eigen::VectorXd, SolveReport> solve_direct(const BlockSystem& sys);
std::pair<Eigen::VectorXd, SolveReport> solve_direct(const SparseMatrix& A,
                                                     const Eigen::VectorXd& b);

struct KrylovOptions {
  int restart = 80;
  // Block-diagonal right preconditioner: incomplete LU on this block,
  // diagonal-lumped schur_mass (scaled) on the rest when provided.
  int velocity_block = 0;
  const SparseMatrix* schur_mass = nullptr;
  double schur_scale = 1.0;
};

class MaxIterationsError : public Error {
 public:
  MaxIterationsError(const std::string& what, Eigen::VectorXd best, SolveReport report)
      : Error(what), best_iterate(std::move(best)), report(std::move(report)) {}
  Eigen::VectorXd best_iterate;
  SolveReport report;
};

// Restarted GMRES; throws MaxIterationsError (carrying the best iterate)
// when the tolerance is not met.
std::pair<Eigen::VectorXd, SolveReport> solve_krylov(const BlockSystem& sys, double tol,
                                                     int max_iter, const KrylovOptions& opt = {});

}  // namespace vvflow
