// Sparse-matrix alias (compressed-row semantics) and MatrixMarket I/O.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace vvflow {

// Row-major Eigen sparse matrix: outer index = row offsets, inner = sorted
// unique column indices per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Triplet {
  int row;
  int col;
  double value;
};

// Builds CSR from triplets, summing duplicates in a deterministic order
// (stable sort by (row, col), so contributions add in insertion order
// regardless of how the triplets were produced in parallel).
SparseMatrix build_csr(int rows, int cols, std::vector<Triplet>&& triplets);

void write_matrix_market(std::ostream& os, const SparseMatrix& A);
void write_matrix_market(const std::string& path, const SparseMatrix& A);
SparseMatrix read_matrix_market(std::istream& is);
SparseMatrix read_matrix_market_file(const std::string& path);

// max |A - A^T| entry; 0 for exactly symmetric matrices.
double symmetry_defect(const SparseMatrix& A);

}  // namespace vvflow
