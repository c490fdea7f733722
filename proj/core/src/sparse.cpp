#include "vvflow/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vvflow/errors.hpp"

namespace vvflow {

SparseMatrix build_csr(int rows, int cols, std::vector<Triplet>&& triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix A(rows, cols);
  std::vector<int> row_nnz(rows, 0);
  {
    size_t i = 0;
    while (i < triplets.size()) {
      size_t j = i + 1;
      while (j < triplets.size() && triplets[j].row == triplets[i].row &&
             triplets[j].col == triplets[i].col)
        ++j;
      ++row_nnz[triplets[i].row];
      i = j;
    }
  }
  A.reserve(Eigen::Map<Eigen::VectorXi>(row_nnz.data(), rows));
  size_t i = 0;
  while (i < triplets.size()) {
    double v = triplets[i].value;
    size_t j = i + 1;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      v += triplets[j].value;
      ++j;
    }
    A.insert(triplets[i].row, triplets[i].col) = v;
    i = j;
  }
  A.makeCompressed();
  return A;
}

void write_matrix_market(std::ostream& os, const SparseMatrix& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  char buf[64];
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()) + 1,
                    static_cast<int>(it.col()) + 1, it.value());
      os << buf;
    }
}

void write_matrix_market(const std::string& path, const SparseMatrix& A) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_matrix_market(os, A);
}

SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  bool header_seen = false;
  long rows = 0, cols = 0, nnz = 0;
  std::vector<Triplet> trip;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!header_seen) {
      ss >> rows >> cols >> nnz;
      if (!ss || rows <= 0 || cols <= 0) throw Error("MatrixMarket: bad size line");
      trip.reserve(static_cast<size_t>(nnz));
      header_seen = true;
    } else {
      long r, c;
      double v;
      ss >> r >> c >> v;
      if (!ss) throw Error("MatrixMarket: bad entry line");
      trip.push_back({static_cast<int>(r - 1), static_cast<int>(c - 1), v});
    }
  }
  if (!header_seen) throw Error("MatrixMarket: missing size line");
  return build_csr(static_cast<int>(rows), static_cast<int>(cols), std::move(trip));
}

SparseMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read_matrix_market(is);
}

double symmetry_defect(const SparseMatrix& A) {
  SparseMatrix D = SparseMatrix(A - SparseMatrix(A.transpose()));
  double m = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace vvflow
