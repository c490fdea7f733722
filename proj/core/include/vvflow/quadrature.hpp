// Symmetric quadrature rules on the reference tetrahedron and triangle.
// Points are barycentric; weights sum to 1 and are scaled by the physical
// cell measure at use. All rules have positive weights.
#pragma once

#include <array>
#include <vector>

namespace vvflow {

struct QuadratureRule {
  int degree;  // polynomial exactness
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;
};

struct TriQuadratureRule {
  int degree;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

// Smallest stocked rule exact at least to the requested degree.
// Stocked: 1-point (deg 1), 4-point (deg 2), 14-point (deg 5), 24-point (deg 6).
const QuadratureRule& tet_rule(int degree);

// Stocked: 1-point (deg 1), 3-point (deg 2), 6-point (deg 4), 12-point (deg 6).
const TriQuadratureRule& tri_rule(int degree);

}  // namespace vvflow
