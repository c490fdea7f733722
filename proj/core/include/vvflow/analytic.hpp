// Closed-form analytic fields: manufactured solutions and probe families.
// Derivatives are precomputed closed-form expressions (polynomials times
// trigonometrics), not runtime symbolic algebra.
#pragma once

#include <cstdint>
#include <vector>

#include "vvflow/assembly.hpp"

namespace vvflow {

using MatrixFn = std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>;

struct VecField {
  VectorFn value;
  MatrixFn jacobian;

  Eigen::Vector3d rot(const Eigen::Vector3d& x) const {
    const Eigen::Matrix3d J = jacobian(x);
    return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
  }
  double div(const Eigen::Vector3d& x) const { return jacobian(x).trace(); }
};

CellVectorField to_cell_field(const VecField& f);

// Quartic bump b(t) = t^2 (1-t)^2 and derivatives; b and b' vanish at 0, 1.
double bump(double t);
double bump_d1(double t);
double bump_d2(double t);
double bump_d3(double t);

// rot (0, 0, X(x) Y(y) Z(z)) with quartic-bump factors: divergence-free,
// vanishes with its gradient on the unit-cube boundary (lives in H^1_0).
VecField stream_bump_field();
// Its curl (the associated vorticity), tangent to the boundary.
VecField stream_bump_vorticity();
// minus the vector Laplacian of stream_bump_field (= rot of the vorticity).
VectorFn stream_bump_neg_laplacian();

// (cos px sin py sin pz, sin px cos py sin pz, -2 sin px sin py cos pz):
// divergence-free with zero tangential trace on the unit cube.
VecField tangential_zero_solenoidal();

// (sin px cos py h(z), -cos px sin py h(z), 0) with h the quartic bump:
// divergence-free, zero normal trace, and rot x n = 0 on every face.
VecField nonstd_velocity();
VectorFn nonstd_velocity_neg_laplacian();

// Smooth non-solenoidal polynomial probe.
VecField polynomial_probe();
// Rigid rotation (-y, x, 0).
VecField rigid_rotation();

// Deterministic random linear combinations of the probe families above.
// Solenoidal probes combine only divergence-free members.
std::vector<VecField> make_probes(int count, std::uint64_t seed, bool solenoidal_only);

}  // namespace vvflow
