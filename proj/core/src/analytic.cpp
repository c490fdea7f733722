#include "vvflow/analytic.hpp"

#include <cmath>
#include <random>

namespace vvflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

CellVectorField to_cell_field(const VecField& f) {
  return CellVectorField::analytic(f.value, f.jacobian);
}

double bump(double t) { return t * t * (1 - t) * (1 - t); }
double bump_d1(double t) { return ((4 * t - 6) * t + 2) * t; }
double bump_d2(double t) { return (12 * t - 12) * t + 2; }
double bump_d3(double t) { return 24 * t - 12; }

VecField stream_bump_field() {
  VecField f;
  f.value = [](const Eigen::Vector3d& p) {
    const double X = bump(p.x()), Y1 = bump_d1(p.y()), Z = bump(p.z());
    const double X1 = bump_d1(p.x()), Y = bump(p.y());
    return Eigen::Vector3d(X * Y1 * Z, -X1 * Y * Z, 0.0);
  };
  f.jacobian = [](const Eigen::Vector3d& p) {
    const double X = bump(p.x()), X1 = bump_d1(p.x()), X2 = bump_d2(p.x());
    const double Y = bump(p.y()), Y1 = bump_d1(p.y()), Y2 = bump_d2(p.y());
    const double Z = bump(p.z()), Z1 = bump_d1(p.z());
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    J(0, 0) = X1 * Y1 * Z;
    J(0, 1) = X * Y2 * Z;
    J(0, 2) = X * Y1 * Z1;
    J(1, 0) = -X2 * Y * Z;
    J(1, 1) = -X1 * Y1 * Z;
    J(1, 2) = -X1 * Y * Z1;
    return J;
  };
  return f;
}

VecField stream_bump_vorticity() {
  // rot u = (X' Y Z', X Y' Z', -(X'' Y + X Y'') Z).
  VecField f;
  f.value = [](const Eigen::Vector3d& p) {
    const double X = bump(p.x()), X1 = bump_d1(p.x()), X2 = bump_d2(p.x());
    const double Y = bump(p.y()), Y1 = bump_d1(p.y()), Y2 = bump_d2(p.y());
    const double Z = bump(p.z()), Z1 = bump_d1(p.z());
    return Eigen::Vector3d(X1 * Y * Z1, X * Y1 * Z1, -(X2 * Y + X * Y2) * Z);
  };
  f.jacobian = [](const Eigen::Vector3d& p) {
    const double X = bump(p.x()), X1 = bump_d1(p.x()), X2 = bump_d2(p.x()), X3 = bump_d3(p.x());
    const double Y = bump(p.y()), Y1 = bump_d1(p.y()), Y2 = bump_d2(p.y()), Y3 = bump_d3(p.y());
    const double Z = bump(p.z()), Z1 = bump_d1(p.z()), Z2 = bump_d2(p.z());
    Eigen::Matrix3d J;
    J(0, 0) = X2 * Y * Z1;
    J(0, 1) = X1 * Y1 * Z1;
    J(0, 2) = X1 * Y * Z2;
    J(1, 0) = X1 * Y1 * Z1;
    J(1, 1) = X * Y2 * Z1;
    J(1, 2) = X * Y1 * Z2;
    J(2, 0) = -(X3 * Y + X1 * Y2) * Z;
    J(2, 1) = -(X2 * Y1 + X * Y3) * Z;
    J(2, 2) = -(X2 * Y + X * Y2) * Z1;
    return J;
  };
  return f;
}

VectorFn stream_bump_neg_laplacian() {
  // -Delta u with u = stream_bump_field.
  return [](const Eigen::Vector3d& p) {
    const double X = bump(p.x()), X1 = bump_d1(p.x()), X2 = bump_d2(p.x()), X3 = bump_d3(p.x());
    const double Y = bump(p.y()), Y1 = bump_d1(p.y()), Y2 = bump_d2(p.y()), Y3 = bump_d3(p.y());
    const double Z = bump(p.z()), Z2 = bump_d2(p.z());
    const double lap1 = X2 * Y1 * Z + X * Y3 * Z + X * Y1 * Z2;
    const double lap2 = -(X3 * Y * Z + X1 * Y2 * Z + X1 * Y * Z2);
    return Eigen::Vector3d(-lap1, -lap2, 0.0);
  };
}

VecField tangential_zero_solenoidal() {
  VecField f;
  f.value = [](const Eigen::Vector3d& p) {
    const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
    const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
    const double sz = std::sin(kPi * p.z()), cz = std::cos(kPi * p.z());
    return Eigen::Vector3d(cx * sy * sz, sx * cy * sz, -2.0 * sx * sy * cz);
  };
  f.jacobian = [](const Eigen::Vector3d& p) {
    const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
    const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
    const double sz = std::sin(kPi * p.z()), cz = std::cos(kPi * p.z());
    Eigen::Matrix3d J;
    J(0, 0) = -kPi * sx * sy * sz;
    J(0, 1) = kPi * cx * cy * sz;
    J(0, 2) = kPi * cx * sy * cz;
    J(1, 0) = kPi * cx * cy * sz;
    J(1, 1) = -kPi * sx * sy * sz;
    J(1, 2) = kPi * sx * cy * cz;
    J(2, 0) = -2.0 * kPi * cx * sy * cz;
    J(2, 1) = -2.0 * kPi * sx * cy * cz;
    J(2, 2) = 2.0 * kPi * sx * sy * sz;
    return J;
  };
  return f;
}

VecField nonstd_velocity() {
  VecField f;
  f.value = [](const Eigen::Vector3d& p) {
    const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
    const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
    const double h = bump(p.z());
    return Eigen::Vector3d(sx * cy * h, -cx * sy * h, 0.0);
  };
  f.jacobian = [](const Eigen::Vector3d& p) {
    const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
    const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
    const double h = bump(p.z()), h1 = bump_d1(p.z());
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    J(0, 0) = kPi * cx * cy * h;
    J(0, 1) = -kPi * sx * sy * h;
    J(0, 2) = sx * cy * h1;
    J(1, 0) = kPi * sx * sy * h;
    J(1, 1) = -kPi * cx * cy * h;
    J(1, 2) = -cx * sy * h1;
    return J;
  };
  return f;
}

VectorFn nonstd_velocity_neg_laplacian() {
  return [](const Eigen::Vector3d& p) {
    const double sx = std::sin(kPi * p.x()), cx = std::cos(kPi * p.x());
    const double sy = std::sin(kPi * p.y()), cy = std::cos(kPi * p.y());
    const double h = bump(p.z()), h2 = bump_d2(p.z());
    const double factor = h2 - 2.0 * kPi * kPi * h;
    return Eigen::Vector3d(-sx * cy * factor, cx * sy * factor, 0.0);
  };
}

VecField polynomial_probe() {
  VecField f;
  f.value = [](const Eigen::Vector3d& p) {
    return Eigen::Vector3d(p.x() * (1 - p.x()) + 0.5 * p.y(), p.y() * p.z(),
                           p.x() + p.z() * p.z());
  };
  f.jacobian = [](const Eigen::Vector3d& p) {
    Eigen::Matrix3d J;
    J << 1 - 2 * p.x(), 0.5, 0, 0, p.z(), p.y(), 1, 0, 2 * p.z();
    return J;
  };
  return f;
}

VecField rigid_rotation() {
  VecField f;
  f.value = [](const Eigen::Vector3d& p) { return Eigen::Vector3d(-p.y(), p.x(), 0.0); };
  f.jacobian = [](const Eigen::Vector3d&) {
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    J(0, 1) = -1.0;
    J(1, 0) = 1.0;
    return J;
  };
  return f;
}

std::vector<VecField> make_probes(int count, std::uint64_t seed, bool solenoidal_only) {
  std::vector<VecField> basis;
  basis.push_back(stream_bump_field());
  basis.push_back(stream_bump_vorticity());
  basis.push_back(tangential_zero_solenoidal());
  basis.push_back(nonstd_velocity());
  basis.push_back(rigid_rotation());
  if (!solenoidal_only) basis.push_back(polynomial_probe());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<VecField> probes;
  probes.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::vector<double> c(basis.size());
    for (auto& ci : c) ci = coef(rng);
    VecField f;
    f.value = [basis, c](const Eigen::Vector3d& x) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (size_t i = 0; i < basis.size(); ++i) v += c[i] * basis[i].value(x);
      return v;
    };
    f.jacobian = [basis, c](const Eigen::Vector3d& x) {
      Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
      for (size_t i = 0; i < basis.size(); ++i) J += c[i] * basis[i].jacobian(x);
      return J;
    };
    probes.push_back(std::move(f));
  }
  return probes;
}

}  // namespace vvflow
