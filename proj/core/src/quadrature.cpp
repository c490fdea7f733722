#include "vvflow/quadrature.hpp"

#include "vvflow/errors.hpp"

namespace vvflow {

namespace {

void add_s4(QuadratureRule& r, double w) { r.points.push_back({0.25, 0.25, 0.25, 0.25}); r.weights.push_back(w); }

// Orbit (a,b,b,b) and permutations, 4 points.
void add_s31(QuadratureRule& r, double b, double w) {
  const double a = 1.0 - 3.0 * b;
  for (int i = 0; i < 4; ++i) {
    std::array<double, 4> p = {b, b, b, b};
    p[i] = a;
    r.points.push_back(p);
    r.weights.push_back(w);
  }
}

// Orbit (c,c,d,d) and permutations, 6 points.
void add_s22(QuadratureRule& r, double c, double w) {
  const double d = 0.5 - c;
  const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (auto& pr : pairs) {
    std::array<double, 4> p = {d, d, d, d};
    p[pr[0]] = c;
    p[pr[1]] = c;
    r.points.push_back(p);
    r.weights.push_back(w);
  }
}

// Orbit (c,c,d,e) with e = 1-2c-d, all 12 permutations.
void add_s211(QuadratureRule& r, double c, double d, double w) {
  const double e = 1.0 - 2.0 * c - d;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      for (int k = j + 1; k < 4; ++k) {
        if (k == i) continue;
        // i holds d; the remaining slot holds e; {j,k} hold c.
        int l = 6 - i - j - k;
        std::array<double, 4> p{};
        p[i] = d;
        p[j] = c;
        p[k] = c;
        p[l] = e;
        r.points.push_back(p);
        r.weights.push_back(w);
      }
    }
}

QuadratureRule make_tet_1() {
  QuadratureRule r;
  r.degree = 1;
  add_s4(r, 1.0);
  return r;
}

QuadratureRule make_tet_2() {
  QuadratureRule r;
  r.degree = 2;
  add_s31(r, 0.1381966011250105, 0.25);  // b = (5 - sqrt(5))/20
  return r;
}

// Classical positive 14-point rule, exact to degree 5.
QuadratureRule make_tet_5() {
  QuadratureRule r;
  r.degree = 5;
  add_s31(r, 0.3108859192633005, 0.1126879257180162);
  add_s31(r, 0.0927352503108912, 0.0734930431163619);
  add_s22(r, 0.0455037041256497, 0.0425460207770812);
  return r;
}

// Keast 24-point rule, exact to degree 6, positive weights.
QuadratureRule make_tet_6() {
  QuadratureRule r;
  r.degree = 6;
  add_s31(r, 0.2146028712591517, 0.0399227502581679);
  add_s31(r, 0.0406739585346113, 0.0100772110553207);
  add_s31(r, 0.3223378901422757, 0.0553571815436544);
  add_s211(r, 0.0636610018750175, 0.6030056647916491, 27.0 / 560.0);
  return r;
}

void tri_orbit1(TriQuadratureRule& r, double w) { r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3}); r.weights.push_back(w); }

void tri_orbit3(TriQuadratureRule& r, double a, double w) {
  const double b = (1.0 - a) / 2.0;
  for (int i = 0; i < 3; ++i) {
    std::array<double, 3> p = {b, b, b};
    p[i] = a;
    r.points.push_back(p);
    r.weights.push_back(w);
  }
}

void tri_orbit6(TriQuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (auto& pm : perms) {
    std::array<double, 3> p{};
    p[pm[0]] = a;
    p[pm[1]] = b;
    p[pm[2]] = c;
    r.points.push_back(p);
    r.weights.push_back(w);
  }
}

TriQuadratureRule make_tri_1() {
  TriQuadratureRule r;
  r.degree = 1;
  tri_orbit1(r, 1.0);
  return r;
}

TriQuadratureRule make_tri_2() {
  TriQuadratureRule r;
  r.degree = 2;
  tri_orbit3(r, 2.0 / 3.0, 1.0 / 3.0);
  return r;
}

TriQuadratureRule make_tri_4() {
  TriQuadratureRule r;
  r.degree = 4;
  tri_orbit3(r, 0.816847572980459, 0.109951743655322);
  tri_orbit3(r, 0.108103018168070, 0.223381589678011);
  return r;
}

TriQuadratureRule make_tri_6() {
  TriQuadratureRule r;
  r.degree = 6;
  tri_orbit3(r, 0.873821971016996, 0.050844906370207);
  tri_orbit3(r, 0.501426509658179, 0.116786275726379);
  tri_orbit6(r, 0.636502499121399, 0.310352451033785, 0.082851075618374);
  return r;
}

}  // namespace

const QuadratureRule& tet_rule(int degree) {
  static const QuadratureRule r1 = make_tet_1();
  static const QuadratureRule r2 = make_tet_2();
  static const QuadratureRule r5 = make_tet_5();
  static const QuadratureRule r6 = make_tet_6();
  if (degree <= 1) return r1;
  if (degree <= 2) return r2;
  if (degree <= 5) return r5;
  if (degree <= 6) return r6;
  throw InvalidArgumentError("tet_rule: no stocked rule of degree " + std::to_string(degree));
}

const TriQuadratureRule& tri_rule(int degree) {
  static const TriQuadratureRule r1 = make_tri_1();
  static const TriQuadratureRule r2 = make_tri_2();
  static const TriQuadratureRule r4 = make_tri_4();
  static const TriQuadratureRule r6 = make_tri_6();
  if (degree <= 1) return r1;
  if (degree <= 2) return r2;
  if (degree <= 4) return r4;
  if (degree <= 6) return r6;
  throw InvalidArgumentError("tri_rule: no stocked rule of degree " + std::to_string(degree));
}

}  // namespace vvflow
