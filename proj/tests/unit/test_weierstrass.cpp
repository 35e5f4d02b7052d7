#include "doctest.h"

#include <boost/math/special_functions/gamma.hpp>

#include "knva/weierstrass.hpp"

using namespace knva;

namespace {

constexpr unsigned kDigits = 60;

BigComplex C(double re, double im) { return {Real(re), Real(im), kDigits}; }
BigComplex N(long v) { return {Real(v), Real(0), kDigits}; }
double dist(const BigComplex& a, const BigComplex& b) { return static_cast<double>(norm(a - b)); }

}  // namespace

TEST_CASE("square lattice invariants match closed forms") {
  PrecisionScope scope(kDigits);
  Lattice L = make_lattice(C(0, 1), kDigits);
  Real pi = real_pi();
  // g2(Z + iZ) = Gamma(1/4)^8 / (16 pi^2), g3 = 0, eta1 = pi.
  Real gq = boost::math::tgamma(Real(Real(1) / 4));
  Real g2 = pow(gq, 8) / (16 * pi * pi);
  CHECK(dist(L.g2, {g2, Real(0), kDigits}) < 1e-50);
  CHECK(static_cast<double>(norm(L.g3)) < 1e-50);
  CHECK(dist(L.eta1, {pi, Real(0), kDigits}) < 1e-50);
}

TEST_CASE("differential equation and addition theorem") {
  PrecisionScope scope(kDigits);
  for (auto tau : {C(0, 1), C(0.3, 1.1)}) {
    Lattice L = make_lattice(tau, kDigits);
    for (auto z : {C(0.21, 0.13), C(0.4, -0.3), C(-0.17, 0.44)}) {
      BigComplex p = wp(L, z), dp = wp_prime(L, z);
      BigComplex rhs = scale(p * p * p, Real(4)) - L.g2 * p - L.g3;
      CHECK(dist(dp * dp, rhs) < 1e-45);
    }
    BigComplex u = C(0.21, 0.13), v = C(-0.09, 0.31);
    BigComplex pu = wp(L, u), pv = wp(L, v);
    BigComplex r = (wp_prime(L, u) - wp_prime(L, v)) / (pu - pv);
    BigComplex add = scale(r * r, Real(Real(1) / 4)) - pu - pv;
    CHECK(dist(wp(L, u + v), add) < 1e-45);
  }
}

TEST_CASE("zeta quasi-periods and Legendre relation") {
  PrecisionScope scope(kDigits);
  Lattice L = make_lattice(C(0.2, 1.3), kDigits);
  BigComplex z = C(0.31, -0.45);
  // both z and z + tau lie inside the strip where the q-series converges
  CHECK(dist(wzeta_series(L, z + L.tau) - wzeta_series(L, z), L.eta2) < 1e-45);
  CHECK(dist(wzeta_series(L, z + N(1)) - wzeta_series(L, z), L.eta1) < 1e-45);
  // zeta' = -wp, by central differences
  Real h("1e-12");
  BigComplex hh{h, Real(0), kDigits};
  BigComplex deriv = scale(wzeta_series(L, z + hh) - wzeta_series(L, z - hh), Real(1 / (2 * h)));
  CHECK(dist(deriv, -wp_series(L, z)) < 1e-18);
}

TEST_CASE("Laurent coefficients agree with the classical recursion and with evaluation") {
  PrecisionScope scope(kDigits);
  Lattice L = make_lattice(C(0.1, 0.9), kDigits);
  const int count = 14;
  auto c = wp_laurent(L, count);
  // Independent recursion in the classical indexing wp = z^-2 + sum_{n>=2} a_n z^{2n-2}:
  // a_2 = g2/20, a_3 = g3/28, a_n = 3/((2n+1)(n-3)) sum_{m=2}^{n-2} a_m a_{n-m}.
  std::vector<BigComplex> a(count, N(0));
  a[2] = scale(L.g2, Real(Real(1) / 20));
  a[3] = scale(L.g3, Real(Real(1) / 28));
  for (int n = 4; n < count; ++n) {
    BigComplex s = N(0);
    for (int m = 2; m <= n - 2; ++m) s = s + a[m] * a[n - m];
    a[n] = scale(s, Real(Real(3) / ((2 * n + 1) * (n - 3))));
  }
  CHECK(dist(c[0], N(1)) == 0);
  CHECK(static_cast<double>(norm(c[1])) == 0);
  for (int n = 2; n < count; ++n) CHECK(dist(c[n], a[n]) < 1e-40 * (1 + static_cast<double>(norm(a[n]))));
  // Evaluate the truncated series at a small argument.
  BigComplex t = C(0.03, 0.02);
  BigComplex t2 = t * t, pw = cinv(t2), sum = N(0);
  for (int n = 0; n < count; ++n) {
    sum = sum + c[n] * pw;
    pw = pw * t2;
  }
  CHECK(dist(sum, wp(L, t)) < 1e-30);
}

TEST_CASE("Taylor expansion at a regular point reproduces direct evaluation") {
  PrecisionScope scope(kDigits);
  Lattice L = make_lattice(C(0, 1), kDigits);
  BigComplex d = C(0.40, 0.20);
  auto p = wp_taylor(L, d, 60);
  BigComplex h = C(0.05, -0.03), pw = N(1), sum = N(0);
  for (auto& pk : p) {
    sum = sum + pk * pw;
    pw = pw * h;
  }
  CHECK(dist(sum, wp(L, d + h)) < 1e-40);
}

TEST_CASE("lattice reduction is consistent") {
  PrecisionScope scope(kDigits);
  Lattice L = make_lattice(C(0.25, 1.2), kDigits);
  BigComplex z = C(0.37, 0.18);
  BigComplex shifted = z + scale(L.tau, Real(2)) - N(3);
  CHECK(dist(wp(L, shifted), wp(L, z)) < 1e-45);
  CHECK(dist(wzeta(L, shifted), wzeta(L, z) + scale(L.eta2, Real(2)) - scale(L.eta1, Real(3))) < 1e-45);
}
