#include "knva/weierstrass.hpp"

#include <mpfr.h>

#include <cmath>

#include "knva/errors.hpp"

namespace knva {

Real real_pi() {
  Real pi;
  mpfr_const_pi(pi.backend().data(), MPFR_RNDN);
  return pi;
}

BigComplex cmake(const Real& re, const Real& im, unsigned digits) { return {re, im, digits}; }

BigComplex cexp(const BigComplex& z) {
  Real m = exp(z.re);
  return {Real(m * cos(z.im)), Real(m * sin(z.im)), z.digits};
}

BigComplex cinv(const BigComplex& z) {
  Real den = z.re * z.re + z.im * z.im;
  if (den == 0) throw std::domain_error("inverse of zero");
  return {Real(z.re / den), Real(-z.im / den), z.digits};
}

BigComplex cmul_real(const BigComplex& z, const Real& r) { return scale(z, r); }

namespace {

BigComplex cnum(long v, unsigned digits) { return {Real(v), Real(0), digits}; }

BigComplex times_i(const BigComplex& z) { return {Real(-z.im), z.re, z.digits}; }

Real epsilon(unsigned digits) { return pow(Real(10), -static_cast<long>(digits) - 10); }

constexpr int kMaxTerms = 200000;

// sum_{n>=1} n^k q^n / (1 - q^n)
BigComplex lambert(const BigComplex& q, int k, unsigned digits) {
  BigComplex sum = cnum(0, digits);
  BigComplex qn = q;
  Real eps = epsilon(digits);
  for (int n = 1; n < kMaxTerms; ++n) {
    BigComplex term = qn / (cnum(1, digits) - qn);
    term = scale(term, Real(pow(Real(n), k)));
    sum = sum + term;
    if (norm(term) < eps && n > 2) return sum;
    qn = qn * q;
  }
  throw Error("q-series did not converge");
}

// sum_{n>=1} n^k q^n/(1-q^n) (w^n + sign w^-n)
BigComplex trig_sum(const Lattice& L, const BigComplex& w, int k, int sign) {
  unsigned digits = L.digits;
  BigComplex sum = cnum(0, digits);
  BigComplex winv = cinv(w);
  BigComplex qn = L.q, wn = w, wm = winv;
  Real eps = epsilon(digits);
  for (int n = 1; n < kMaxTerms; ++n) {
    BigComplex c = qn / (cnum(1, digits) - qn);
    BigComplex inner = sign > 0 ? wn + wm : wn - wm;
    BigComplex term = scale(c * inner, Real(pow(Real(n), k)));
    sum = sum + term;
    if (norm(term) < eps && n > 2) return sum;
    qn = qn * L.q;
    wn = wn * w;
    wm = wm * winv;
  }
  throw Error("q-series did not converge (argument too far from the real axis)");
}

}  // namespace

Lattice make_lattice(const BigComplex& tau, unsigned digits) {
  PrecisionScope scope(digits);
  if (tau.im <= 0) throw ConfigError("modulus must satisfy Im tau > 0");
  Lattice L;
  L.digits = digits;
  L.tau = {tau.re, tau.im, digits};
  Real pi = real_pi();
  L.q = cexp(times_i(scale(L.tau, Real(2 * pi))));
  BigComplex e2 = cnum(1, digits) - scale(lambert(L.q, 1, digits), Real(24));
  BigComplex e4 = cnum(1, digits) + scale(lambert(L.q, 3, digits), Real(240));
  BigComplex e6 = cnum(1, digits) - scale(lambert(L.q, 5, digits), Real(504));
  Real pi2 = pi * pi;
  L.g2 = scale(e4, Real(4 * pi2 * pi2 / 3));
  L.g3 = scale(e6, Real(8 * pi2 * pi2 * pi2 / 27));
  L.eta1 = scale(e2, Real(pi2 / 3));
  L.eta2 = L.tau * L.eta1 - BigComplex{Real(0), Real(2 * pi), digits};
  return L;
}

BigComplex wzeta_series(const Lattice& L, const BigComplex& z) {
  PrecisionScope scope(L.digits);
  Real pi = real_pi();
  BigComplex w = cexp(times_i(scale(z, Real(2 * pi))));
  BigComplex one = cnum(1, L.digits);
  BigComplex cot = times_i((w + one) / (w - one));
  BigComplex s = trig_sum(L, w, 0, -1);
  // 4 pi sum c_n sin(2 pi n z) = -2 pi i sum c_n (w^n - w^-n)
  return L.eta1 * z + scale(cot, pi) + scale(times_i(s), Real(-2 * pi));
}

BigComplex wp_series(const Lattice& L, const BigComplex& z) {
  PrecisionScope scope(L.digits);
  Real pi = real_pi();
  BigComplex w = cexp(times_i(scale(z, Real(2 * pi))));
  BigComplex one = cnum(1, L.digits);
  BigComplex wm1 = w - one;
  BigComplex csc2 = scale(w / (wm1 * wm1), Real(-4));
  BigComplex s = trig_sum(L, w, 1, +1);
  return -L.eta1 + scale(csc2, Real(pi * pi)) - scale(s, Real(4 * pi * pi));
}

BigComplex wp_prime_series(const Lattice& L, const BigComplex& z) {
  PrecisionScope scope(L.digits);
  Real pi = real_pi();
  Real pi3 = pi * pi * pi;
  BigComplex w = cexp(times_i(scale(z, Real(2 * pi))));
  BigComplex one = cnum(1, L.digits);
  BigComplex wm1 = w - one;
  BigComplex lead = times_i(scale(w * (w + one) / (wm1 * wm1 * wm1), Real(8 * pi3)));
  BigComplex s = trig_sum(L, w, 2, -1);
  return lead - times_i(scale(s, Real(8 * pi3)));
}

void reduce(const Lattice& L, const BigComplex& z, BigComplex& z0, long& a, long& b) {
  PrecisionScope scope(L.digits);
  b = static_cast<long>(std::lround(static_cast<double>(Real(z.im / L.tau.im))));
  BigComplex z1 = z - scale(L.tau, Real(b));
  a = static_cast<long>(std::lround(static_cast<double>(z1.re)));
  z0 = z1 - cnum(a, L.digits);
}

BigComplex wp(const Lattice& L, const BigComplex& z) {
  BigComplex z0;
  long a, b;
  reduce(L, z, z0, a, b);
  return wp_series(L, z0);
}

BigComplex wp_prime(const Lattice& L, const BigComplex& z) {
  BigComplex z0;
  long a, b;
  reduce(L, z, z0, a, b);
  return wp_prime_series(L, z0);
}

BigComplex wzeta(const Lattice& L, const BigComplex& z) {
  BigComplex z0;
  long a, b;
  reduce(L, z, z0, a, b);
  PrecisionScope scope(L.digits);
  return wzeta_series(L, z0) + scale(L.eta1, Real(a)) + scale(L.eta2, Real(b));
}

std::vector<BigComplex> wp_laurent(const Lattice& L, int count) {
  PrecisionScope scope(L.digits);
  std::vector<BigComplex> c(static_cast<size_t>(std::max(count, 4)), cnum(0, L.digits));
  c[0] = cnum(1, L.digits);
  c[2] = scale(L.g2, Real(Real(1) / 20));
  c[3] = scale(L.g3, Real(Real(1) / 28));
  // Coefficient of t^{2k-4} in wp'' = 6 wp^2 - g2/2:
  // (2k-2)(2k-3) c_k = 6 sum_{i+j=k} c_i c_j, where the two c_0 c_k terms contribute 12 c_k.
  for (int k = 4; k < count; ++k) {
    BigComplex s = cnum(0, L.digits);
    for (int i = 1; i < k; ++i) s = s + c[i] * c[k - i];
    long factor = (2L * k - 2) * (2L * k - 3) - 12;
    c[k] = scale(s, Real(Real(6) / factor));
  }
  c.resize(static_cast<size_t>(count));
  return c;
}

std::vector<BigComplex> wp_taylor(const Lattice& L, const BigComplex& d, int order) {
  PrecisionScope scope(L.digits);
  std::vector<BigComplex> p(static_cast<size_t>(std::max(order + 1, 2)), cnum(0, L.digits));
  p[0] = wp(L, d);
  p[1] = wp_prime(L, d);
  BigComplex half_g2 = scale(L.g2, Real(Real(1) / 2));
  for (int k = 0; k + 2 <= order; ++k) {
    BigComplex s = cnum(0, L.digits);
    for (int i = 0; i <= k; ++i) s = s + p[i] * p[k - i];
    s = scale(s, Real(6));
    if (k == 0) s = s - half_g2;
    p[k + 2] = scale(s, Real(Real(1) / ((k + 2) * (k + 1))));
  }
  p.resize(static_cast<size_t>(order + 1));
  return p;
}

}  // namespace knva
