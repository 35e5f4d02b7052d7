#pragma once

#include <vector>

#include "knva/scalar.hpp"

namespace knva {

// Elementary complex functions at the precision of the argument.
Real real_pi();
BigComplex cmake(const Real& re, const Real& im, unsigned digits);
BigComplex cexp(const BigComplex& z);
BigComplex cinv(const BigComplex& z);
BigComplex cmul_real(const BigComplex& z, const Real& r);

// The lattice Z + tau Z with its Weierstrass invariants and quasi-periods
// eta1 = zeta(z + 1) - zeta(z), eta2 = zeta(z + tau) - zeta(z).
struct Lattice {
  BigComplex tau;
  BigComplex q;  // exp(2 pi i tau)
  BigComplex g2, g3;
  BigComplex eta1, eta2;
  unsigned digits = 0;
};

Lattice make_lattice(const BigComplex& tau, unsigned digits);

// q-expansion evaluations; valid for |Im z| < Im tau, no lattice reduction applied.
BigComplex wp_series(const Lattice& L, const BigComplex& z);
BigComplex wp_prime_series(const Lattice& L, const BigComplex& z);
BigComplex wzeta_series(const Lattice& L, const BigComplex& z);

// Evaluations at arbitrary z via reduction to the fundamental parallelogram.
BigComplex wp(const Lattice& L, const BigComplex& z);
BigComplex wp_prime(const Lattice& L, const BigComplex& z);
BigComplex wzeta(const Lattice& L, const BigComplex& z);

// Writes z = z0 + a + b tau with z0 in the centred fundamental parallelogram.
void reduce(const Lattice& L, const BigComplex& z, BigComplex& z0, long& a, long& b);

// Coefficients c_0..c_{count-1} of wp(t) = sum_k c_k t^{2k-2} (c_0 = 1, c_1 = 0),
// from the differential equation wp'' = 6 wp^2 - g2/2.
std::vector<BigComplex> wp_laurent(const Lattice& L, int count);

// Taylor coefficients of wp(d + t) up to t^order, from wp(d), wp'(d) and the same ODE.
std::vector<BigComplex> wp_taylor(const Lattice& L, const BigComplex& d, int order);

}  // namespace knva
