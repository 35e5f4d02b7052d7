#include "knva/scalar.hpp"

#include <algorithm>
#include <cmath>

#include "knva/errors.hpp"

namespace knva {

BigComplex operator+(const BigComplex& a, const BigComplex& b) {
  return {Real(a.re + b.re), Real(a.im + b.im), std::max(a.digits, b.digits)};
}

BigComplex operator-(const BigComplex& a, const BigComplex& b) {
  return {Real(a.re - b.re), Real(a.im - b.im), std::max(a.digits, b.digits)};
}

BigComplex operator-(const BigComplex& a) { return {Real(-a.re), Real(-a.im), a.digits}; }

BigComplex operator*(const BigComplex& a, const BigComplex& b) {
  return {Real(a.re * b.re - a.im * b.im), Real(a.re * b.im + a.im * b.re),
          std::max(a.digits, b.digits)};
}

BigComplex operator/(const BigComplex& a, const BigComplex& b) {
  Real den = b.re * b.re + b.im * b.im;
  if (den == 0) throw std::domain_error("division by zero");
  return {Real((a.re * b.re + a.im * b.im) / den), Real((a.im * b.re - a.re * b.im) / den),
          std::max(a.digits, b.digits)};
}

BigComplex scale(const BigComplex& a, const Real& s) {
  return {Real(a.re * s), Real(a.im * s), a.digits};
}

Real norm(const BigComplex& a) { return Real(sqrt(a.re * a.re + a.im * a.im)); }

PrecisionScope::PrecisionScope(unsigned digits) : saved_(Real::default_precision()) {
  Real::default_precision(digits);
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_); }

Scalar Scalar::complex(const Real& re, const Real& im, unsigned digits) {
  return Scalar(BigComplex{re, im, digits});
}

const Rational& Scalar::rational() const {
  if (!is_exact()) throw ScalarModeError("scalar is not exact");
  return std::get<0>(v_);
}

const BigComplex& Scalar::big_complex() const {
  if (is_exact()) throw ScalarModeError("scalar is not a BigComplex");
  return std::get<1>(v_);
}

bool Scalar::is_zero() const {
  if (is_exact()) return std::get<0>(v_) == 0;
  const auto& c = std::get<1>(v_);
  return c.re == 0 && c.im == 0;
}

double Scalar::abs() const {
  if (is_exact()) return std::fabs(static_cast<double>(std::get<0>(v_)));
  return static_cast<double>(norm(std::get<1>(v_)));
}

Scalar Scalar::operator-() const {
  if (is_exact()) return Scalar(Rational(-std::get<0>(v_)));
  return Scalar(-std::get<1>(v_));
}

namespace {

void require_same(const Scalar& a, const Scalar& b) {
  if (a.mode() != b.mode()) throw ScalarModeError("mixed exact/approximate arithmetic");
}

}  // namespace

Scalar& Scalar::operator+=(const Scalar& o) {
  require_same(*this, o);
  if (is_exact())
    std::get<0>(v_) += std::get<0>(o.v_);
  else
    std::get<1>(v_) = std::get<1>(v_) + std::get<1>(o.v_);
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
  require_same(*this, o);
  if (is_exact())
    std::get<0>(v_) -= std::get<0>(o.v_);
  else
    std::get<1>(v_) = std::get<1>(v_) - std::get<1>(o.v_);
  return *this;
}

Scalar& Scalar::operator*=(const Scalar& o) {
  require_same(*this, o);
  if (is_exact())
    std::get<0>(v_) *= std::get<0>(o.v_);
  else
    std::get<1>(v_) = std::get<1>(v_) * std::get<1>(o.v_);
  return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) {
  require_same(*this, o);
  if (o.is_zero()) throw std::domain_error("division by zero");
  if (is_exact())
    std::get<0>(v_) /= std::get<0>(o.v_);
  else
    std::get<1>(v_) = std::get<1>(v_) / std::get<1>(o.v_);
  return *this;
}

Scalar& Scalar::operator*=(long k) {
  if (is_exact()) {
    std::get<0>(v_) *= k;
  } else {
    auto& c = std::get<1>(v_);
    c.re *= k;
    c.im *= k;
  }
  return *this;
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.mode() != b.mode()) return false;
  if (a.is_exact()) return a.rational() == b.rational();
  const auto& x = a.big_complex();
  const auto& y = b.big_complex();
  return x.re == y.re && x.im == y.im;
}

namespace {

std::string real_str(const Real& x, unsigned digits) {
  return x.str(static_cast<std::streamsize>(digits > 1 ? digits - 1 : 1),
               std::ios_base::scientific);
}

}  // namespace

std::string Scalar::str() const {
  if (is_exact()) {
    const Rational& r = std::get<0>(v_);
    return numerator(r).str() + "/" + denominator(r).str();
  }
  const auto& c = std::get<1>(v_);
  return "(" + real_str(c.re, c.digits) + "," + real_str(c.im, c.digits) + ")@" +
         std::to_string(c.digits);
}

Scalar Scalar::parse(std::string_view text) {
  std::string s(text);
  try {
    if (!s.empty() && s.front() == '(') {
      auto close = s.find(')');
      auto comma = s.find(',');
      auto at = s.find('@', close == std::string::npos ? 0 : close);
      if (close == std::string::npos || comma == std::string::npos || comma > close ||
          at != close + 1)
        throw ParseError("malformed complex scalar '" + s + "'");
      unsigned digits = static_cast<unsigned>(std::stoul(s.substr(at + 1)));
      if (digits == 0) throw ParseError("zero precision in '" + s + "'");
      PrecisionScope scope(digits);
      Real re(s.substr(1, comma - 1));
      Real im(s.substr(comma + 1, close - comma - 1));
      return Scalar(BigComplex{re, im, digits});
    }
    auto slash = s.find('/');
    if (slash == std::string::npos) return Scalar(Rational(boost::multiprecision::mpz_int(s)));
    boost::multiprecision::mpz_int num(s.substr(0, slash));
    boost::multiprecision::mpz_int den(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + s + "'");
    return Scalar(Rational(num, den));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("cannot parse scalar '" + s + "'");
  }
}

double distance(const Scalar& a, const Scalar& b) { return (a - b).abs(); }

Scalar ScalarKind::from_int(long v) const {
  if (mode == ScalarMode::exact) return Scalar(Rational(v));
  PrecisionScope scope(digits);
  return Scalar(BigComplex{Real(v), Real(0), digits});
}

Scalar ScalarKind::from_rational(const Rational& r) const {
  if (mode == ScalarMode::exact) return Scalar(r);
  PrecisionScope scope(digits);
  Real re(numerator(r));
  re /= Real(denominator(r));
  return Scalar(BigComplex{re, Real(0), digits});
}

ScalarKind kind_of(const Scalar& s) { return {s.mode(), s.digits()}; }

}  // namespace knva
