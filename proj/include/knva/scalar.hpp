#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <string_view>
#include <variant>

namespace knva {

using Rational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

enum class ScalarMode { exact, complex };

// Number of guard digits carried on top of the requested precision.
inline constexpr unsigned kGuardDigits = 20;

struct BigComplex {
  Real re;
  Real im;
  unsigned digits = 0;  // working precision in decimal digits
};

BigComplex operator+(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a);
BigComplex operator*(const BigComplex& a, const BigComplex& b);
BigComplex operator/(const BigComplex& a, const BigComplex& b);
BigComplex scale(const BigComplex& a, const Real& s);
Real norm(const BigComplex& a);  // |a|

// Sets the MPFR default precision for freshly created values and restores it on exit.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

class Scalar {
 public:
  Scalar() : v_(Rational(0)) {}
  Scalar(Rational r) : v_(std::move(r)) {}  // NOLINT(implicit)
  Scalar(BigComplex c) : v_(std::move(c)) {}  // NOLINT(implicit)

  static Scalar integer(long v) { return Scalar(Rational(v)); }
  static Scalar complex(const Real& re, const Real& im, unsigned digits);

  ScalarMode mode() const { return v_.index() == 0 ? ScalarMode::exact : ScalarMode::complex; }
  bool is_exact() const { return v_.index() == 0; }
  const Rational& rational() const;
  const BigComplex& big_complex() const;
  unsigned digits() const { return is_exact() ? 0 : std::get<1>(v_).digits; }

  bool is_zero() const;
  double abs() const;

  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);
  Scalar& operator*=(long k);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
  friend Scalar operator*(Scalar a, long k) { return a *= k; }
  friend Scalar operator*(long k, Scalar a) { return a *= k; }

  // Exact structural equality (same mode, identical value).
  friend bool operator==(const Scalar& a, const Scalar& b);

  std::string str() const;
  static Scalar parse(std::string_view text);

 private:
  std::variant<Rational, BigComplex> v_;
};

// |a - b|; throws on mode mismatch.
double distance(const Scalar& a, const Scalar& b);

// Describes the arithmetic of an atlas: every scalar it produces shares this kind.
struct ScalarKind {
  ScalarMode mode = ScalarMode::exact;
  unsigned digits = 0;

  Scalar zero() const { return from_int(0); }
  Scalar one() const { return from_int(1); }
  Scalar from_int(long v) const;
  Scalar from_rational(const Rational& r) const;
  bool operator==(const ScalarKind&) const = default;
};

ScalarKind kind_of(const Scalar& s);

}  // namespace knva
