#include "knva/laurent.hpp"

#include <algorithm>
#include <limits>

#include "knva/errors.hpp"

namespace knva {

std::string to_string(Point p) { return p == Point::plus ? "P+" : "P-"; }

Point parse_point(const std::string& s) {
  if (s == "P+") return Point::plus;
  if (s == "P-") return Point::minus;
  throw ParseError("unknown point '" + s + "'");
}

LaurentExpansion::LaurentExpansion(Point point, int weight, int lead, std::vector<Scalar> coeffs,
                                   ScalarKind kind)
    : point_(point), weight_(weight), lead_(lead), coeffs_(std::move(coeffs)), kind_(kind) {
  for (const auto& c : coeffs_)
    if (c.mode() != kind_.mode) throw ScalarModeError("coefficient mode differs from expansion");
}

LaurentExpansion LaurentExpansion::unknown(Point point, int weight, int lead, ScalarKind kind) {
  return LaurentExpansion(point, weight, lead, {}, kind);
}

LaurentExpansion LaurentExpansion::monomial(Point point, int weight, int exponent, const Scalar& c,
                                            int trunc) {
  ScalarKind kind = kind_of(c);
  if (trunc < exponent) return unknown(point, weight, exponent, kind);
  std::vector<Scalar> coeffs(static_cast<size_t>(trunc - exponent + 1), kind.zero());
  coeffs[0] = c;
  return LaurentExpansion(point, weight, exponent, std::move(coeffs), kind);
}

Scalar LaurentExpansion::coeff(int e) const {
  if (e < lead_) return kind_.zero();
  if (e > trunc())
    throw WindowError("exponent " + std::to_string(e) + " beyond faithful window (trunc " +
                      std::to_string(trunc()) + ")");
  return coeffs_[static_cast<size_t>(e - lead_)];
}

int LaurentExpansion::effective_lead(double tol) const {
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    bool nonzero = tol > 0 ? coeffs_[i].abs() > tol : !coeffs_[i].is_zero();
    if (nonzero) return lead_ + static_cast<int>(i);
  }
  return trunc() + 1;
}

LaurentExpansion LaurentExpansion::truncated(int new_trunc) const {
  if (new_trunc >= trunc()) return *this;
  std::vector<Scalar> c;
  if (new_trunc >= lead_) c.assign(coeffs_.begin(), coeffs_.begin() + (new_trunc - lead_ + 1));
  return LaurentExpansion(point_, weight_, lead_, std::move(c), kind_);
}

namespace {

void require_compatible(const LaurentExpansion& a, const LaurentExpansion& b) {
  if (a.point() != b.point()) throw PointMismatch("expansions live at different points");
  if (a.kind().mode != b.kind().mode) throw ScalarModeError("expansions differ in scalar mode");
}

ScalarKind merged_kind(const LaurentExpansion& a, const LaurentExpansion& b) {
  return {a.kind().mode, std::max(a.kind().digits, b.kind().digits)};
}

void mul_add(BigComplex& acc, const BigComplex& x, const BigComplex& y) {
  acc.re += x.re * y.re;
  acc.re -= x.im * y.im;
  acc.im += x.re * y.im;
  acc.im += x.im * y.re;
}

}  // namespace

LaurentExpansion series_mul(const LaurentExpansion& a, const LaurentExpansion& b) {
  return series_mul(a, b, std::numeric_limits<int>::max());
}

LaurentExpansion series_mul(const LaurentExpansion& a, const LaurentExpansion& b, int max_exponent) {
  require_compatible(a, b);
  ScalarKind kind = merged_kind(a, b);
  int lead = a.lead() + b.lead();
  int trunc = std::min({a.trunc() + b.lead(), b.trunc() + a.lead(), max_exponent});
  if (trunc < lead) return LaurentExpansion::unknown(a.point(), a.weight() + b.weight(), lead, kind);
  size_t len = static_cast<size_t>(trunc - lead + 1);
  const auto& ca = a.coeffs();
  const auto& cb = b.coeffs();
  std::vector<Scalar> out;
  if (kind.mode == ScalarMode::exact) {
    std::vector<Rational> acc(len);
    for (size_t i = 0; i < ca.size() && i < len; ++i) {
      const Rational& x = ca[i].rational();
      if (x == 0) continue;
      for (size_t j = 0; i + j < len && j < cb.size(); ++j) {
        const Rational& y = cb[j].rational();
        if (y == 0) continue;
        acc[i + j] += x * y;
      }
    }
    out.reserve(len);
    for (auto& r : acc) out.emplace_back(std::move(r));
  } else {
    PrecisionScope scope(kind.digits);
    std::vector<BigComplex> acc(len, BigComplex{Real(0), Real(0), kind.digits});
    for (size_t i = 0; i < ca.size() && i < len; ++i) {
      const BigComplex& x = ca[i].big_complex();
      if (x.re == 0 && x.im == 0) continue;
      for (size_t j = 0; i + j < len && j < cb.size(); ++j) mul_add(acc[i + j], x, cb[j].big_complex());
    }
    out.reserve(len);
    for (auto& c : acc) out.emplace_back(std::move(c));
  }
  return LaurentExpansion(a.point(), a.weight() + b.weight(), lead, std::move(out), kind);
}

LaurentExpansion series_add(const LaurentExpansion& a, const LaurentExpansion& b) {
  require_compatible(a, b);
  if (a.weight() != b.weight()) throw WeightError("adding expansions of different weight");
  ScalarKind kind = merged_kind(a, b);
  int lead = std::min(a.lead(), b.lead());
  int trunc = std::min(a.trunc(), b.trunc());
  std::vector<Scalar> out;
  for (int e = lead; e <= trunc; ++e) out.push_back(a.coeff(e) + b.coeff(e));
  return LaurentExpansion(a.point(), a.weight(), lead, std::move(out), kind);
}

LaurentExpansion series_scale(const LaurentExpansion& a, const Scalar& s) {
  std::vector<Scalar> out;
  out.reserve(a.coeffs().size());
  for (const auto& c : a.coeffs()) out.push_back(c * s);
  ScalarKind kind = a.kind();
  if (kind.mode != s.mode()) throw ScalarModeError("scaling by scalar of different mode");
  kind.digits = std::max(kind.digits, s.digits());
  return LaurentExpansion(a.point(), a.weight(), a.lead(), std::move(out), kind);
}

LaurentExpansion series_derivative(const LaurentExpansion& a) {
  std::vector<Scalar> out;
  int lead = a.lead() - 1;
  for (int e = a.lead(); e <= a.trunc(); ++e) out.push_back(a.coeff(e) * static_cast<long>(e));
  return LaurentExpansion(a.point(), a.weight(), lead, std::move(out), a.kind());
}

Scalar residue_at(const LaurentExpansion& a) {
  if (a.weight() != 1) throw WeightError("residue of a non-differential (weight " +
                                         std::to_string(a.weight()) + ")");
  if (a.trunc() < -1) throw WindowError("z^-1 coefficient outside faithful window");
  Scalar r = a.coeff(-1);
  return a.point() == Point::plus ? r : -r;
}

Scalar residue_of_product(const LaurentExpansion& a, const LaurentExpansion& b) {
  require_compatible(a, b);
  if (a.weight() + b.weight() != 1)
    throw WeightError("residue of a non-differential (weight " +
                      std::to_string(a.weight() + b.weight()) + ")");
  int trunc = std::min(a.trunc() + b.lead(), b.trunc() + a.lead());
  if (trunc < -1) throw WindowError("z^-1 coefficient outside faithful window");
  ScalarKind kind = merged_kind(a, b);
  int lo = a.lead();
  int hi = -1 - b.lead();
  Scalar r;
  if (kind.mode == ScalarMode::exact) {
    Rational acc = 0;
    for (int i = lo; i <= hi; ++i) {
      const Rational& x = a.coeffs()[static_cast<size_t>(i - a.lead())].rational();
      if (x == 0) continue;
      acc += x * b.coeffs()[static_cast<size_t>(-1 - i - b.lead())].rational();
    }
    r = Scalar(std::move(acc));
  } else {
    PrecisionScope scope(kind.digits);
    BigComplex acc{Real(0), Real(0), kind.digits};
    for (int i = lo; i <= hi; ++i)
      mul_add(acc, a.coeffs()[static_cast<size_t>(i - a.lead())].big_complex(),
              b.coeffs()[static_cast<size_t>(-1 - i - b.lead())].big_complex());
    r = Scalar(std::move(acc));
  }
  return a.point() == Point::plus ? r : -r;
}

LaurentExpansion lie_derivative(const LaurentExpansion& e, const LaurentExpansion& g) {
  if (e.weight() != -1) throw WeightError("Lie derivative along a non-vector-field");
  require_compatible(e, g);
  LaurentExpansion t1 = series_mul(e, series_derivative(g));
  LaurentExpansion t2 = series_mul(g, series_derivative(e));
  // t1 has weight g.weight - 1 in the bookkeeping above; the Lie derivative keeps g's weight.
  LaurentExpansion lhs(g.point(), g.weight(), t1.lead(), t1.coeffs(), t1.kind());
  LaurentExpansion rhs(g.point(), g.weight(), t2.lead(),
                       series_scale(t2, t2.kind().from_int(g.weight())).coeffs(), t2.kind());
  return series_add(lhs, rhs);
}

LaurentExpansion d_function(const LaurentExpansion& a) {
  if (a.weight() != 0) throw WeightError("exterior derivative of a non-function");
  LaurentExpansion d = series_derivative(a);
  return LaurentExpansion(a.point(), 1, d.lead(), d.coeffs(), d.kind());
}

double max_coeff_distance(const LaurentExpansion& a, const LaurentExpansion& b) {
  int lead = std::min(a.lead(), b.lead());
  int trunc = std::min(a.trunc(), b.trunc());
  double worst = 0;
  for (int e = lead; e <= trunc; ++e) worst = std::max(worst, distance(a.coeff(e), b.coeff(e)));
  return worst;
}

double relative_coeff_distance(const LaurentExpansion& a, const LaurentExpansion& b) {
  double scale = 1;
  for (const auto& c : a.coeffs()) scale = std::max(scale, c.abs());
  return max_coeff_distance(a, b) / scale;
}

LaurentExpansion linear_combination(const std::vector<std::pair<Scalar, const LaurentExpansion*>>& terms,
                                    Point p, int weight, int lead, int trunc, ScalarKind kind) {
  std::vector<Scalar> zeros(static_cast<size_t>(std::max(0, trunc - lead + 1)), kind.zero());
  LaurentExpansion acc(p, weight, lead, zeros, kind);
  for (const auto& [c, x] : terms) acc = series_add(acc, series_scale(*x, c));
  return acc;
}

}  // namespace knva
