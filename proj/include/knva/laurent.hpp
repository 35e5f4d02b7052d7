#pragma once

#include <string>
#include <utility>
#include <vector>

#include "knva/scalar.hpp"

namespace knva {

enum class Point { plus, minus };

std::string to_string(Point p);
Point parse_point(const std::string& s);

// Truncated local expansion sum_k c_k z^k (dz)^weight at one of the marked points.
// Exponents lead..trunc are faithful; everything above trunc is unknown.
class LaurentExpansion {
 public:
  LaurentExpansion(Point point, int weight, int lead, std::vector<Scalar> coeffs, ScalarKind kind);
  // Expansion with no faithful coefficients at all (trunc = lead - 1).
  static LaurentExpansion unknown(Point point, int weight, int lead, ScalarKind kind);
  static LaurentExpansion monomial(Point point, int weight, int exponent, const Scalar& c,
                                   int trunc);

  Point point() const { return point_; }
  int weight() const { return weight_; }
  int lead() const { return lead_; }
  int trunc() const { return lead_ + static_cast<int>(coeffs_.size()) - 1; }
  const ScalarKind& kind() const { return kind_; }
  const std::vector<Scalar>& coeffs() const { return coeffs_; }

  // Coefficient of z^e: zero below lead, error above trunc.
  Scalar coeff(int e) const;
  // First exponent whose coefficient exceeds tol in magnitude (trunc + 1 if none).
  int effective_lead(double tol = 0.0) const;

  LaurentExpansion truncated(int new_trunc) const;

 private:
  Point point_;
  int weight_;
  int lead_;
  std::vector<Scalar> coeffs_;
  ScalarKind kind_;
};

LaurentExpansion series_mul(const LaurentExpansion& a, const LaurentExpansion& b);
// Same product, but only exponents up to max_exponent are formed.
LaurentExpansion series_mul(const LaurentExpansion& a, const LaurentExpansion& b, int max_exponent);
LaurentExpansion series_add(const LaurentExpansion& a, const LaurentExpansion& b);
LaurentExpansion series_scale(const LaurentExpansion& a, const Scalar& s);
// d/dz of the coefficient function, weight unchanged.
LaurentExpansion series_derivative(const LaurentExpansion& a);

// Coefficient of z^{-1} with orientation +1 at P+ and -1 at P-.
Scalar residue_at(const LaurentExpansion& a);
// residue_at(series_mul(a, b)) without forming the full product.
Scalar residue_of_product(const LaurentExpansion& a, const LaurentExpansion& b);

LaurentExpansion lie_derivative(const LaurentExpansion& e, const LaurentExpansion& g);
LaurentExpansion d_function(const LaurentExpansion& a);

// max |a_k - b_k| over the common faithful range starting at min lead.
double max_coeff_distance(const LaurentExpansion& a, const LaurentExpansion& b);
// The same, divided by max(1, largest |a_k|).
double relative_coeff_distance(const LaurentExpansion& a, const LaurentExpansion& b);

// sum_i c_i x_i on exponents lead..trunc; an exact zero of that shape when terms is empty.
LaurentExpansion linear_combination(const std::vector<std::pair<Scalar, const LaurentExpansion*>>& terms,
                                    Point p, int weight, int lead, int trunc, ScalarKind kind);

}  // namespace knva
