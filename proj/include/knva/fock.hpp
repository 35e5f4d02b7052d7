#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "knva/report.hpp"
#include "knva/tables.hpp"

namespace knva {

// The basis state a_{-n_1+g/2} ... a_{-n_M+g/2} v0 with integer parts n_1 >= ... >= n_M >= 1.
struct Monomial {
  std::vector<int> parts;

  int degree() const;
  int size() const { return static_cast<int>(parts.size()); }
  bool is_vacuum() const { return parts.empty(); }
  // "a[-3]a[-1]|0>", "|0>" for the vacuum
  std::string str() const;
  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;
};

// Doubled index of the creator a_{g/2-p}, and back.
inline int creator_index(int genus, int part) { return genus - 2 * part; }
inline int part_of(int genus, int j2) { return (genus - j2) / 2; }

// Throws ParseError; parts must be listed non-increasing.
Monomial parse_monomial(const std::string& text);

// All monomials of a given degree (partitions), in a fixed order.
std::vector<Monomial> monomials_of_degree(int degree);
std::vector<Monomial> monomials_up_to(int max_degree);

class FockVector {
 public:
  FockVector() = default;
  explicit FockVector(ScalarKind kind) : kind_(kind) {}
  static FockVector vacuum(ScalarKind kind);
  static FockVector basis(const Monomial& m, ScalarKind kind);

  const std::map<Monomial, Scalar>& terms() const { return terms_; }
  const ScalarKind& kind() const { return kind_; }
  bool is_zero() const { return terms_.empty(); }
  Scalar coeff(const Monomial& m) const;

  // Adds c * m, dropping the entry if it cancels exactly.
  void add(const Monomial& m, const Scalar& c);
  void add(const FockVector& v, const Scalar& c);
  FockVector scaled(const Scalar& c) const;
  // Drops coefficients with |c| <= floor (approximate mode only).
  void prune(double floor);

  double max_abs() const;
  std::string str() const;
  json to_json() const;

 private:
  ScalarKind kind_;
  std::map<Monomial, Scalar> terms_;
};

FockVector operator-(const FockVector& a, const FockVector& b);
FockVector operator+(const FockVector& a, const FockVector& b);
// max |a_m - b_m| over the union of supports
double distance(const FockVector& a, const FockVector& b);

// The Heisenberg algebra acting on V with [a_n, a_m] = sigma gamma_{nm} and K = 1.
class FockSpace {
 public:
  explicit FockSpace(const StructureTables& tables);

  const StructureTables& tables() const { return *t_; }
  int genus() const { return t_->genus; }
  ScalarKind kind() const { return t_->kind; }
  bool is_creator(int j2) const { return j2 < t_->genus; }
  // sigma gamma_{nm}, the scalar value of [a_n, a_m]
  Scalar bracket(int n2, int m2) const;

  FockVector apply(int j2, const FockVector& v) const;
  FockVector apply(int j2, const Monomial& m) const;
  // Applies a_{j_1} ... a_{j_r} (rightmost first).
  FockVector apply_word(const std::vector<int>& word, const FockVector& v) const;
  // The state (creators in any order) applied to v0.
  FockVector create(const std::vector<int>& creators) const;

  // T v0 = 0, T(a_u w) = [T, a_u] w + a_u T w with [T, a_u] = sum_n zeta^n_u a_n.
  FockVector apply_T(const FockVector& v) const;
  FockVector apply_T(const Monomial& m) const;

  // Evaluates a literal like "a[-2]a[-1]|0>" as a product of creators on v0 (any order).
  FockVector parse_state(const std::string& text) const;

  double noise_floor() const { return noise_; }

 private:
  FockVector insert_creator(int part, const Monomial& m, size_t from) const;
  FockVector remove_by(int j2, const Monomial& m) const;

  const StructureTables* t_;
  double noise_ = 0;
};

// Maximum degree over the support; throws InvariantViolation on the zero vector.
int degree(const FockVector& v);

// Smallest n0 in the window with a_n v = 0 for every window n >= n0.
CheckReport check_admissibility(const FockSpace& fock, const FockVector& v, int* n0 = nullptr);

}  // namespace knva
