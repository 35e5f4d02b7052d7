#pragma once

#include <climits>
#include <compare>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "knva/fock.hpp"

namespace knva {

// The right-nested normal ordered word :D^{k_1}a : D^{k_2}a : ... : D^{k_M}a : ...:, weight M.
// M = 0 is the identity field.
struct FieldSpec {
  std::vector<int> orders;

  int weight() const { return static_cast<int>(orders.size()); }
  bool is_identity() const { return orders.empty(); }
  FieldSpec rest() const { return FieldSpec{std::vector<int>(orders.begin() + 1, orders.end())}; }
  // ":D2 a . D0 a:", "id" for the identity
  std::string str() const;
  auto operator<=>(const FieldSpec&) const = default;
  bool operator==(const FieldSpec&) const = default;
};

// Accepts "id", "a", ":D1 a:", ":D2 a . D0 a:"; throws ParseError.
FieldSpec parse_field(const std::string& text);

// The state-field map: a_{-n_1+g/2} ... a_{-n_M+g/2} v0 -> :D^{n_1-1}a ... D^{n_M-1}a:.
FieldSpec Y(const Monomial& state);
// The monomial a field is expected to produce from v0, parts k_i + 1 sorted.
Monomial target_monomial(const FieldSpec& spec);
// -s_M, doubled: the index at which a weight-M field first acts nontrivially on v0.
int vacuum_index(int genus, int weight);

// A product C * A of generators: C a creator monomial (as an ordered product acting to the
// left of everything) and A a multiset of annihilators (doubled indices > g) acting first.
struct Word {
  Monomial creators;
  std::vector<int> annihilators;  // sorted ascending

  // "a_{-3/2} a_{5/2}" with absolute indices, "1" for the empty word
  std::string str(int genus) const;
  auto operator<=>(const Word&) const = default;
  bool operator==(const Word&) const = default;
};

// A finite sum of words; every coefficient of a field, restricted to states of bounded
// degree, has this form. Creators do not commute at genus >= 1; words are kept in the
// normal form above, which is unique because all brackets are scalars.
class CoefficientOperator {
 public:
  CoefficientOperator() = default;
  explicit CoefficientOperator(ScalarKind kind) : kind_(kind) {}
  static CoefficientOperator identity(ScalarKind kind);

  const std::map<Word, Scalar>& words() const { return words_; }
  const ScalarKind& kind() const { return kind_; }
  bool is_zero() const { return words_.empty(); }
  void add(const Word& w, const Scalar& c);
  void add(const CoefficientOperator& op, const Scalar& c);
  void prune(double floor);

  FockVector apply(const FockSpace& fock, const FockVector& v) const;
  // "0", "id", or a sum like "(2) a_{-2} a_{3}"
  std::string str(int genus) const;
  json to_json(int genus) const;

 private:
  ScalarKind kind_;
  std::map<Word, Scalar> words_;
};

// a * b, dropping words that vanish on every state of degree <= budget.
CoefficientOperator multiply(const FockSpace& fock, const CoefficientOperator& a,
                             const CoefficientOperator& b, int budget);

// Field coefficients over fixed tables, memoized by (spec, index, degree budget). A budget D
// means the operator is exact on states of degree <= D; words that kill all of them are
// dropped, which keeps every infinite sum finite.
class FieldContext {
 public:
  explicit FieldContext(const StructureTables& tables);

  const StructureTables& tables() const { return *t_; }
  const FockSpace& fock() const { return fock_; }
  int genus() const { return t_->genus; }
  ScalarKind kind() const { return t_->kind; }

  // a^{(k)}_u = sum_j q^{(k),j}_u a_j as one-generator words.
  CoefficientOperator generator_field_coefficient(int k, int u2, int budget = INT_MAX) const;
  // :D^k a  B:_n with B of weight lambda, through the l^{jm}_{n,(lambda)} table.
  CoefficientOperator nop_coefficient(int k, const FieldSpec& inner, int n2, int budget);
  // Coefficient n of the field of the given spec, exact on states of degree <= budget.
  const CoefficientOperator& coefficient(const FieldSpec& spec, int n2, int budget);
  // Applies coefficient n to v, using the degree of v as budget.
  FockVector apply(const FieldSpec& spec, int n2, const FockVector& v);

  // Largest n for which coefficient n can be nonzero on states of degree <= budget
  // (INT_MIN when nothing survives), from the measured bands.
  int threshold(const FieldSpec& spec, int budget) const;

  // Coefficient (n, m) of :P-factors(P) Q-factors(Q): with every P-factor nested outside
  // every Q-factor; the empty P word leaves the P-index at the identity slot -g.
  const CoefficientOperator& two_point_coefficient(const FieldSpec& p, const FieldSpec& q,
                                                   int n2, int m2, int budget);

  // [a^{(i)}_u, a^{(j)}_v] = sigma sum q^{(i),x}_u q^{(j),y}_v gamma_{xy}.
  Scalar contraction(int i, int u2, int j, int v2) const;
  // Inclusive doubled band of u + v outside which the contraction vanishes.
  std::pair<int, int> contraction_band(int i, int j) const;

  size_t cache_size() const { return cache_.size() + two_cache_.size(); }

 private:
  using Inner = std::function<const CoefficientOperator&(int m2, int budget)>;
  using InnerThreshold = std::function<int(int budget)>;
  CoefficientOperator nop_impl(int k, int inner_weight, const Inner& inner,
                               const InnerThreshold& inner_thr, int n2, int budget);
  int generator_threshold(int k, int budget) const;
  int nop_threshold(int k, int inner_weight, const InnerThreshold& inner_thr, int budget) const;
  const Band& ell_band(int lambda) const;

  const StructureTables* t_;
  FockSpace fock_;
  CoefficientOperator zero_;
  std::map<std::tuple<std::vector<int>, int, int>, CoefficientOperator> cache_;
  std::map<std::tuple<std::vector<int>, std::vector<int>, int, int, int>, CoefficientOperator>
      two_cache_;
  mutable std::map<std::pair<int, int>, CoefficientOperator> rows_;
};

// Basis states of degree <= max_degree.
std::vector<FockVector> basis_states(ScalarKind kind, int max_degree);

// Vacuum theorem for one field: coefficients above -s_M kill v0 and the coefficient at
// -s_M gives C * target + lower degree. details: C, tail, target.
CheckReport check_vacuum(FieldContext& ctx, const FieldSpec& spec);

// nabla Y = [T, Y]: sum_n theta^{(M),n}_u X_n v against T X_u v - X_u T v for u2 in
// [-range2, range2] and every test state.
CheckReport check_translation(FieldContext& ctx, const FieldSpec& spec,
                              const std::vector<FockVector>& states, int range2);

// Commutator kernel K_{nm} = [A_n, B_m] on the test states for n2, m2 in [-range2, range2].
// Genus 0: minimal N with (z-w)^N K = 0 (details "N"); the search stops at max_n. Genus >= 1:
// the generator pair must give sigma gamma_{nm} id with |n+m| <= g+1; for every pair the
// contraction kernels between factors are measured and must stay inside their band.
CheckReport check_locality(FieldContext& ctx, const FieldSpec& a, const FieldSpec& b,
                           const std::vector<FockVector>& states, int range2, int max_n = 12);

// [a^{(k)}_u, a^{(h)}_v] = 0 for u, v >= g/2 on all test states.
CheckReport check_annihilator_commutation(FieldContext& ctx, int k, int h,
                                          const std::vector<FockVector>& states, int range2);
// [[a^{(k)}_u, a^{(h)}_v], a^{(f)}_w] = 0 for u >= g/2 and all v, w.
CheckReport check_double_bracket(FieldContext& ctx, int k, int h, int f,
                                 const std::vector<FockVector>& states, int range2);

// Wick formula at coefficient level: A_n B_m v equals the sum over contractions of
// (a_-, b) pairs times the remaining two-point normal ordered product.
CheckReport check_wick(FieldContext& ctx, const FieldSpec& a, const FieldSpec& b,
                       const std::vector<FockVector>& states, int range2);

// Every coefficient above the reported threshold kills each test state (checked up to the
// window edge); details map state -> threshold.
CheckReport check_field_property(FieldContext& ctx, const FieldSpec& spec,
                                 const std::vector<FockVector>& states);

}  // namespace knva
