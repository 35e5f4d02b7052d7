#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "knva/atlas.hpp"
#include "knva/tables.hpp"

namespace knva {

// sum c_{nm} f^n_lambda(P) (x) f^m_mu(Q), doubled indices.
struct KernelCoefficients {
  int left_weight = 0;
  int right_weight = 0;
  std::map<std::pair<int, int>, Scalar> entries;

  Scalar at(int n2, int m2, const ScalarKind& kind) const;
  // max |n + m| over the entries (doubled), -1 when empty
  int band() const;
  json to_json() const;
};

// Delta_lambda(P, Q) = sum_n f_{lambda,n}(P) f^n_{1-lambda}(Q) over the window: entries (-n, n) = 1.
KernelCoefficients delta_kernel(const BasisAtlas& atlas, int lambda);
// d_P Delta(P, Q) = sum gamma_{nm} omega^n(P) omega^m(Q).
KernelCoefficients dP_delta_kernel(const StructureTables& t);

// The two Szego expansion ranges n >= g/2 and n < g/2 split the window of Delta_lambda into
// two disjoint pieces that together give every index exactly once.
CheckReport check_delta_partition(const BasisAtlas& atlas, int lambda);

// dA_n = sum_m gamma_{mn} omega^m at both points, for every n whose gamma row fits the window.
CheckReport check_dP_delta(const BasisAtlas& atlas, const StructureTables& t);

// A finite-dimensional Lie algebra with exact structure constants [e_a, e_b] = sum_c f^c_{ab} e_c
// and an invariant symmetric form (e_a | e_b).
struct LieAlgebraData {
  std::string name;
  std::vector<std::string> labels;
  std::vector<std::vector<std::vector<Rational>>> structure;  // [a][b][c] = f^c_{ab}
  std::vector<std::vector<Rational>> form;                    // [a][b]

  int dimension() const { return static_cast<int>(labels.size()); }
  int label_index(const std::string& label) const;  // throws ConfigError
  // Antisymmetry, Jacobi, symmetry and invariance of the form; throws ConfigError.
  void validate() const;

  static LieAlgebraData abelian();
  // basis e, h, f with [e,f] = h, [h,e] = 2e, [h,f] = -2f and the trace form (e|f) = 1, (h|h) = 2
  static LieAlgebraData sl2();
};

json to_json(const LieAlgebraData& lie);
// {"name", "labels", "brackets": [{"a","b","c","value"}], "form": [{"a","b","value"}]}; the
// bracket list gives each [a,b] once and antisymmetry fills in [b,a].
LieAlgebraData lie_from_json(const json& j);
LieAlgebraData load_lie(const std::string& path);
// "abelian", "sl2", or a path to a Lie algebra file.
LieAlgebraData lie_by_name(const std::string& name_or_path);

// sum over (label, index) of c x_n, plus c_K K.
struct AffineCombination {
  std::map<std::pair<int, int>, Scalar> terms;
  Scalar central;

  explicit AffineCombination(const ScalarKind& kind) : central(kind.zero()) {}
  void add(int label, int n2, const Scalar& c);
  AffineCombination& operator+=(const AffineCombination& o);
  AffineCombination scaled(const Scalar& c) const;
  double max_abs() const;
  std::string str(const LieAlgebraData& lie) const;
};

// [x_n, y_m] = sum_k alpha^k_{nm} [x,y]_k + (x|y) sigma gamma_{nm} K, with x = e_a, y = e_b.
AffineCombination affine_bracket(const StructureTables& t, const LieAlgebraData& lie, int a,
                                 int n2, int b, int m2);
// Bilinear extension to combinations; K is central.
AffineCombination affine_bracket(const StructureTables& t, const LieAlgebraData& lie,
                                 const AffineCombination& x, const AffineCombination& y);

// [[x_n, y_m], z_k] + cyclic over all basis triples and all index triples in
// [-range2, range2]; details: triples.
CheckReport check_affine_jacobi(const StructureTables& t, const LieAlgebraData& lie, int range2);

// [x_n, y_m] + [y_m, x_n] = 0 over the same range.
CheckReport check_affine_antisymmetry(const StructureTables& t, const LieAlgebraData& lie,
                                      int range2);

// Coefficient (n, m) of [a(P), b(Q)] against [a,b](P) Delta(P, Q) + (a|b) d_P Delta(P, Q), for
// basis pairs and n, m in [-range2, range2]. The loop part expands omega^k(P) A_m(P) and so
// uses alpha^k_{mn}; the bracket uses alpha^k_{nm}. Sub-reports: "alpha symmetry" and
// "central term" (the d_P Delta kernel scaled by sigma (a|b)); with an atlas also "dP delta".
CheckReport check_bracket_corollary(const StructureTables& t, const LieAlgebraData& lie,
                                    int range2, const BasisAtlas* atlas = nullptr);

}  // namespace knva
