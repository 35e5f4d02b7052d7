#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "knva/index.hpp"
#include "knva/laurent.hpp"
#include "knva/report.hpp"
#include "knva/weierstrass.hpp"

namespace knva {

struct AtlasConfig {
  int genus = 0;
  int window = 24;  // doubled: indices with |n| <= window / 2 are constructed
  int trunc = 78;   // highest exponent kept in every expansion
  std::vector<int> lambdas{-1, 0, 1, 2};
  ScalarMode mode = ScalarMode::exact;
  unsigned precision = 60;  // requested decimal digits (approximate mode)
  double tolerance = 0;     // 0 means 10^(-precision/2); exact mode ignores it
  // genus-1 geometry, as complex literals ("0+1i", "0.17+0.31i")
  std::string tau, p_plus, p_minus;

  unsigned working_digits() const { return mode == ScalarMode::exact ? 0 : precision + kGuardDigits; }
  ScalarKind kind() const { return {mode, working_digits()}; }
  double tol() const;
  // Lower bound 3 (2N + 2g) + 6 on trunc for a window with max |n| = N + g.
  static int min_trunc(int window_doubled) { return 3 * window_doubled + 6; }
  // Throws ConfigError when an invariant is broken.
  void validate() const;
  std::vector<int> indices() const;  // doubled, ascending
  bool has_lambda(int lambda) const;
};

json to_json(const AtlasConfig& c);
AtlasConfig atlas_config_from_json(const json& j);

// "a+bi", "a-bi", "bi", "i", "a" at the given working precision.
BigComplex parse_complex_literal(const std::string& text, unsigned digits);

// Expected lowest exponent of f_{lambda,n} at a point, including the middle-range shifts.
int expected_lead(int genus, int lambda, int n2, Point p);

// How a genus-1 function A_n is assembled from Weierstrass building blocks:
// constant + z_coeff (zeta(z-p+) - zeta(z-p-)) + sum_j wp_plus[j] wp^(j)(z-p+) + wp_minus[j] wp^(j)(z-p-).
struct BlockCombination {
  BigComplex constant;
  BigComplex zeta_coeff;
  std::vector<BigComplex> wp_plus, wp_minus;
};

struct Genus1Recipe {
  Lattice lattice;
  BigComplex p_plus, p_minus;
  std::map<int, BlockCombination> functions;  // A_n, doubled n
  BlockCombination rho;                       // rho / dz
};

class BasisAtlas {
 public:
  AtlasConfig config;
  std::map<std::pair<int, int>, std::pair<LaurentExpansion, LaurentExpansion>> sections;
  std::map<std::tuple<int, int, Point>, Scalar> normalizations;
  std::optional<Genus1Recipe> recipe;

  int genus() const { return config.genus; }
  ScalarKind kind() const { return config.kind(); }
  bool has(int lambda, int n2) const { return sections.count({lambda, n2}) > 0; }
  const LaurentExpansion& f(int lambda, int n2, Point p) const;
  const LaurentExpansion& A(int n2, Point p) const { return f(0, n2, p); }
  // omega^m = f_{1,-m}
  const LaurentExpansion& omega(int m2, Point p) const { return f(1, -m2, p); }
  // f^m_lambda = f_{lambda,-m}
  const LaurentExpansion& fup(int lambda, int m2, Point p) const { return f(lambda, -m2, p); }
  const LaurentExpansion& e(int n2, Point p) const { return f(-1, n2, p); }
  int max_index() const { return config.window; }
  std::vector<int> indices() const { return config.indices(); }

  // Checks leads, A_{g/2} = 1, alpha^0_{n,+} = 1; throws InvariantViolation.
  void check_structure() const;
};

BasisAtlas build_genus0(const AtlasConfig& config);
BasisAtlas build_genus1(const AtlasConfig& config);
BasisAtlas build_atlas(const AtlasConfig& config);

CheckReport verify_duality(const BasisAtlas& atlas);
// Genus 1 only: evaluates each A_n and rho/dz at a third point and its translates by 1 and tau.
CheckReport check_periodicity(const BasisAtlas& atlas);

json atlas_to_json(const BasisAtlas& atlas);
BasisAtlas atlas_from_json(const json& j);
void save_atlas(const BasisAtlas& atlas, const std::string& path);
BasisAtlas load_atlas(const std::string& path);

// Deterministic text form used for files.
std::string dump_document(const json& j);

}  // namespace knva
