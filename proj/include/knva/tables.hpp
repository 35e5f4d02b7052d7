#pragma once

#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "knva/atlas.hpp"
#include "knva/report.hpp"

namespace knva {

// Inclusive range of doubled offsets seen on the nonzero support of a table.
struct Band {
  int lo = 0;
  int hi = 0;
  bool empty = true;

  void add(int offset);
  bool contains(int offset) const { return !empty && lo <= offset && offset <= hi; }
};

json to_json(const Band& b);
Band band_from_json(const json& j);

using Table2 = std::map<std::pair<int, int>, Scalar>;
using Table3 = std::map<std::tuple<int, int, int>, Scalar>;

struct TablesConfig {
  std::vector<int> beta_lambdas;   // weights lambda of beta^{lambda}
  std::vector<int> ell_lambdas;    // weights lambda of l_{(lambda)} (the inner field)
  std::vector<int> theta_lambdas;  // weights of the forms differentiated by nabla
  int k_max = 4;                   // highest derivative order in q^{(k)}
};

// Every table the atlas supports, with k_max = 4.
TablesConfig default_tables_config(const BasisAtlas& atlas);

// All residue-defined constants over the atlas window. Indices are doubled; a table stores
// every entry whose residue is not forced to vanish by the leads at P+ and P- (exact mode
// keeps only nonzero values). Missing keys inside the window are zero.
struct StructureTables {
  int genus = 0;
  int window = 0;  // doubled
  ScalarKind kind;
  double tol = 0;
  // The Heisenberg bracket is [a_n, a_m] = sigma gamma_{nm} K; sigma = -1 reproduces the
  // classical n delta_{n,-m} at genus 0 (see README, sign calibration).
  int sigma = -1;
  int k_max = 0;

  Table2 gamma;                 // (n, m): Res(A_n dA_m)
  std::map<int, Table3> beta;   // lambda -> (n, m, k): Res(A_n f^m_lambda f_{1-lambda,k})
  Table2 zeta;                  // (n, u): Res(A_u nabla omega^n), so nabla omega^n = sum_u zeta^n_u omega^u
  std::map<int, Table2> theta;  // lambda -> (n, u): Res(f_{1-lambda,u} nabla f^n_lambda)
  std::map<int, Table3> ell;    // lambda -> (j, m, n): Res(omega^j f^m_lambda f^{-n}_{-lambda})
  std::map<int, Table2> q;      // k -> (j, u): q^{(k),j}_u, only for reliable u

  // Measured support, all doubled.
  int gamma_band = 0;            // max |n + m|
  std::map<int, Band> beta_band;   // k - (m - n)
  Band zeta_band;                  // n - u
  std::map<int, Band> theta_band;  // n - u
  std::map<int, Band> ell_band;    // m - n + j
  std::map<int, std::pair<int, int>> q_reliable;  // k -> [u_lo, u_hi]
  double cross_point = 0;          // max |Res at P+ - Res at P-| over all computed entries

  bool in_window(int n2) const { return n2 >= -window && n2 <= window; }
  bool nonzero(const Scalar& s) const;

  // Lookups; WindowError outside the computed domain.
  Scalar gamma_at(int n2, int m2) const;
  Scalar beta_at(int lambda, int n2, int m2, int k2) const;
  Scalar alpha_at(int m2, int n2, int k2) const { return beta_at(1, n2, m2, k2); }  // alpha^m_{nk}
  Scalar zeta_at(int n2, int u2) const;
  Scalar theta_at(int lambda, int n2, int u2) const;
  Scalar ell_at(int lambda, int j2, int m2, int n2) const;
  Scalar q_at(int k, int j2, int u2) const;
  // The nonzero part of row u of q^{(k)}: a^{(k)}_u = sum_j q^{(k),j}_u a_j.
  std::vector<std::pair<int, Scalar>> q_row(int k, int u2) const;

  json source = json::object();  // config of the atlas the tables came from

  // Smallest part p that the annihilator a_j (j2 > g) can remove from a Fock monomial,
  // read off the measured gamma band; a_{g/2} removes nothing and gets INT_MAX.
  int min_removable_part(int j2) const;
};

StructureTables compute_tables(const BasisAtlas& atlas, const TablesConfig& config);
StructureTables compute_tables(const BasisAtlas& atlas);

// Individual computations, exposed for tests; each also records the P+/P- discrepancy.
Table2 compute_gamma(const BasisAtlas& atlas, double* cross = nullptr);
Table3 compute_beta(const BasisAtlas& atlas, int lambda, double* cross = nullptr);
Table2 compute_zeta(const BasisAtlas& atlas, double* cross = nullptr);
Table2 compute_theta(const BasisAtlas& atlas, int lambda, double* cross = nullptr);
Table3 compute_ell(const BasisAtlas& atlas, int lambda, double* cross = nullptr);
void compute_q(StructureTables& t, int k_max);
void measure_bands(StructureTables& t);

// True when f_{lambda,n} has the leads +-n - s_lambda at both points (no middle-range shift).
bool generic_section(int genus, int lambda, int n2);

// Band and vanishing suite.
CheckReport check_gamma(const StructureTables& t);
CheckReport check_beta(const StructureTables& t);
CheckReport check_zeta(const StructureTables& t);
CheckReport check_ell(const StructureTables& t);
CheckReport check_q(const StructureTables& t);
CheckReport check_alpha_symmetry(const StructureTables& t);
CheckReport check_cross_point(const StructureTables& t);
CheckReport check_bands(const StructureTables& t);

// Expansion identities against the atlas, restricted to rows whose band lies in the window.
CheckReport check_beta_expansion(const StructureTables& t, const BasisAtlas& atlas, int lambda);
CheckReport check_ell_expansion(const StructureTables& t, const BasisAtlas& atlas, int lambda);
CheckReport check_alpha_products(const StructureTables& t, const BasisAtlas& atlas);
// nabla omega^n = sum_u zeta^n_u omega^u, and Res(omega^n e dA_u) = -zeta^n_u by parts.
CheckReport check_zeta_expansion(const StructureTables& t, const BasisAtlas& atlas);
// Every expansion identity above that the atlas supports.
CheckReport check_expansions(const StructureTables& t, const BasisAtlas& atlas);

json tables_to_json(const StructureTables& t);
StructureTables tables_from_json(const json& j);
void save_tables(const StructureTables& t, const std::string& path);
StructureTables load_tables(const std::string& path);

// One-line band summary (c1, c2, C, gamma band).
json band_summary(const StructureTables& t);

}  // namespace knva
