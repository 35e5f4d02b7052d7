#include "knva/tables.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <optional>

#include "knva/errors.hpp"

namespace knva {

void Band::add(int offset) {
  if (empty) {
    lo = hi = offset;
    empty = false;
    return;
  }
  lo = std::min(lo, offset);
  hi = std::max(hi, offset);
}

json to_json(const Band& b) {
  if (b.empty) return json{{"empty", true}};
  return json{{"lo", b.lo}, {"hi", b.hi}};
}

Band band_from_json(const json& j) {
  Band b;
  if (j.contains("empty")) return b;
  b.lo = j.at("lo").get<int>();
  b.hi = j.at("hi").get<int>();
  b.empty = false;
  return b;
}

namespace {

constexpr Point kPoints[] = {Point::plus, Point::minus};

std::string at2(int a, int b) { return "(" + index_str(a) + ", " + index_str(b) + ")"; }
std::string at3(int a, int b, int c) {
  return "(" + index_str(a) + ", " + index_str(b) + ", " + index_str(c) + ")";
}

// Expansions of one family of sections at both points, with the smallest lead per point.
struct Family {
  std::map<int, std::pair<LaurentExpansion, LaurentExpansion>> at;
  int min_lead_plus = INT_MAX;
  int min_lead_minus = INT_MAX;

  void add(int key, LaurentExpansion p, LaurentExpansion m) {
    min_lead_plus = std::min(min_lead_plus, p.lead());
    min_lead_minus = std::min(min_lead_minus, m.lead());
    at.emplace(key, std::make_pair(std::move(p), std::move(m)));
  }
  const LaurentExpansion& get(int key, Point p) const {
    const auto& pr = at.at(key);
    return p == Point::plus ? pr.first : pr.second;
  }
};

// The sections f_{lambda, sign * n} for n in the window, keyed by n.
Family section_family(const BasisAtlas& atlas, int lambda, int sign) {
  Family f;
  for (int n2 : atlas.indices())
    f.add(n2, atlas.f(lambda, sign * n2, Point::plus), atlas.f(lambda, sign * n2, Point::minus));
  return f;
}

const LaurentExpansion& nabla_field(const BasisAtlas& atlas, Point p) {
  int e2 = 3 * atlas.genus() - 2;
  if (!atlas.has(-1, e2))
    throw WindowError("the atlas lacks the vector field e_" + index_str(e2) + " defining nabla");
  return atlas.e(e2, p);
}

// Res(xy * z) at both points. Empty when the leads force the residue to vanish; if only one
// point can carry a pole, that residue must vanish and its size counts as a discrepancy.
std::optional<Scalar> pair_residue(const LaurentExpansion& xyp, const LaurentExpansion& zp,
                                   const LaurentExpansion& xym, const LaurentExpansion& zm,
                                   double& cross) {
  bool cp = xyp.lead() + zp.lead() <= -1;
  bool cm = xym.lead() + zm.lead() <= -1;
  if (!cp && !cm) return std::nullopt;
  if (cp && cm) {
    Scalar a = residue_of_product(xyp, zp);
    Scalar b = residue_of_product(xym, zm);
    cross = std::max(cross, distance(a, b));
    return a;
  }
  Scalar r = cp ? residue_of_product(xyp, zp) : residue_of_product(xym, zm);
  cross = std::max(cross, r.abs());
  return std::nullopt;
}

template <class Key, class Table>
void store(Table& t, Key key, std::optional<Scalar> v) {
  if (!v) return;
  if (v->is_exact() && v->is_zero()) return;
  t.emplace(std::move(key), std::move(*v));
}

// Res(x y z) over (x, y, z) in X x Y x Z, keyed by key(x, y, z).
template <class KeyFn>
Table3 triple_table(const Family& X, const Family& Y, const Family& Z, KeyFn key, double& cross) {
  Table3 out;
  int need_p = -1 - Z.min_lead_plus;
  int need_m = -1 - Z.min_lead_minus;
  for (const auto& [x, xs] : X.at)
    for (const auto& [y, ys] : Y.at) {
      LaurentExpansion xyp = series_mul(xs.first, ys.first, need_p);
      LaurentExpansion xym = series_mul(xs.second, ys.second, need_m);
      if (xyp.lead() + Z.min_lead_plus > -1 && xym.lead() + Z.min_lead_minus > -1) continue;
      for (const auto& [z, zs] : Z.at)
        store(out, key(x, y, z), pair_residue(xyp, zs.first, xym, zs.second, cross));
    }
  return out;
}

void bump(double* cross, double v) {
  if (cross) *cross = std::max(*cross, v);
}

}  // namespace

bool StructureTables::nonzero(const Scalar& s) const {
  return kind.mode == ScalarMode::exact ? !s.is_zero() : s.abs() > tol;
}

namespace {

void require_window(const StructureTables& t, std::initializer_list<int> idx, const char* what) {
  for (int n2 : idx)
    if (!t.in_window(n2))
      throw WindowError(std::string(what) + ": index " + index_str(n2) + " outside the window");
}

template <class Map, class Key>
Scalar lookup(const Map& m, const Key& k, const ScalarKind& kind) {
  auto it = m.find(k);
  return it == m.end() ? kind.zero() : it->second;
}

}  // namespace

Scalar StructureTables::gamma_at(int n2, int m2) const {
  require_window(*this, {n2, m2}, "gamma");
  return lookup(gamma, std::make_pair(n2, m2), kind);
}

Scalar StructureTables::beta_at(int lambda, int n2, int m2, int k2) const {
  require_window(*this, {n2, m2, k2}, "beta");
  auto it = beta.find(lambda);
  if (it == beta.end()) throw WindowError("no beta table for lambda = " + std::to_string(lambda));
  return lookup(it->second, std::make_tuple(n2, m2, k2), kind);
}

Scalar StructureTables::zeta_at(int n2, int u2) const {
  require_window(*this, {n2, u2}, "zeta");
  return lookup(zeta, std::make_pair(n2, u2), kind);
}

Scalar StructureTables::theta_at(int lambda, int n2, int u2) const {
  require_window(*this, {n2, u2}, "theta");
  auto it = theta.find(lambda);
  if (it == theta.end()) throw WindowError("no theta table for lambda = " + std::to_string(lambda));
  return lookup(it->second, std::make_pair(n2, u2), kind);
}

Scalar StructureTables::ell_at(int lambda, int j2, int m2, int n2) const {
  require_window(*this, {j2, m2, n2}, "l");
  auto it = ell.find(lambda);
  if (it == ell.end()) throw WindowError("no l table for lambda = " + std::to_string(lambda));
  return lookup(it->second, std::make_tuple(j2, m2, n2), kind);
}

Scalar StructureTables::q_at(int k, int j2, int u2) const {
  if (k == 0) return j2 == u2 ? kind.one() : kind.zero();
  auto it = q.find(k);
  auto rel = q_reliable.find(k);
  if (it == q.end() || rel == q_reliable.end())
    throw WindowError("no q table for k = " + std::to_string(k));
  if (u2 < rel->second.first || u2 > rel->second.second)
    throw WindowError("q^(" + std::to_string(k) + ") row " + index_str(u2) + " is not reliable");
  require_window(*this, {j2}, "q");
  return lookup(it->second, std::make_pair(j2, u2), kind);
}

std::vector<std::pair<int, Scalar>> StructureTables::q_row(int k, int u2) const {
  std::vector<std::pair<int, Scalar>> out;
  if (k == 0) {
    out.emplace_back(u2, kind.one());
    return out;
  }
  for (int j2 = -window; j2 <= window; j2 += 2) {
    Scalar v = q_at(k, j2, u2);
    if (nonzero(v)) out.emplace_back(j2, std::move(v));
  }
  return out;
}

int StructureTables::min_removable_part(int j2) const {
  if (j2 <= genus) return INT_MAX;
  return std::max(1, (j2 + genus - gamma_band) / 2);
}

TablesConfig default_tables_config(const BasisAtlas& atlas) {
  TablesConfig c;
  const AtlasConfig& a = atlas.config;
  for (int l : a.lambdas) {
    if (a.has_lambda(1 - l) && a.has_lambda(0)) c.beta_lambdas.push_back(l);
    if (l >= 0 && a.has_lambda(-l) && a.has_lambda(1)) c.ell_lambdas.push_back(l);
    if (a.has_lambda(1 - l) && a.has_lambda(-1)) c.theta_lambdas.push_back(l);
  }
  return c;
}

Table2 compute_gamma(const BasisAtlas& atlas, double* cross) {
  Table2 out;
  double worst = 0;
  Family A = section_family(atlas, 0, 1);
  for (const auto& [n2, an] : A.at)
    for (const auto& [m2, am] : A.at) {
      LaurentExpansion dp = d_function(am.first), dm = d_function(am.second);
      store(out, std::make_pair(n2, m2), pair_residue(an.first, dp, an.second, dm, worst));
    }
  bump(cross, worst);
  return out;
}

Table3 compute_beta(const BasisAtlas& atlas, int lambda, double* cross) {
  double worst = 0;
  Family A = section_family(atlas, 0, 1);
  Family F = section_family(atlas, lambda, -1);  // f^m_lambda
  Family G = section_family(atlas, 1 - lambda, 1);
  Table3 out = triple_table(
      A, F, G, [](int n, int m, int k) { return std::make_tuple(n, m, k); }, worst);
  bump(cross, worst);
  return out;
}

Table2 compute_zeta(const BasisAtlas& atlas, double* cross) {
  Table2 out;
  double worst = 0;
  Family A = section_family(atlas, 0, 1);
  for (int n2 : atlas.indices()) {
    LaurentExpansion np = lie_derivative(nabla_field(atlas, Point::plus), atlas.omega(n2, Point::plus));
    LaurentExpansion nm = lie_derivative(nabla_field(atlas, Point::minus), atlas.omega(n2, Point::minus));
    for (const auto& [u2, au] : A.at)
      store(out, std::make_pair(n2, u2), pair_residue(np, au.first, nm, au.second, worst));
  }
  bump(cross, worst);
  return out;
}

Table2 compute_theta(const BasisAtlas& atlas, int lambda, double* cross) {
  Table2 out;
  double worst = 0;
  Family G = section_family(atlas, 1 - lambda, 1);
  for (int n2 : atlas.indices()) {
    LaurentExpansion np =
        lie_derivative(nabla_field(atlas, Point::plus), atlas.fup(lambda, n2, Point::plus));
    LaurentExpansion nm =
        lie_derivative(nabla_field(atlas, Point::minus), atlas.fup(lambda, n2, Point::minus));
    for (const auto& [u2, gu] : G.at)
      store(out, std::make_pair(n2, u2), pair_residue(np, gu.first, nm, gu.second, worst));
  }
  bump(cross, worst);
  return out;
}

Table3 compute_ell(const BasisAtlas& atlas, int lambda, double* cross) {
  double worst = 0;
  Family W = section_family(atlas, 1, -1);       // omega^j
  Family F = section_family(atlas, lambda, -1);  // f^m_lambda
  Family G = section_family(atlas, -lambda, 1);  // f^{-n}_{-lambda} = f_{-lambda,n}
  Table3 out = triple_table(
      W, F, G, [](int j, int m, int n) { return std::make_tuple(j, m, n); }, worst);
  bump(cross, worst);
  return out;
}

void measure_bands(StructureTables& t) {
  t.gamma_band = 0;
  for (const auto& [k, v] : t.gamma)
    if (t.nonzero(v)) t.gamma_band = std::max(t.gamma_band, std::abs(k.first + k.second));
  t.beta_band.clear();
  for (const auto& [l, tab] : t.beta) {
    Band& b = t.beta_band[l];
    for (const auto& [k, v] : tab)
      if (t.nonzero(v)) b.add(std::get<2>(k) - (std::get<1>(k) - std::get<0>(k)));
  }
  t.zeta_band = Band{};
  for (const auto& [k, v] : t.zeta)
    if (t.nonzero(v)) t.zeta_band.add(k.first - k.second);
  t.theta_band.clear();
  for (const auto& [l, tab] : t.theta) {
    Band& b = t.theta_band[l];
    for (const auto& [k, v] : tab)
      if (t.nonzero(v)) b.add(k.first - k.second);
  }
  t.ell_band.clear();
  for (const auto& [l, tab] : t.ell) {
    Band& b = t.ell_band[l];
    for (const auto& [k, v] : tab)
      if (t.nonzero(v)) b.add(std::get<1>(k) - std::get<2>(k) + std::get<0>(k));
  }
}

void compute_q(StructureTables& t, int k_max) {
  t.k_max = k_max;
  t.q.clear();
  t.q_reliable.clear();
  if (t.zeta_band.empty) return;
  const int zlo = t.zeta_band.lo, zhi = t.zeta_band.hi;
  Table2 prev;  // q^{(k-1)}
  for (int j2 = -t.window; j2 <= t.window; j2 += 2) prev[{j2, j2}] = t.kind.one();
  std::pair<int, int> prev_rel{-t.window, t.window};
  for (int k = 1; k <= k_max; ++k) {
    // Row u uses zeta^v_u for v in [u + zlo, u + zhi], each of which needs a reliable row v.
    std::pair<int, int> rel{std::max({-t.window, -t.window - zlo, prev_rel.first - zlo}),
                            std::min({t.window, t.window - zhi, prev_rel.second - zhi})};
    if (rel.first > rel.second) break;
    Table2 cur;
    for (int u2 = rel.first; u2 <= rel.second; u2 += 2) {
      std::map<int, Scalar> row;
      for (int v2 = u2 + zlo; v2 <= u2 + zhi; v2 += 2) {
        Scalar z = t.zeta_at(v2, u2);
        if (!t.nonzero(z)) continue;
        for (int j2 = -t.window; j2 <= t.window; j2 += 2) {
          auto it = prev.find({j2, v2});
          if (it == prev.end()) continue;
          auto [pos, fresh] = row.try_emplace(j2, z * it->second);
          if (!fresh) pos->second += z * it->second;
        }
      }
      for (auto& [j2, v] : row)
        if (!(v.is_exact() && v.is_zero())) cur.emplace(std::make_pair(j2, u2), std::move(v));
    }
    t.q[k] = cur;
    t.q_reliable[k] = rel;
    prev = std::move(cur);
    prev_rel = rel;
  }
}

StructureTables compute_tables(const BasisAtlas& atlas, const TablesConfig& config) {
  StructureTables t;
  t.genus = atlas.genus();
  t.window = atlas.config.window;
  t.kind = atlas.kind();
  t.tol = atlas.config.tol();
  t.source = to_json(atlas.config);
  double cross = 0;
  t.gamma = compute_gamma(atlas, &cross);
  for (int l : config.beta_lambdas) t.beta[l] = compute_beta(atlas, l, &cross);
  t.zeta = compute_zeta(atlas, &cross);
  for (int l : config.theta_lambdas) t.theta[l] = compute_theta(atlas, l, &cross);
  for (int l : config.ell_lambdas) t.ell[l] = compute_ell(atlas, l, &cross);
  t.cross_point = cross;
  measure_bands(t);
  compute_q(t, config.k_max);
  return t;
}

StructureTables compute_tables(const BasisAtlas& atlas) {
  return compute_tables(atlas, default_tables_config(atlas));
}

// ---- checks ----

CheckReport check_gamma(const StructureTables& t) {
  CheckReport r("gamma", t.kind.mode == ScalarMode::exact, t.tol);
  const int g = t.genus;
  for (int n2 = -t.window; n2 <= t.window; n2 += 2)
    for (int m2 = -t.window; m2 <= t.window; m2 += 2) {
      Scalar x = t.gamma_at(n2, m2);
      if (n2 <= m2) r.record(x + t.gamma_at(m2, n2), "antisymmetry " + at2(n2, m2));
      // |n + m| <= g off the middle range, g + 1 inside it
      bool outer = std::abs(n2) > g && std::abs(m2) > g;
      int bound = outer ? 2 * g : 2 * g + 2;
      if (std::abs(n2 + m2) > bound) r.record(x, "vanishing pattern " + at2(n2, m2));
    }
  for (int n2 = -t.window; n2 <= t.window; n2 += 2)
    r.record(t.gamma_at(n2, g), "gamma_{n,g/2} at n = " + index_str(n2));
  r.details["band"] = t.gamma_band;
  return r;
}

CheckReport check_beta(const StructureTables& t) {
  CheckReport r("beta", t.kind.mode == ScalarMode::exact, t.tol);
  const int g = t.genus;
  for (const auto& [l, tab] : t.beta) {
    std::string tag = "lambda=" + std::to_string(l) + " ";
    // A_{g/2} = 1: row g/2 is the identity
    for (int m2 = -t.window; m2 <= t.window; m2 += 2)
      for (int k2 = -t.window; k2 <= t.window; k2 += 2) {
        Scalar v = t.beta_at(l, g, m2, k2);
        if (k2 == m2) v -= t.kind.one();
        r.record(v, tag + "unit row " + at3(g, m2, k2));
      }
    if (!t.beta.count(1 - l)) continue;
    for (const auto& [key, v] : tab) {
      auto [n2, m2, k2] = key;
      if (!t.in_window(-k2) || !t.in_window(-m2)) continue;
      r.record(v - t.beta_at(1 - l, n2, -k2, -m2), tag + "symmetry " + at3(n2, m2, k2));
    }
  }
  for (const auto& [l, b] : t.beta_band) {
    json e = to_json(b);
    if (!b.empty) {
      // widths around the diagonal k = m - n that the genus-0 tables occupy
      e["c1"] = -b.lo / 2.0;
      e["c2"] = b.hi / 2.0;
    }
    r.details["band"][std::to_string(l)] = e;
  }
  return r;
}

CheckReport check_zeta(const StructureTables& t) {
  CheckReport r("zeta", t.kind.mode == ScalarMode::exact, t.tol);
  for (int n2 = -t.window; n2 <= t.window; n2 += 2)
    r.record(t.zeta_at(n2, t.genus), "zeta^n_{g/2} at n = " + index_str(n2));
  // n - 1 <= m <= C + n for zeta^m_n: offsets below -1 are violations
  for (const auto& [key, v] : t.zeta)
    if (key.first - key.second < -2) r.record(v, "lower band edge " + at2(key.first, key.second));
  if (t.zeta_band.empty)
    r.fail("zeta table is empty");
  else
    r.details["C"] = t.zeta_band.hi / 2.0;
  r.details["band"] = to_json(t.zeta_band);
  return r;
}

bool generic_section(int genus, int lambda, int n2) {
  int s2 = s_lambda_doubled(genus, lambda);
  return 2 * expected_lead(genus, lambda, n2, Point::plus) == n2 - s2 &&
         2 * expected_lead(genus, lambda, n2, Point::minus) == -n2 - s2;
}

CheckReport check_ell(const StructureTables& t) {
  CheckReport r("l", t.kind.mode == ScalarMode::exact, t.tol);
  int generic = 0, exceptional = 0;
  for (const auto& [l, tab] : t.ell) {
    for (const auto& [key, v] : tab) {
      auto [j2, m2, n2] = key;
      int off = m2 - n2 + j2;
      if ((off >= -t.genus && off <= t.genus) || !t.nonzero(v)) continue;
      // omega^j = f_{1,-j}, f^m_lambda = f_{lambda,-m}, f^{-n}_{-lambda} = f_{-lambda,n}
      bool plain = generic_section(t.genus, 1, -j2) && generic_section(t.genus, l, -m2) &&
                   generic_section(t.genus, -l, n2);
      ++(plain ? generic : exceptional);
      r.record(v, "lambda=" + std::to_string(l) + " band " + at3(j2, m2, n2) +
                      (plain ? "" : " (exceptional leads)"));
    }
    r.details["band"][std::to_string(l)] = to_json(t.ell_band.at(l));
  }
  r.details["generic_violations"] = generic;
  r.details["exceptional_violations"] = exceptional;
  return r;
}

CheckReport check_q(const StructureTables& t) {
  CheckReport r("q", t.kind.mode == ScalarMode::exact, t.tol);
  const int g = t.genus;
  for (const auto& [k, tab] : t.q) {
    auto [ulo, uhi] = t.q_reliable.at(k);
    // q^{(k),j}_u = 0 for j < g/2 and g/2 <= u <= g/2 + k - 1
    for (int u2 = g; u2 <= g + 2 * (k - 1); u2 += 2) {
      if (u2 < ulo || u2 > uhi) {
        // the chain leaves the window: reported, not judged
        r.details["unverified_rows"].push_back("q^(" + std::to_string(k) + ") row " + index_str(u2));
        continue;
      }
      for (int j2 = -t.window; j2 < g; j2 += 2)
        r.record(t.q_at(k, j2, u2), "q^(" + std::to_string(k) + ") vanishing " + at2(j2, u2));
    }
    if (k == 1)
      for (int u2 = ulo; u2 <= uhi; u2 += 2)
        for (int j2 = -t.window; j2 <= t.window; j2 += 2)
          r.record(t.q_at(1, j2, u2) - t.zeta_at(j2, u2), "q^(1) = zeta " + at2(j2, u2));
    r.details["reliable"][std::to_string(k)] = {index_str(ulo), index_str(uhi)};
  }
  return r;
}

CheckReport check_alpha_symmetry(const StructureTables& t) {
  CheckReport r("alpha symmetry", t.kind.mode == ScalarMode::exact, t.tol);
  if (!t.beta.count(1)) {
    r.fail("no beta table for lambda = 1");
    return r;
  }
  for (const auto& [key, v] : t.beta.at(1)) {
    auto [n2, m2, k2] = key;
    r.record(v - t.alpha_at(m2, k2, n2), "alpha " + at3(m2, n2, k2));
  }
  return r;
}

CheckReport check_cross_point(const StructureTables& t) {
  CheckReport r("P+ / P- agreement", t.kind.mode == ScalarMode::exact, t.tol);
  r.record(t.cross_point, t.cross_point != 0, "max discrepancy");
  return r;
}

CheckReport check_bands(const StructureTables& t) {
  CheckReport r("bands", t.kind.mode == ScalarMode::exact, t.tol);
  for (const CheckReport& c : {check_gamma(t), check_beta(t), check_zeta(t), check_ell(t),
                               check_q(t), check_alpha_symmetry(t), check_cross_point(t)}) {
    r.merge(c);
    r.details[c.name] = c.to_json();
  }
  return r;
}

// ---- expansion identities ----

namespace {

int min_trunc_of(const BasisAtlas& atlas, int lambda, Point p) {
  int t = INT_MAX;
  for (int n2 : atlas.indices()) t = std::min(t, atlas.f(lambda, n2, p).trunc());
  return t;
}

void record_distance(CheckReport& r, const LaurentExpansion& a, const LaurentExpansion& b,
                     const std::string& where) {
  double d = relative_coeff_distance(a, b);
  r.record(d, d > 0, where);
}

}  // namespace

CheckReport check_beta_expansion(const StructureTables& t, const BasisAtlas& atlas, int lambda) {
  CheckReport r("beta expansion lambda=" + std::to_string(lambda), t.kind.mode == ScalarMode::exact,
                t.tol);
  const Band& b = t.beta_band.at(lambda);
  if (b.empty) return r;
  int rows = 0;
  for (int n2 : atlas.indices())
    for (int m2 : atlas.indices()) {
      // A_n f^m = sum_k beta^{lambda,m}_{nk} f^k_lambda, k - (m - n) in the band
      int klo = m2 - n2 + b.lo, khi = m2 - n2 + b.hi;
      if (!t.in_window(klo) || !t.in_window(khi)) continue;
      ++rows;
      for (Point p : kPoints) {
        LaurentExpansion lhs = series_mul(atlas.A(n2, p), atlas.fup(lambda, m2, p));
        std::vector<std::pair<Scalar, const LaurentExpansion*>> terms;
        for (int k2 = klo; k2 <= khi; k2 += 2)
          terms.emplace_back(t.beta_at(lambda, n2, m2, k2), &atlas.fup(lambda, k2, p));
        int trunc = std::min(lhs.trunc(), min_trunc_of(atlas, lambda, p));
        LaurentExpansion rhs = linear_combination(terms, p, lambda, lhs.lead(), trunc, t.kind);
        record_distance(r, lhs.truncated(trunc), rhs,
                 at2(n2, m2) + " at " + to_string(p));
      }
    }
  r.details["rows"] = rows;
  return r;
}

CheckReport check_ell_expansion(const StructureTables& t, const BasisAtlas& atlas, int lambda) {
  CheckReport r("l expansion lambda=" + std::to_string(lambda), t.kind.mode == ScalarMode::exact,
                t.tol);
  if (!atlas.config.has_lambda(lambda + 1)) {
    r.details["skipped"] = "atlas lacks lambda + 1";
    return r;
  }
  const Band& b = t.ell_band.at(lambda);
  if (b.empty) return r;
  int rows = 0;
  for (int j2 : atlas.indices())
    for (int m2 : atlas.indices()) {
      // omega^j f^m_lambda = sum_n l^{jm}_n f^n_{lambda+1}, n = m + j - offset
      int nlo = m2 + j2 - b.hi, nhi = m2 + j2 - b.lo;
      if (!t.in_window(nlo) || !t.in_window(nhi)) continue;
      ++rows;
      for (Point p : kPoints) {
        LaurentExpansion lhs = series_mul(atlas.omega(j2, p), atlas.fup(lambda, m2, p));
        std::vector<std::pair<Scalar, const LaurentExpansion*>> terms;
        for (int n2 = nlo; n2 <= nhi; n2 += 2)
          terms.emplace_back(t.ell_at(lambda, j2, m2, n2), &atlas.fup(lambda + 1, n2, p));
        int trunc = std::min(lhs.trunc(), min_trunc_of(atlas, lambda + 1, p));
        LaurentExpansion rhs = linear_combination(terms, p, lambda + 1, lhs.lead(), trunc, t.kind);
        record_distance(r, lhs.truncated(trunc), rhs,
                 at2(j2, m2) + " at " + to_string(p));
      }
    }
  r.details["rows"] = rows;
  return r;
}

CheckReport check_alpha_products(const StructureTables& t, const BasisAtlas& atlas) {
  CheckReport r("alpha products", t.kind.mode == ScalarMode::exact, t.tol);
  if (!t.beta_band.count(1) || t.beta_band.at(1).empty) {
    r.fail("no alpha table");
    return r;
  }
  const Band& b = t.beta_band.at(1);
  int rows = 0;
  for (int n2 : atlas.indices())
    for (int k2 : atlas.indices()) {
      // A_n A_k = sum_m alpha^m_{nk} A_m; beta offset k - (m - n) in [lo, hi]
      int mlo = n2 + k2 - b.hi, mhi = n2 + k2 - b.lo;
      if (!t.in_window(mlo) || !t.in_window(mhi)) continue;
      ++rows;
      for (Point p : kPoints) {
        LaurentExpansion lhs = series_mul(atlas.A(n2, p), atlas.A(k2, p));
        std::vector<std::pair<Scalar, const LaurentExpansion*>> terms;
        for (int m2 = mlo; m2 <= mhi; m2 += 2)
          terms.emplace_back(t.alpha_at(m2, n2, k2), &atlas.A(m2, p));
        int trunc = std::min(lhs.trunc(), min_trunc_of(atlas, 0, p));
        LaurentExpansion rhs = linear_combination(terms, p, 0, lhs.lead(), trunc, t.kind);
        record_distance(r, lhs.truncated(trunc), rhs,
                 at2(n2, k2) + " at " + to_string(p));
      }
    }
  r.details["rows"] = rows;
  return r;
}

CheckReport check_zeta_expansion(const StructureTables& t, const BasisAtlas& atlas) {
  CheckReport r("zeta expansion", t.kind.mode == ScalarMode::exact, t.tol);
  const Band& b = t.zeta_band;
  if (b.empty) {
    r.fail("zeta table is empty");
    return r;
  }
  int rows = 0;
  for (int n2 : atlas.indices()) {
    // Res(omega^n e dA_u) = -Res(A_u nabla omega^n), since d(A_u omega^n(e)) is exact
    LaurentExpansion x = series_mul(atlas.omega(n2, Point::plus), nabla_field(atlas, Point::plus));
    for (int u2 : atlas.indices()) {
      Scalar direct = residue_of_product(x, d_function(atlas.A(u2, Point::plus)));
      r.record(direct + t.zeta_at(n2, u2), "by parts " + at2(n2, u2));
    }
    // nabla omega^n = sum_u zeta^n_u omega^u, u = n - offset
    int ulo = n2 - b.hi, uhi = n2 - b.lo;
    if (!t.in_window(ulo) || !t.in_window(uhi)) continue;
    ++rows;
    for (Point p : kPoints) {
      LaurentExpansion lhs = lie_derivative(nabla_field(atlas, p), atlas.omega(n2, p));
      std::vector<std::pair<Scalar, const LaurentExpansion*>> terms;
      for (int u2 = ulo; u2 <= uhi; u2 += 2) terms.emplace_back(t.zeta_at(n2, u2), &atlas.omega(u2, p));
      int trunc = std::min(lhs.trunc(), min_trunc_of(atlas, 1, p));
      LaurentExpansion rhs = linear_combination(terms, p, 1, lhs.lead(), trunc, t.kind);
      record_distance(r, lhs.truncated(trunc), rhs,
               "nabla omega^" + index_str(n2) + " at " + to_string(p));
    }
  }
  r.details["rows"] = rows;
  return r;
}

CheckReport check_expansions(const StructureTables& t, const BasisAtlas& atlas) {
  CheckReport r("expansions", t.kind.mode == ScalarMode::exact, t.tol);
  std::vector<CheckReport> parts;
  for (const auto& [l, tab] : t.beta) parts.push_back(check_beta_expansion(t, atlas, l));
  for (const auto& [l, tab] : t.ell) parts.push_back(check_ell_expansion(t, atlas, l));
  parts.push_back(check_alpha_products(t, atlas));
  parts.push_back(check_zeta_expansion(t, atlas));
  for (const auto& c : parts) {
    r.merge(c);
    r.details[c.name] = c.to_json();
  }
  return r;
}

// ---- files ----

namespace {

json entries2(const Table2& t) {
  json a = json::array();
  for (const auto& [k, v] : t) a.push_back({k.first, k.second, v.str()});
  return a;
}

json entries3(const Table3& t) {
  json a = json::array();
  for (const auto& [k, v] : t) a.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), v.str()});
  return a;
}

Scalar parse_entry(const json& e, size_t i, const ScalarKind& kind) {
  Scalar s = Scalar::parse(e.at(i).get<std::string>());
  if (s.mode() != kind.mode) throw SchemaError("table entry has the wrong scalar mode");
  return s;
}

Table2 read2(const json& a, const StructureTables& t) {
  Table2 out;
  for (const json& e : a) {
    int x = e.at(0).get<int>(), y = e.at(1).get<int>();
    if (!t.in_window(x) || !t.in_window(y)) throw SchemaError("table entry outside the window");
    out.emplace(std::make_pair(x, y), parse_entry(e, 2, t.kind));
  }
  return out;
}

Table3 read3(const json& a, const StructureTables& t) {
  Table3 out;
  for (const json& e : a) {
    int x = e.at(0).get<int>(), y = e.at(1).get<int>(), z = e.at(2).get<int>();
    if (!t.in_window(x) || !t.in_window(y) || !t.in_window(z))
      throw SchemaError("table entry outside the window");
    out.emplace(std::make_tuple(x, y, z), parse_entry(e, 3, t.kind));
  }
  return out;
}

}  // namespace

json band_summary(const StructureTables& t) {
  json j;
  j["gamma_band"] = t.gamma_band / 2.0;
  if (t.beta_band.count(1) && !t.beta_band.at(1).empty) {
    j["c1"] = -t.beta_band.at(1).lo / 2.0;
    j["c2"] = t.beta_band.at(1).hi / 2.0;
  }
  if (!t.zeta_band.empty) j["C"] = t.zeta_band.hi / 2.0;
  json ell = json::object();
  for (const auto& [l, b] : t.ell_band)
    if (!b.empty) ell[std::to_string(l)] = {b.lo / 2.0, b.hi / 2.0};
  j["l_band"] = ell;
  return j;
}

json tables_to_json(const StructureTables& t) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "tables";
  j["index_encoding"] = "doubled";
  j["config"] = {{"genus", t.genus},
                 {"window", t.window},
                 {"scalar_mode", t.kind.mode == ScalarMode::exact ? "exact" : "bigcomplex"},
                 {"digits", t.kind.digits},
                 {"tolerance", t.tol},
                 {"sigma", t.sigma},
                 {"k_max", t.k_max}};
  j["source"] = t.source;
  json bands;
  bands["gamma"] = t.gamma_band;
  for (const auto& [l, b] : t.beta_band) bands["beta"][std::to_string(l)] = to_json(b);
  bands["zeta"] = to_json(t.zeta_band);
  for (const auto& [l, b] : t.theta_band) bands["theta"][std::to_string(l)] = to_json(b);
  for (const auto& [l, b] : t.ell_band) bands["l"][std::to_string(l)] = to_json(b);
  for (const auto& [k, r] : t.q_reliable) bands["q_reliable"][std::to_string(k)] = {r.first, r.second};
  bands["cross_point"] = t.cross_point;
  bands["summary"] = band_summary(t);
  j["bands"] = bands;
  json tabs;
  tabs["gamma"] = entries2(t.gamma);
  for (const auto& [l, tab] : t.beta) tabs["beta"][std::to_string(l)] = entries3(tab);
  tabs["zeta"] = entries2(t.zeta);
  for (const auto& [l, tab] : t.theta) tabs["theta"][std::to_string(l)] = entries2(tab);
  for (const auto& [l, tab] : t.ell) tabs["l"][std::to_string(l)] = entries3(tab);
  for (const auto& [k, tab] : t.q) tabs["q"][std::to_string(k)] = entries2(tab);
  j["tables"] = tabs;
  return j;
}

StructureTables tables_from_json(const json& j) {
  StructureTables t;
  try {
    if (j.at("kind") != "tables") throw SchemaError("not a tables file");
    if (j.at("format_version") != 1) throw SchemaError("unsupported tables format version");
    const json& c = j.at("config");
    t.genus = c.at("genus").get<int>();
    t.window = c.at("window").get<int>();
    std::string mode = c.at("scalar_mode").get<std::string>();
    if (mode != "exact" && mode != "bigcomplex") throw SchemaError("unknown scalar mode " + mode);
    t.kind = {mode == "exact" ? ScalarMode::exact : ScalarMode::complex, c.at("digits").get<unsigned>()};
    t.tol = c.at("tolerance").get<double>();
    t.sigma = c.at("sigma").get<int>();
    t.k_max = c.at("k_max").get<int>();
    t.source = j.value("source", json::object());
    const json& tabs = j.at("tables");
    PrecisionScope scope(std::max(t.kind.digits, 20u));
    t.gamma = read2(tabs.at("gamma"), t);
    t.zeta = read2(tabs.at("zeta"), t);
    auto each = [&](const char* name, auto&& f) {
      if (!tabs.contains(name)) return;
      for (const auto& [key, v] : tabs.at(name).items()) f(std::stoi(key), v);
    };
    each("beta", [&](int l, const json& v) { t.beta[l] = read3(v, t); });
    each("theta", [&](int l, const json& v) { t.theta[l] = read2(v, t); });
    each("l", [&](int l, const json& v) { t.ell[l] = read3(v, t); });
    each("q", [&](int k, const json& v) { t.q[k] = read2(v, t); });
    const json& bands = j.at("bands");
    t.cross_point = bands.at("cross_point").get<double>();
    if (bands.contains("q_reliable"))
      for (const auto& [key, v] : bands.at("q_reliable").items())
        t.q_reliable[std::stoi(key)] = {v.at(0).get<int>(), v.at(1).get<int>()};
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed tables file: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw SchemaError("malformed table key");
  }
  // Bands are re-measured from the entries so a tampered band record cannot mask bad data.
  measure_bands(t);
  for (const auto& [k, tab] : t.q)
    if (!t.q_reliable.count(k)) throw SchemaError("q table without a reliable range");
  return t;
}

void save_tables(const StructureTables& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << dump_document(tables_to_json(t));
}

StructureTables load_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("tables file is not JSON: ") + e.what());
  }
  return tables_from_json(j);
}

}  // namespace knva
