#include "knva/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "knva/errors.hpp"

namespace knva {

// ---------------------------------------------------------------- config

double AtlasConfig::tol() const {
  if (mode == ScalarMode::exact) return 0;
  if (tolerance > 0) return tolerance;
  return std::pow(10.0, -static_cast<double>(precision) / 2);
}

void AtlasConfig::validate() const {
  if (genus < 0) throw ConfigError("genus must be non-negative");
  if (window <= 0) throw ConfigError("window must be positive");
  if (!parity_ok(window, genus))
    throw ConfigError("window " + index_str(window) + " is not an index for genus " +
                      std::to_string(genus));
  if (trunc < min_trunc(window))
    throw ConfigError("trunc " + std::to_string(trunc) + " below the required " +
                      std::to_string(min_trunc(window)) + " for window " + index_str(window));
  for (int l : {-1, 0, 1})
    if (!has_lambda(l)) throw ConfigError("lambda range must contain -1, 0 and 1");
  if (genus == 0 && mode != ScalarMode::exact)
    throw ConfigError("genus 0 atlases are built in exact arithmetic");
  if (genus == 1 && mode != ScalarMode::complex)
    throw ConfigError("genus 1 atlases are built in BigComplex arithmetic");
  if (mode == ScalarMode::complex && precision < 10) throw ConfigError("precision below 10 digits");
  if (genus == 1 && (tau.empty() || p_plus.empty() || p_minus.empty()))
    throw ConfigError("genus 1 requires tau, p+ and p-");
}

std::vector<int> AtlasConfig::indices() const {
  std::vector<int> out;
  for (int d = -window; d <= window; d += 2) out.push_back(d);
  return out;
}

bool AtlasConfig::has_lambda(int lambda) const {
  return std::find(lambdas.begin(), lambdas.end(), lambda) != lambdas.end();
}

json to_json(const AtlasConfig& c) {
  json j;
  j["genus"] = c.genus;
  j["window"] = c.window;
  j["trunc"] = c.trunc;
  j["lambdas"] = c.lambdas;
  j["scalar_mode"] = c.mode == ScalarMode::exact ? "exact" : "bigcomplex";
  j["precision"] = c.precision;
  j["tolerance"] = c.tolerance;
  if (c.genus == 1) j["geometry"] = {{"tau", c.tau}, {"p_plus", c.p_plus}, {"p_minus", c.p_minus}};
  return j;
}

AtlasConfig atlas_config_from_json(const json& j) {
  try {
    AtlasConfig c;
    c.genus = j.at("genus").get<int>();
    c.window = j.at("window").get<int>();
    c.trunc = j.at("trunc").get<int>();
    c.lambdas = j.at("lambdas").get<std::vector<int>>();
    std::string mode = j.at("scalar_mode").get<std::string>();
    if (mode == "exact")
      c.mode = ScalarMode::exact;
    else if (mode == "bigcomplex")
      c.mode = ScalarMode::complex;
    else
      throw SchemaError("unknown scalar_mode '" + mode + "'");
    c.precision = j.value("precision", 60u);
    c.tolerance = j.value("tolerance", 0.0);
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      c.tau = g.at("tau").get<std::string>();
      c.p_plus = g.at("p_plus").get<std::string>();
      c.p_minus = g.at("p_minus").get<std::string>();
    }
    std::sort(c.lambdas.begin(), c.lambdas.end());
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("atlas config: ") + e.what());
  }
}

BigComplex parse_complex_literal(const std::string& text, unsigned digits) {
  PrecisionScope scope(digits);
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ParseError("empty complex literal");
  auto real_of = [&](const std::string& t) -> Real {
    if (t.empty() || t == "+") return Real(1);
    if (t == "-") return Real(-1);
    try {
      size_t used = 0;
      (void)std::stod(t, &used);
      if (used != t.size()) throw ParseError("bad number '" + t + "'");
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("bad number '" + t + "' in '" + text + "'");
    }
    return Real(t[0] == '+' ? t.substr(1) : t);
  };
  if (s.back() != 'i') return {real_of(s), Real(0), digits};
  std::string body = s.substr(0, s.size() - 1);
  // split at the last sign that is not part of an exponent and not leading
  size_t split = std::string::npos;
  for (size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) return {Real(0), real_of(body), digits};
  return {real_of(body.substr(0, split)), real_of(body.substr(split)), digits};
}

// ---------------------------------------------------------------- leads

int expected_lead(int genus, int lambda, int n2, Point p) {
  const int g = genus;
  int s2 = s_lambda_doubled(g, lambda);
  int generic = p == Point::plus ? (n2 - s2) / 2 : (-n2 - s2) / 2;
  bool special_lambda = g >= 2 ? (lambda == 0 || lambda == 1) : g == 1;
  if (!special_lambda) return generic;
  // At genus 1 every weight follows the function pattern, since f_{lambda,n} = A_n (dz)^lambda.
  int family = g == 1 ? (lambda >= 1 ? 1 : 0) : lambda;
  if (family == 0) {
    if (n2 == g) return 0;
    if (n2 >= -g && n2 < g) return p == Point::plus ? (n2 - g) / 2 : (-n2 - g) / 2 - 1;
    return p == Point::plus ? (n2 - g) / 2 : (-n2 - g) / 2;
  }
  // lambda = 1: f_{1,n} = omega^{-n}; write m = -n
  int m2 = -n2;
  if (m2 == g) return -1;
  if (m2 >= -g && m2 < g) return p == Point::plus ? (-m2 + g) / 2 - 1 : (m2 + g) / 2;
  return p == Point::plus ? (-m2 + g) / 2 - 1 : (m2 + g) / 2 - 1;
}

// ---------------------------------------------------------------- atlas access

const LaurentExpansion& BasisAtlas::f(int lambda, int n2, Point p) const {
  auto it = sections.find({lambda, n2});
  if (it == sections.end())
    throw WindowError("section f_{" + std::to_string(lambda) + "," + index_str(n2) +
                      "} is outside the atlas");
  return p == Point::plus ? it->second.first : it->second.second;
}

namespace {

bool is_nonzero(const Scalar& s, double tol) { return tol > 0 ? s.abs() > tol : !s.is_zero(); }

}  // namespace

void BasisAtlas::check_structure() const {
  const double tol = config.tol();
  for (const auto& [key, pair] : sections) {
    auto [lambda, n2] = key;
    if (!parity_ok(n2, genus()))
      throw InvariantViolation("index " + index_str(n2) + " has the wrong parity");
    for (Point p : {Point::plus, Point::minus}) {
      const LaurentExpansion& x = p == Point::plus ? pair.first : pair.second;
      std::string where = "f_{" + std::to_string(lambda) + "," + index_str(n2) + "} at " + to_string(p);
      if (x.weight() != lambda) throw InvariantViolation(where + ": weight mismatch");
      if (x.point() != p) throw InvariantViolation(where + ": point mismatch");
      int lead = expected_lead(genus(), lambda, n2, p);
      if (x.lead() != lead)
        throw InvariantViolation(where + ": lead " + std::to_string(x.lead()) + ", expected " +
                                 std::to_string(lead));
      if (x.trunc() < lead || !is_nonzero(x.coeff(lead), tol))
        throw InvariantViolation(where + ": vanishing leading coefficient");
    }
  }
  if (!has(0, genus())) throw InvariantViolation("A_{g/2} missing from the atlas");
  for (Point p : {Point::plus, Point::minus}) {
    const LaurentExpansion& one = A(genus(), p);
    for (int e = one.lead(); e <= one.trunc(); ++e) {
      Scalar want = kind().from_int(e == 0 ? 1 : 0);
      if (distance(one.coeff(e), want) > tol || (tol == 0 && !(one.coeff(e) == want)))
        throw InvariantViolation("A_{g/2} is not the constant function 1 (at " + to_string(p) + ")");
    }
  }
  for (int n2 : indices()) {
    if (!has(0, n2)) continue;
    const LaurentExpansion& a = A(n2, Point::plus);
    Scalar lc = a.coeff(a.lead());
    if (distance(lc, kind().one()) > tol || (tol == 0 && !(lc == kind().one())))
      throw InvariantViolation("alpha^0_{" + index_str(n2) + ",+} differs from 1");
  }
}

namespace {

void set_normalizations(BasisAtlas& atlas) {
  atlas.normalizations.clear();
  for (const auto& [key, pair] : atlas.sections) {
    atlas.normalizations.emplace(std::make_tuple(key.first, key.second, Point::plus),
                                 pair.first.coeff(pair.first.lead()));
    atlas.normalizations.emplace(std::make_tuple(key.first, key.second, Point::minus),
                                 pair.second.coeff(pair.second.lead()));
  }
}

}  // namespace

// ---------------------------------------------------------------- genus 0

BasisAtlas build_genus0(const AtlasConfig& config) {
  config.validate();
  if (config.genus != 0) throw ConfigError("build_genus0 needs genus 0");
  BasisAtlas atlas;
  atlas.config = config;
  const ScalarKind kind = config.kind();
  for (int lambda : config.lambdas) {
    for (int n2 : config.indices()) {
      int n = n2 / 2;
      auto plus = LaurentExpansion::monomial(Point::plus, lambda, n - lambda, kind.one(), config.trunc);
      Scalar sign = kind.from_int(lambda % 2 == 0 ? 1 : -1);
      auto minus = LaurentExpansion::monomial(Point::minus, lambda, -n - lambda, sign, config.trunc);
      atlas.sections.emplace(std::make_pair(lambda, n2), std::make_pair(plus, minus));
    }
  }
  set_normalizations(atlas);
  atlas.check_structure();
  return atlas;
}

// ---------------------------------------------------------------- genus 1

namespace {

BigComplex czero(unsigned digits) { return {Real(0), Real(0), digits}; }
BigComplex cnum(long v, unsigned digits) { return {Real(v), Real(0), digits}; }

LaurentExpansion from_big(Point p, int lead, std::vector<BigComplex> c, int trunc, unsigned digits) {
  ScalarKind kind{ScalarMode::complex, digits};
  std::vector<Scalar> coeffs;
  for (int e = lead; e <= trunc; ++e) {
    size_t k = static_cast<size_t>(e - lead);
    coeffs.emplace_back(k < c.size() ? c[k] : czero(digits));
  }
  return LaurentExpansion(p, 0, lead, std::move(coeffs), kind);
}

LaurentExpansion nth_derivative(LaurentExpansion x, int j) {
  for (int i = 0; i < j; ++i) x = series_derivative(x);
  return x;
}

struct LocalBlocks {
  LaurentExpansion one, zdiff;
  std::vector<LaurentExpansion> wpp, wpm;  // wp^(j)(z - p+), wp^(j)(z - p-)
};

// Solves M x = b in place by Gaussian elimination with partial pivoting.
std::vector<BigComplex> solve(std::vector<std::vector<BigComplex>> M, std::vector<BigComplex> b,
                              unsigned digits, const std::string& what) {
  const size_t n = b.size();
  Real tiny = pow(Real(10), -static_cast<long>(digits) / 2);
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    Real best = norm(M[col][col]);
    for (size_t r = col + 1; r < n; ++r) {
      Real v = norm(M[r][col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < tiny) throw SingularSystem("singular linear system while building " + what);
    std::swap(M[col], M[piv]);
    std::swap(b[col], b[piv]);
    for (size_t r = col + 1; r < n; ++r) {
      BigComplex fct = M[r][col] / M[col][col];
      for (size_t c = col; c < n; ++c) M[r][c] = M[r][c] - fct * M[col][c];
      b[r] = b[r] - fct * b[col];
    }
  }
  std::vector<BigComplex> x(n, czero(digits));
  for (size_t i = n; i-- > 0;) {
    BigComplex s = b[i];
    for (size_t c = i + 1; c < n; ++c) s = s - M[i][c] * x[c];
    x[i] = s / M[i][i];
  }
  return x;
}

BigComplex coeff_big(const LaurentExpansion& x, int e) { return x.coeff(e).big_complex(); }

LaurentExpansion combine(const LocalBlocks& B, const BlockCombination& c, unsigned digits) {
  ScalarKind kind{ScalarMode::complex, digits};
  LaurentExpansion acc = series_scale(B.one, Scalar(c.constant));
  if (!(c.zeta_coeff.re == 0 && c.zeta_coeff.im == 0))
    acc = series_add(acc, series_scale(B.zdiff, Scalar(c.zeta_coeff)));
  for (size_t j = 0; j < c.wp_plus.size(); ++j)
    acc = series_add(acc, series_scale(B.wpp[j], Scalar(c.wp_plus[j])));
  for (size_t j = 0; j < c.wp_minus.size(); ++j)
    acc = series_add(acc, series_scale(B.wpm[j], Scalar(c.wp_minus[j])));
  (void)kind;
  return acc;
}

// Drops the numerically vanishing coefficients below the expected lead.
LaurentExpansion force_lead(const LaurentExpansion& x, int lead, double tol, const std::string& what) {
  for (int e = x.lead(); e < lead; ++e)
    if (x.coeff(e).abs() > tol)
      throw SingularSystem(what + ": coefficient of z^" + std::to_string(e) +
                           " does not vanish (insufficient precision)");
  std::vector<Scalar> c;
  for (int e = lead; e <= x.trunc(); ++e) c.push_back(x.coeff(e));
  return LaurentExpansion(x.point(), x.weight(), lead, std::move(c), x.kind());
}

LaurentExpansion with_weight(const LaurentExpansion& x, int weight) {
  return LaurentExpansion(x.point(), weight, x.lead(), x.coeffs(), x.kind());
}

}  // namespace

BasisAtlas build_genus1(const AtlasConfig& config) {
  config.validate();
  if (config.genus != 1) throw ConfigError("build_genus1 needs genus 1");
  const unsigned digits = config.working_digits();
  PrecisionScope scope(digits);
  const int T = config.trunc;
  const int W = config.window;  // doubled, odd
  const int max_pole = (W + 1) / 2;
  const int K = std::max(0, max_pole - 2);  // highest wp derivative used
  const double tol = config.tol();

  BigComplex tau = parse_complex_literal(config.tau, digits);
  BigComplex pp = parse_complex_literal(config.p_plus, digits);
  BigComplex pm = parse_complex_literal(config.p_minus, digits);
  if (tau.im <= 0) throw ConfigError("modulus must satisfy Im tau > 0");
  Lattice L = make_lattice(tau, digits);
  BigComplex d = pp - pm;
  // k (p+ - p-) in the lattice makes k P- - k P+ principal, and then no function with a pole of
  // order k at p- and a zero of order exactly k - 1 at p+ exists.
  for (int k = 1; k <= max_pole + 1; ++k) {
    BigComplex z0;
    long a, b;
    reduce(L, scale(d, Real(k)), z0, a, b);
    if (static_cast<double>(norm(z0)) < 1e-8) {
      if (k == 1) throw ConfigError("p+ and p- coincide on the torus");
      throw ConfigError("p+ - p- is a " + std::to_string(k) +
                        "-torsion point of the lattice; the points are not in general position");
    }
  }

  // Local series data.
  const int order = T + K + 4;
  auto c = wp_laurent(L, order / 2 + 3);
  auto p = wp_taylor(L, d, order + 1);
  BigComplex zd = wzeta(L, d);

  // wp(t) around 0: exponents -2 .. order
  std::vector<BigComplex> w0(static_cast<size_t>(order + 3), czero(digits));
  for (size_t k = 0; k < c.size(); ++k) {
    int e = 2 * static_cast<int>(k) - 2;
    if (e <= order) w0[static_cast<size_t>(e + 2)] = c[k];
  }
  // zeta(t): 1/t - sum_{k>=2} c_k t^{2k-1} / (2k-1), exponents -1 .. order
  std::vector<BigComplex> z0(static_cast<size_t>(order + 2), czero(digits));
  z0[0] = cnum(1, digits);
  for (size_t k = 2; k < c.size(); ++k) {
    int e = 2 * static_cast<int>(k) - 1;
    if (e <= order) z0[static_cast<size_t>(e + 1)] = scale(c[k], Real(Real(-1) / (2 * static_cast<long>(k) - 1)));
  }
  // wp(d + t) and wp(t - d) = wp(d - t)
  std::vector<BigComplex> pd(p.begin(), p.end()), pmd(p.size(), czero(digits));
  for (size_t k = 0; k < p.size(); ++k) pmd[k] = k % 2 ? -p[k] : p[k];
  // zeta(d + t) = zeta(d) - sum p_k t^{k+1}/(k+1); zeta(t - d) = -zeta(d) + sum p_k (-t)^{k+1}/(k+1)
  std::vector<BigComplex> zdp(static_cast<size_t>(order + 1), czero(digits)), zdm = zdp;
  zdp[0] = zd;
  zdm[0] = -zd;
  for (size_t k = 0; k + 1 < zdp.size() && k < p.size(); ++k) {
    BigComplex term = scale(p[k], Real(Real(1) / static_cast<long>(k + 1)));
    zdp[k + 1] = -term;
    zdm[k + 1] = (k + 1) % 2 ? -term : term;
  }

  auto make_blocks = [&](Point pt) {
    const int top = T + K + 1;
    LaurentExpansion one = from_big(pt, 0, {cnum(1, digits)}, T, digits);
    LaurentExpansion zeta0 = from_big(pt, -1, z0, T, digits);
    LaurentExpansion wp0 = from_big(pt, -2, w0, top, digits);
    LaurentExpansion zother = from_big(pt, 0, pt == Point::plus ? zdp : zdm, T, digits);
    LaurentExpansion wpother = from_big(pt, 0, pt == Point::plus ? pd : pmd, top, digits);
    LocalBlocks B{one, zeta0, {}, {}};
    // zdiff = zeta(z - p+) - zeta(z - p-)
    if (pt == Point::plus)
      B.zdiff = series_add(zeta0, series_scale(zother, Scalar::complex(Real(-1), Real(0), digits)));
    else
      B.zdiff = series_add(zother, series_scale(zeta0, Scalar::complex(Real(-1), Real(0), digits)));
    for (int j = 0; j <= K; ++j) {
      LaurentExpansion at0 = nth_derivative(wp0, j).truncated(T);
      LaurentExpansion atd = nth_derivative(wpother, j).truncated(T);
      B.wpp.push_back(pt == Point::plus ? at0 : atd);
      B.wpm.push_back(pt == Point::plus ? atd : at0);
    }
    return B;
  };
  LocalBlocks Bp = make_blocks(Point::plus);
  LocalBlocks Bm = make_blocks(Point::minus);

  Genus1Recipe recipe{L, pp, pm, {}, {}};
  std::map<int, std::pair<LaurentExpansion, LaurentExpansion>> A;

  auto store = [&](int n2, const BlockCombination& comb) {
    std::string what = "A_" + index_str(n2);
    LaurentExpansion ap = force_lead(combine(Bp, comb, digits), expected_lead(1, 0, n2, Point::plus), tol, what);
    LaurentExpansion am = force_lead(combine(Bm, comb, digits), expected_lead(1, 0, n2, Point::minus), tol, what);
    recipe.functions[n2] = comb;
    A.emplace(n2, std::make_pair(ap, am));
  };

  for (int n2 = 1; n2 <= W; n2 += 2) {
    BlockCombination comb{cnum(1, digits), czero(digits), {}, {}};
    if (n2 > 1) {
      // pole of order N at p-, zero of order N-1 at p+, leading coefficient 1 at p+
      const int N = (n2 + 1) / 2;
      std::vector<const LaurentExpansion*> basis{&Bp.one};
      for (int j = 0; j <= N - 2; ++j) basis.push_back(&Bp.wpm[static_cast<size_t>(j)]);
      std::vector<std::vector<BigComplex>> M(static_cast<size_t>(N));
      std::vector<BigComplex> rhs(static_cast<size_t>(N), czero(digits));
      for (int e = 0; e < N; ++e)
        for (auto* b : basis) M[static_cast<size_t>(e)].push_back(coeff_big(*b, e));
      rhs[static_cast<size_t>(N - 1)] = cnum(1, digits);
      auto x = solve(M, rhs, digits, "A_" + index_str(n2));
      comb.constant = x[0];
      comb.wp_minus.assign(x.begin() + 1, x.end());
    }
    store(n2, comb);
  }
  for (int n2 = -3; n2 >= -W; n2 -= 2) {
    // pole of order N at p+ with leading coefficient 1, zero of order N-1 at p-
    const int N = (-n2 + 1) / 2;
    std::vector<std::vector<BigComplex>> M(static_cast<size_t>(N));
    std::vector<BigComplex> rhs(static_cast<size_t>(N), czero(digits));
    for (int e = 0; e < N - 1; ++e) {
      M[static_cast<size_t>(e)].push_back(coeff_big(Bm.one, e));
      for (int j = 0; j <= N - 2; ++j) M[static_cast<size_t>(e)].push_back(coeff_big(Bm.wpp[static_cast<size_t>(j)], e));
    }
    M[static_cast<size_t>(N - 1)].push_back(coeff_big(Bp.one, -N));
    for (int j = 0; j <= N - 2; ++j) M[static_cast<size_t>(N - 1)].push_back(coeff_big(Bp.wpp[static_cast<size_t>(j)], -N));
    rhs[static_cast<size_t>(N - 1)] = cnum(1, digits);
    auto x = solve(M, rhs, digits, "A_" + index_str(n2));
    BlockCombination comb{x[0], czero(digits), {}, {}};
    comb.wp_plus.assign(x.begin() + 1, x.end());
    store(n2, comb);
  }

  // rho = (zeta(z-p+) - zeta(z-p-) + c) dz with purely imaginary periods:
  // the periods are c - eta1 d and c tau - eta2 d (mod 2 pi i).
  BigComplex e1d = L.eta1 * d, e2d = L.eta2 * d;
  Real x = e1d.re;
  Real y = (x * L.tau.re - e2d.re) / L.tau.im;
  BigComplex crho{x, y, digits};
  recipe.rho = BlockCombination{crho, cnum(1, digits), {}, {}};
  LaurentExpansion rho_p = force_lead(combine(Bp, recipe.rho, digits), -1, tol, "rho");
  LaurentExpansion rho_m = force_lead(combine(Bm, recipe.rho, digits), -1, tol, "rho");
  // A_{-1/2} = zdiff + c' with Res(A_{-1/2} rho) = 0
  {
    BlockCombination comb{czero(digits), cnum(1, digits), {}, {}};
    LaurentExpansion zp = Bp.zdiff;
    Scalar r = residue_of_product(zp, with_weight(rho_p, 1));
    comb.constant = (-r).big_complex();
    store(-1, comb);
  }

  BasisAtlas atlas;
  atlas.config = config;
  for (int lambda : config.lambdas) {
    for (int n2 : config.indices()) {
      const auto& a = A.at(n2);
      bool use_rho = lambda >= 1 && n2 == -1;
      const LaurentExpansion& ap = use_rho ? rho_p : a.first;
      const LaurentExpansion& am = use_rho ? rho_m : a.second;
      atlas.sections.emplace(std::make_pair(lambda, n2),
                             std::make_pair(with_weight(ap, lambda), with_weight(am, lambda)));
    }
  }
  atlas.recipe = std::move(recipe);
  set_normalizations(atlas);
  atlas.check_structure();
  return atlas;
}

BasisAtlas build_atlas(const AtlasConfig& config) {
  if (config.genus == 0) return build_genus0(config);
  if (config.genus == 1) return build_genus1(config);
  throw ConfigError("genus >= 2 requires --load (atlases are imported from files)");
}

// ---------------------------------------------------------------- checks

CheckReport verify_duality(const BasisAtlas& atlas) {
  const auto& cfg = atlas.config;
  CheckReport rep("duality", cfg.mode == ScalarMode::exact, cfg.tol());
  double cross = 0;
  long pairs = 0;
  for (int lambda : cfg.lambdas) {
    if (!cfg.has_lambda(1 - lambda)) continue;
    for (int n2 : cfg.indices())
      for (int m2 : cfg.indices()) {
        std::string where = "lambda=" + std::to_string(lambda) + " n=" + index_str(n2) + " m=" + index_str(m2);
        try {
          Scalar rp = residue_of_product(atlas.f(lambda, n2, Point::plus), atlas.f(1 - lambda, -m2, Point::plus));
          Scalar rm = residue_of_product(atlas.f(lambda, n2, Point::minus), atlas.f(1 - lambda, -m2, Point::minus));
          Scalar delta = atlas.kind().from_int(n2 == m2 ? 1 : 0);
          rep.record(rp - delta, where);
          Scalar diff = rp - rm;
          cross = std::max(cross, diff.abs());
          rep.record(diff, where + " (P+/P- cross)");
          ++pairs;
        } catch (const WindowError& e) {
          rep.fail(where + ": " + e.what());
        }
      }
  }
  rep.details["pairs"] = pairs;
  rep.details["max_cross_residual"] = cross;
  return rep;
}

namespace {

// wp^(j)(u) for j = 0..K from the q-series at u (no lattice reduction).
std::vector<BigComplex> wp_derivatives_series(const Lattice& L, const BigComplex& u, int K) {
  std::vector<BigComplex> p(static_cast<size_t>(std::max(K + 1, 2)), czero(L.digits));
  p[0] = wp_series(L, u);
  p[1] = wp_prime_series(L, u);
  // Taylor coefficients, then multiply by j!
  std::vector<BigComplex> t(p.size(), czero(L.digits));
  t[0] = p[0];
  t[1] = p[1];
  BigComplex half_g2 = scale(L.g2, Real(Real(1) / 2));
  for (int k = 0; k + 2 <= K; ++k) {
    BigComplex s = czero(L.digits);
    for (int i = 0; i <= k; ++i) s = s + t[i] * t[k - i];
    s = scale(s, Real(6));
    if (k == 0) s = s - half_g2;
    t[k + 2] = scale(s, Real(Real(1) / ((k + 2) * (k + 1))));
  }
  Real fact = 1;
  for (int j = 0; j <= K; ++j) {
    if (j > 0) fact *= j;
    p[j] = scale(t[j], fact);
  }
  return p;
}

BigComplex evaluate(const Genus1Recipe& R, const BlockCombination& c, const BigComplex& z) {
  const Lattice& L = R.lattice;
  BigComplex v = c.constant;
  if (!(c.zeta_coeff.re == 0 && c.zeta_coeff.im == 0))
    v = v + c.zeta_coeff * (wzeta_series(L, z - R.p_plus) - wzeta_series(L, z - R.p_minus));
  if (!c.wp_plus.empty()) {
    auto w = wp_derivatives_series(L, z - R.p_plus, static_cast<int>(c.wp_plus.size()) - 1);
    for (size_t j = 0; j < c.wp_plus.size(); ++j) v = v + c.wp_plus[j] * w[j];
  }
  if (!c.wp_minus.empty()) {
    auto w = wp_derivatives_series(L, z - R.p_minus, static_cast<int>(c.wp_minus.size()) - 1);
    for (size_t j = 0; j < c.wp_minus.size(); ++j) v = v + c.wp_minus[j] * w[j];
  }
  return v;
}

}  // namespace

CheckReport check_periodicity(const BasisAtlas& atlas) {
  CheckReport rep("periodicity", false, atlas.config.tol());
  if (!atlas.recipe) {
    rep.details["skipped"] = "no genus-1 construction data";
    return rep;
  }
  const Genus1Recipe& R = *atlas.recipe;
  const unsigned digits = R.lattice.digits;
  PrecisionScope scope(digits);
  // Third point below both marked points so that z and z + tau stay inside the
  // convergence strip of the q-series around each p.
  Real mid = (R.p_plus.im + R.p_minus.im) / 2;
  BigComplex z{Real(R.p_plus.re / 3 + Real("0.137")), Real(mid - R.lattice.tau.im / 2), digits};
  BigComplex one = cnum(1, digits);
  auto check = [&](const BlockCombination& comb, const std::string& name) {
    BigComplex v = evaluate(R, comb, z);
    double scale_ = 1 + static_cast<double>(norm(v));
    rep.record(static_cast<double>(norm(evaluate(R, comb, z + one) - v)) / scale_, true, name + " shift 1");
    rep.record(static_cast<double>(norm(evaluate(R, comb, z + R.lattice.tau) - v)) / scale_, true,
               name + " shift tau");
  };
  for (const auto& [n2, comb] : R.functions) check(comb, "A_" + index_str(n2));
  check(R.rho, "rho/dz");
  return rep;
}

// ---------------------------------------------------------------- files

std::string dump_document(const json& j) { return j.dump(1) + "\n"; }

json atlas_to_json(const BasisAtlas& atlas) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "atlas";
  j["config"] = to_json(atlas.config);
  json secs = json::array();
  for (const auto& [key, pair] : atlas.sections)
    for (const LaurentExpansion* x : {&pair.first, &pair.second}) {
      json s;
      s["lambda"] = key.first;
      s["doubled_index"] = key.second;
      s["point"] = to_string(x->point());
      s["lead"] = x->lead();
      s["trunc"] = x->trunc();
      json c = json::array();
      for (const auto& v : x->coeffs()) c.push_back(v.str());
      s["coeffs"] = std::move(c);
      secs.push_back(std::move(s));
    }
  j["sections"] = std::move(secs);
  json norms = json::array();
  for (const auto& [key, v] : atlas.normalizations)
    norms.push_back({{"lambda", std::get<0>(key)},
                     {"doubled_index", std::get<1>(key)},
                     {"point", to_string(std::get<2>(key))},
                     {"value", v.str()}});
  j["normalizations"] = std::move(norms);
  return j;
}

BasisAtlas atlas_from_json(const json& j) {
  BasisAtlas atlas;
  try {
    if (j.at("format_version").get<int>() != 1) throw SchemaError("unsupported format_version");
    if (j.contains("kind") && j.at("kind") != "atlas") throw SchemaError("document is not an atlas");
    atlas.config = atlas_config_from_json(j.at("config"));
    const ScalarKind kind = atlas.config.kind();
    std::map<std::pair<int, int>, std::map<Point, LaurentExpansion>> tmp;
    for (const json& s : j.at("sections")) {
      int lambda = s.at("lambda").get<int>();
      int n2 = s.at("doubled_index").get<int>();
      Point p = parse_point(s.at("point").get<std::string>());
      int lead = s.at("lead").get<int>();
      int trunc = s.at("trunc").get<int>();
      std::vector<Scalar> coeffs;
      for (const json& c : s.at("coeffs")) {
        Scalar v = Scalar::parse(c.get<std::string>());
        if (v.mode() != kind.mode) throw SchemaError("coefficient scalar mode differs from config");
        coeffs.push_back(std::move(v));
      }
      if (static_cast<int>(coeffs.size()) != trunc - lead + 1)
        throw SchemaError("coeffs length does not match lead/trunc");
      if (!tmp[{lambda, n2}].emplace(p, LaurentExpansion(p, lambda, lead, std::move(coeffs), kind)).second)
        throw SchemaError("duplicate section");
    }
    for (auto& [key, m] : tmp) {
      if (m.size() != 2) throw SchemaError("section without both points");
      atlas.sections.emplace(key, std::make_pair(m.at(Point::plus), m.at(Point::minus)));
    }
    if (j.contains("normalizations"))
      for (const json& n : j.at("normalizations"))
        atlas.normalizations.emplace(
            std::make_tuple(n.at("lambda").get<int>(), n.at("doubled_index").get<int>(),
                            parse_point(n.at("point").get<std::string>())),
            Scalar::parse(n.at("value").get<std::string>()));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("atlas: ") + e.what());
  }
  for (int l : atlas.config.lambdas)
    for (int n2 : atlas.config.indices())
      if (!atlas.has(l, n2))
        throw SchemaError("section f_{" + std::to_string(l) + "," + index_str(n2) + "} missing");
  atlas.check_structure();
  CheckReport dual = verify_duality(atlas);
  if (!dual.passed)
    throw InvariantViolation("duality check failed on load: " +
                             (dual.findings.empty() ? std::string("?") : dual.findings.front()));
  return atlas;
}

void save_atlas(const BasisAtlas& atlas, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << dump_document(atlas_to_json(atlas));
}

BasisAtlas load_atlas(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("not a JSON document: ") + e.what());
  }
  return atlas_from_json(j);
}

}  // namespace knva
