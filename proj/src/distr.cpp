#include "knva/distr.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <set>

#include "knva/errors.hpp"

namespace knva {

namespace {

constexpr Point kPoints[] = {Point::plus, Point::minus};

std::string at2(int a, int b) { return "(" + index_str(a) + ", " + index_str(b) + ")"; }

bool exact_mode(const StructureTables& t) { return t.kind.mode == ScalarMode::exact; }

// The doubled indices of [-range2, range2] with the parity of the genus.
std::vector<int> index_range(int genus, int range2) {
  std::vector<int> out;
  int lo = -range2;
  if (!parity_ok(lo, genus)) ++lo;
  for (int n2 = lo; n2 <= range2; n2 += 2) out.push_back(n2);
  return out;
}

}  // namespace

// ---- kernels ----

Scalar KernelCoefficients::at(int n2, int m2, const ScalarKind& kind) const {
  auto it = entries.find({n2, m2});
  return it == entries.end() ? kind.zero() : it->second;
}

int KernelCoefficients::band() const {
  int b = -1;
  for (const auto& [nm, c] : entries) b = std::max(b, std::abs(nm.first + nm.second));
  return b;
}

json KernelCoefficients::to_json() const {
  json e = json::array();
  for (const auto& [nm, c] : entries)
    e.push_back({{"n", index_str(nm.first)}, {"m", index_str(nm.second)}, {"value", c.str()}});
  return {{"left_weight", left_weight}, {"right_weight", right_weight}, {"entries", e}};
}

KernelCoefficients delta_kernel(const BasisAtlas& atlas, int lambda) {
  KernelCoefficients k{lambda, 1 - lambda, {}};
  for (int n2 : atlas.indices()) k.entries.emplace(std::make_pair(-n2, n2), atlas.kind().one());
  return k;
}

KernelCoefficients dP_delta_kernel(const StructureTables& t) {
  KernelCoefficients k{1, 1, {}};
  for (const auto& [nm, c] : t.gamma)
    if (t.nonzero(c)) k.entries.emplace(nm, c);
  return k;
}

CheckReport check_delta_partition(const BasisAtlas& atlas, int lambda) {
  CheckReport r("delta partition lambda=" + std::to_string(lambda), true, 0);
  const int g = atlas.genus();
  KernelCoefficients k = delta_kernel(atlas, lambda);
  std::set<int> plus, minus;  // i_{P,Q} S covers n >= g/2, i_{Q,P} S covers n < g/2
  for (const auto& [nm, c] : k.entries) {
    int n2 = nm.second;
    if (nm.first != -n2) r.fail("off-diagonal entry " + at2(nm.first, nm.second));
    if (c != atlas.kind().one()) r.fail("entry " + at2(nm.first, nm.second) + " is not 1");
    (n2 >= g ? plus : minus).insert(n2);
  }
  for (int n2 : atlas.indices()) {
    int hits = static_cast<int>(plus.count(n2) + minus.count(n2));
    if (hits != 1) r.fail("index " + index_str(n2) + " covered " + std::to_string(hits) + " times");
  }
  r.details["plus"] = plus.size();
  r.details["minus"] = minus.size();
  return r;
}

CheckReport check_dP_delta(const BasisAtlas& atlas, const StructureTables& t) {
  CheckReport r("dP delta", exact_mode(t), t.tol);
  const int gb = t.gamma_band;
  int rows = 0, skipped = 0;
  for (int n2 : atlas.indices()) {
    // gamma_{mn} != 0 only for |m + n| <= band
    int mlo = -n2 - gb, mhi = -n2 + gb;
    if (!t.in_window(mlo) || !t.in_window(mhi)) {
      ++skipped;
      continue;
    }
    ++rows;
    for (Point p : kPoints) {
      LaurentExpansion lhs = d_function(atlas.A(n2, p));
      std::vector<std::pair<Scalar, const LaurentExpansion*>> terms;
      int lead = lhs.lead(), trunc = lhs.trunc();
      for (int m2 = mlo; m2 <= mhi; m2 += 2) {
        Scalar c = t.gamma_at(m2, n2);
        if (!t.nonzero(c)) continue;
        const LaurentExpansion& w = atlas.omega(m2, p);
        terms.emplace_back(c, &w);
        lead = std::min(lead, w.lead());
        trunc = std::min(trunc, w.trunc());
      }
      LaurentExpansion rhs = linear_combination(terms, p, 1, lead, trunc, t.kind);
      double d = relative_coeff_distance(lhs.truncated(trunc), rhs);
      r.record(d, d > 0, "dA_" + index_str(n2) + " at " + to_string(p));
    }
  }
  r.details["rows"] = rows;
  r.details["rows_beyond_window"] = skipped;
  return r;
}

// ---- Lie algebra data ----

int LieAlgebraData::label_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ConfigError("Lie algebra '" + name + "' has no basis element '" + label + "'");
  return static_cast<int>(it - labels.begin());
}

void LieAlgebraData::validate() const {
  const int d = dimension();
  if (d == 0) throw ConfigError("Lie algebra '" + name + "' is empty");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw ConfigError("Lie algebra '" + name + "' has repeated labels");
  auto sz = [&](size_t s) { return static_cast<int>(s) == d; };
  bool shape = sz(structure.size()) && sz(form.size());
  for (int a = 0; shape && a < d; ++a) {
    shape = sz(structure[a].size()) && sz(form[a].size());
    for (int b = 0; shape && b < d; ++b) shape = sz(structure[a][b].size());
  }
  if (!shape) throw ConfigError("Lie algebra '" + name + "' has tables of the wrong shape");
  auto bad = [&](const std::string& what) {
    throw ConfigError("Lie algebra '" + name + "' violates " + what);
  };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (form[a][b] != form[b][a]) bad("symmetry of the form at (" + labels[a] + ", " + labels[b] + ")");
      for (int c = 0; c < d; ++c) {
        if (structure[a][b][c] != -structure[b][a][c])
          bad("antisymmetry at [" + labels[a] + ", " + labels[b] + "]");
        // ([a,b] | c) = (a | [b,c])
        Rational lhs = 0, rhs = 0;
        for (int e = 0; e < d; ++e) {
          lhs += structure[a][b][e] * form[e][c];
          rhs += structure[b][c][e] * form[a][e];
        }
        if (lhs != rhs) bad("invariance of the form at (" + labels[a] + ", " + labels[b] + ", " + labels[c] + ")");
        for (int o = 0; o < d; ++o) {
          Rational j = 0;
          for (int e = 0; e < d; ++e)
            j += structure[a][b][e] * structure[e][c][o] + structure[b][c][e] * structure[e][a][o] +
                 structure[c][a][e] * structure[e][b][o];
          if (j != 0) bad("the Jacobi identity at (" + labels[a] + ", " + labels[b] + ", " + labels[c] + ")");
        }
      }
    }
}

namespace {

LieAlgebraData empty_lie(std::string name, std::vector<std::string> labels) {
  LieAlgebraData l;
  l.name = std::move(name);
  l.labels = std::move(labels);
  const size_t d = l.labels.size();
  l.structure.assign(d, std::vector<std::vector<Rational>>(d, std::vector<Rational>(d, Rational(0))));
  l.form.assign(d, std::vector<Rational>(d, Rational(0)));
  return l;
}

void set_bracket(LieAlgebraData& l, int a, int b, int c, const Rational& v) {
  l.structure[a][b][c] = v;
  l.structure[b][a][c] = -v;
}

Rational rational_value(const json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) {
      Scalar s = Scalar::parse(v.get<std::string>());
      if (!s.is_exact()) throw ConfigError(where + ": Lie algebra constants must be exact");
      return s.rational();
    }
  } catch (const ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected an integer or a scalar string");
}

}  // namespace

LieAlgebraData LieAlgebraData::abelian() {
  LieAlgebraData l = empty_lie("abelian", {"x"});
  l.form[0][0] = 1;
  return l;
}

LieAlgebraData LieAlgebraData::sl2() {
  LieAlgebraData l = empty_lie("sl2", {"e", "h", "f"});
  const int e = 0, h = 1, f = 2;
  set_bracket(l, e, f, h, 1);
  set_bracket(l, h, e, e, 2);
  set_bracket(l, h, f, f, -2);
  l.form[e][f] = l.form[f][e] = 1;
  l.form[h][h] = 2;
  return l;
}

json to_json(const LieAlgebraData& lie) {
  json brackets = json::array(), form = json::array();
  const int d = lie.dimension();
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = 0; c < d; ++c)
        if (lie.structure[a][b][c] != 0)
          brackets.push_back({{"a", lie.labels[a]}, {"b", lie.labels[b]}, {"c", lie.labels[c]},
                              {"value", Scalar(lie.structure[a][b][c]).str()}});
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b)
      if (lie.form[a][b] != 0)
        form.push_back({{"a", lie.labels[a]}, {"b", lie.labels[b]}, {"value", Scalar(lie.form[a][b]).str()}});
  return {{"name", lie.name}, {"labels", lie.labels}, {"brackets", brackets}, {"form", form}};
}

LieAlgebraData lie_from_json(const json& j) {
  LieAlgebraData l;
  try {
    l = empty_lie(j.value("name", std::string("custom")), j.at("labels").get<std::vector<std::string>>());
    for (const json& e : j.value("brackets", json::array())) {
      int a = l.label_index(e.at("a").get<std::string>()), b = l.label_index(e.at("b").get<std::string>());
      int c = l.label_index(e.at("c").get<std::string>());
      if (a == b) throw ConfigError("bracket [" + l.labels[a] + ", " + l.labels[a] + "] must vanish");
      set_bracket(l, a, b, c, rational_value(e.at("value"), "bracket"));
    }
    for (const json& e : j.value("form", json::array())) {
      int a = l.label_index(e.at("a").get<std::string>()), b = l.label_index(e.at("b").get<std::string>());
      l.form[a][b] = l.form[b][a] = rational_value(e.at("value"), "form");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("Lie algebra file: ") + e.what());
  }
  l.validate();
  return l;
}

LieAlgebraData load_lie(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  try {
    return lie_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not a JSON document: " + e.what());
  }
}

LieAlgebraData lie_by_name(const std::string& name_or_path) {
  if (name_or_path == "abelian") return LieAlgebraData::abelian();
  if (name_or_path == "sl2") return LieAlgebraData::sl2();
  return load_lie(name_or_path);
}

// ---- the affine algebra ----

void AffineCombination::add(int label, int n2, const Scalar& c) {
  if (c.is_exact() && c.is_zero()) return;
  auto [it, fresh] = terms.try_emplace({label, n2}, c);
  if (fresh) return;
  it->second += c;
  if (it->second.is_exact() && it->second.is_zero()) terms.erase(it);
}

AffineCombination& AffineCombination::operator+=(const AffineCombination& o) {
  for (const auto& [k, c] : o.terms) add(k.first, k.second, c);
  central += o.central;
  return *this;
}

AffineCombination AffineCombination::scaled(const Scalar& c) const {
  AffineCombination out(kind_of(central));
  for (const auto& [k, x] : terms) out.add(k.first, k.second, x * c);
  out.central = central * c;
  return out;
}

double AffineCombination::max_abs() const {
  double m = central.abs();
  for (const auto& [k, c] : terms) m = std::max(m, c.abs());
  return m;
}

std::string AffineCombination::str(const LieAlgebraData& lie) const {
  std::string s;
  auto sep = [&] { return s.empty() ? "" : " + "; };
  for (const auto& [k, c] : terms) s += sep() + ("(" + c.str() + ") " + lie.labels[k.first] + "_{" + index_str(k.second) + "}");
  if (!central.is_zero()) s += sep() + ("(" + central.str() + ") K");
  return s.empty() ? "0" : s;
}

AffineCombination affine_bracket(const StructureTables& t, const LieAlgebraData& lie, int a,
                                 int n2, int b, int m2) {
  AffineCombination out(t.kind);
  const int d = lie.dimension();
  bool loop = false;
  for (int c = 0; c < d; ++c) loop = loop || lie.structure[a][b][c] != 0;
  if (loop) {
    // A_n A_m = sum_k alpha^k_{nm} A_k with k - (n + m) in minus the beta^{(1)} band
    const Band& band = t.beta_band.at(1);
    for (int k2 = n2 + m2 - band.hi; !band.empty && k2 <= n2 + m2 - band.lo; k2 += 2) {
      Scalar al = t.alpha_at(k2, n2, m2);
      if (!t.nonzero(al)) continue;
      for (int c = 0; c < d; ++c)
        if (lie.structure[a][b][c] != 0) out.add(c, k2, al * t.kind.from_rational(lie.structure[a][b][c]));
    }
  }
  if (lie.form[a][b] != 0)
    out.central = t.gamma_at(n2, m2) * t.kind.from_rational(lie.form[a][b]) * static_cast<long>(t.sigma);
  return out;
}

AffineCombination affine_bracket(const StructureTables& t, const LieAlgebraData& lie,
                                 const AffineCombination& x, const AffineCombination& y) {
  AffineCombination out(t.kind);
  for (const auto& [xa, cx] : x.terms)
    for (const auto& [yb, cy] : y.terms)
      out += affine_bracket(t, lie, xa.first, xa.second, yb.first, yb.second).scaled(cx * cy);
  return out;
}

namespace {

AffineCombination generator(const StructureTables& t, int a, int n2) {
  AffineCombination x(t.kind);
  x.add(a, n2, t.kind.one());
  return x;
}

void record_combination(CheckReport& r, const AffineCombination& c, const std::string& where) {
  r.record(c.max_abs(), !c.terms.empty() || !c.central.is_zero(), where);
}

std::string element(const LieAlgebraData& lie, int a, int n2) {
  return lie.labels[a] + "_{" + index_str(n2) + "}";
}

}  // namespace

CheckReport check_affine_jacobi(const StructureTables& t, const LieAlgebraData& lie, int range2) {
  CheckReport r("affine Jacobi " + lie.name, exact_mode(t), t.tol);
  const int d = lie.dimension();
  const auto idx = index_range(t.genus, range2);
  long triples = 0;
  try {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int n2 : idx)
            for (int m2 : idx)
              for (int k2 : idx) {
                AffineCombination x = generator(t, a, n2), y = generator(t, b, m2), z = generator(t, c, k2);
                AffineCombination j = affine_bracket(t, lie, affine_bracket(t, lie, x, y), z);
                j += affine_bracket(t, lie, affine_bracket(t, lie, y, z), x);
                j += affine_bracket(t, lie, affine_bracket(t, lie, z, x), y);
                ++triples;
                record_combination(r, j, "(" + element(lie, a, n2) + ", " + element(lie, b, m2) + ", " +
                                             element(lie, c, k2) + ")");
              }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  r.details["triples"] = triples;
  return r;
}

CheckReport check_affine_antisymmetry(const StructureTables& t, const LieAlgebraData& lie,
                                      int range2) {
  CheckReport r("affine antisymmetry " + lie.name, exact_mode(t), t.tol);
  const int d = lie.dimension();
  const auto idx = index_range(t.genus, range2);
  try {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int n2 : idx)
          for (int m2 : idx) {
            AffineCombination s = affine_bracket(t, lie, a, n2, b, m2);
            s += affine_bracket(t, lie, b, m2, a, n2);
            record_combination(r, s, "[" + element(lie, a, n2) + ", " + element(lie, b, m2) + "]");
          }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  return r;
}

CheckReport check_bracket_corollary(const StructureTables& t, const LieAlgebraData& lie,
                                    int range2, const BasisAtlas* atlas) {
  CheckReport r("bracket corollary " + lie.name, exact_mode(t), t.tol);
  CheckReport sym("alpha symmetry", exact_mode(t), t.tol);
  CheckReport cen("central term", exact_mode(t), t.tol);
  const int d = lie.dimension();
  const auto idx = index_range(t.genus, range2);
  const KernelCoefficients dp = dP_delta_kernel(t);
  const Band& band = t.beta_band.at(1);
  try {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int n2 : idx)
          for (int m2 : idx) {
            AffineCombination lhs = affine_bracket(t, lie, a, n2, b, m2);
            // [a,b](P) Delta(P,Q): omega^k(P) A_m(P) = sum_n Res(A_n omega^k A_m) omega^n(P)
            AffineCombination rhs(t.kind);
            for (int k2 = n2 + m2 - band.hi; !band.empty && k2 <= n2 + m2 - band.lo; k2 += 2) {
              Scalar al = t.alpha_at(k2, m2, n2);
              for (int c = 0; c < d; ++c)
                if (lie.structure[a][b][c] != 0)
                  rhs.add(c, k2, al * t.kind.from_rational(lie.structure[a][b][c]));
            }
            const std::string where = "(" + element(lie, a, n2) + ", " + element(lie, b, m2) + ")";
            AffineCombination loop_diff = lhs;
            loop_diff.central = t.kind.zero();
            loop_diff += rhs.scaled(t.kind.from_int(-1));
            record_combination(sym, loop_diff, where);
            // (a|b) d_P Delta, with the bracket's sign calibration sigma
            Scalar want = dp.at(n2, m2, t.kind) * t.kind.from_rational(lie.form[a][b]) * static_cast<long>(t.sigma);
            cen.record(lhs.central - want, where);
          }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  // gamma terms are banded: |n + m| <= g + 1
  if (dp.band() > 2 * t.genus + 2) cen.fail("d_P Delta band " + index_str(dp.band()) + " exceeds g + 1");
  std::vector<CheckReport> parts{sym, cen};
  if (atlas) parts.push_back(check_dP_delta(*atlas, t));
  for (const CheckReport& c : parts) {
    r.merge(c);
    r.details[c.name] = c.to_json();
  }
  r.details["form_factor"] = "carried";
  return r;
}

}  // namespace knva
