#include "knva/vertex.hpp"

#include <algorithm>
#include <optional>
#include <cctype>
#include <numeric>
#include <set>

#include "knva/errors.hpp"
#include "knva/index.hpp"

namespace knva {

// ---- FieldSpec ----

std::string FieldSpec::str() const {
  if (orders.empty()) return "id";
  std::string s = ":";
  for (size_t i = 0; i < orders.size(); ++i) {
    if (i) s += " . ";
    s += "D" + std::to_string(orders[i]) + " a";
  }
  return s + ":";
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int parse_factor(const std::string& text, const std::string& whole) {
  std::string f = trim(text);
  if (f == "a") return 0;
  if (f.size() >= 3 && f[0] == 'D' && f.substr(f.size() - 1) == "a") {
    std::string num = trim(f.substr(1, f.size() - 2));
    if (!num.empty() && std::all_of(num.begin(), num.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return std::stoi(num);
  }
  throw ParseError("field literal '" + whole + "': bad factor '" + f + "'");
}

}  // namespace

FieldSpec parse_field(const std::string& text) {
  std::string s = trim(text);
  if (s == "id") return FieldSpec{};
  if (s == "a") return FieldSpec{{0}};
  if (s.size() < 2 || s.front() != ':' || s.back() != ':')
    throw ParseError("field literal '" + text + "': expected ':...:'");
  std::string body = s.substr(1, s.size() - 2);
  FieldSpec spec;
  size_t start = 0;
  while (true) {
    size_t dot = body.find('.', start);
    spec.orders.push_back(parse_factor(body.substr(start, dot - start), text));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return spec;
}

FieldSpec Y(const Monomial& state) {
  FieldSpec spec;
  for (int p : state.parts) {
    if (p < 1) throw InvariantViolation("monomial parts must be positive");
    spec.orders.push_back(p - 1);
  }
  return spec;
}

Monomial target_monomial(const FieldSpec& spec) {
  Monomial m;
  for (int k : spec.orders) m.parts.push_back(k + 1);
  std::sort(m.parts.rbegin(), m.parts.rend());
  return m;
}

int vacuum_index(int genus, int weight) { return -s_lambda_doubled(genus, weight); }

// ---- Word and CoefficientOperator ----

std::string Word::str(int genus) const {
  std::string s;
  auto put = [&](int j2) {
    if (!s.empty()) s += " ";
    s += "a_{" + index_str(j2) + "}";
  };
  for (int p : creators.parts) put(creator_index(genus, p));
  for (int j2 : annihilators) put(j2);
  return s.empty() ? "1" : s;
}

CoefficientOperator CoefficientOperator::identity(ScalarKind kind) {
  CoefficientOperator op(kind);
  op.words_.emplace(Word{}, kind.one());
  return op;
}

void CoefficientOperator::add(const Word& w, const Scalar& c) {
  if (c.is_exact() && c.is_zero()) return;
  auto [it, fresh] = words_.try_emplace(w, c);
  if (fresh) return;
  it->second += c;
  if (it->second.is_exact() && it->second.is_zero()) words_.erase(it);
}

void CoefficientOperator::add(const CoefficientOperator& op, const Scalar& c) {
  for (const auto& [w, x] : op.words_) add(w, x * c);
}

void CoefficientOperator::prune(double floor) {
  if (kind_.mode == ScalarMode::exact) return;
  std::erase_if(words_, [&](const auto& kv) { return kv.second.abs() <= floor; });
}

namespace {

std::vector<int> creator_word(const FockSpace& fock, const Monomial& m) {
  std::vector<int> w;
  w.reserve(m.parts.size());
  for (int p : m.parts) w.push_back(creator_index(fock.genus(), p));
  return w;
}

}  // namespace

FockVector CoefficientOperator::apply(const FockSpace& fock, const FockVector& v) const {
  FockVector out(v.kind());
  for (const auto& [w, c] : words_) {
    FockVector cur = v;
    for (int j2 : w.annihilators) {
      cur = fock.apply(j2, cur);
      if (cur.is_zero()) break;
    }
    if (cur.is_zero()) continue;
    cur = fock.apply_word(creator_word(fock, w.creators), cur);
    out.add(cur, c);
  }
  out.prune(fock.noise_floor());
  return out;
}

std::string CoefficientOperator::str(int genus) const {
  if (words_.empty()) return "0";
  if (words_.size() == 1 && words_.begin()->first == Word{} && words_.begin()->second.abs() == 1 &&
      words_.begin()->second == kind_.one())
    return "id";
  std::string s;
  for (const auto& [w, c] : words_) {
    if (!s.empty()) s += " + ";
    s += "(" + c.str() + ") " + w.str(genus);
  }
  return s;
}

json CoefficientOperator::to_json(int genus) const {
  json a = json::array();
  for (const auto& [w, c] : words_) a.push_back({{"word", w.str(genus)}, {"coeff", c.str()}});
  return a;
}

namespace {

int removal_cost(const StructureTables& t, const std::vector<int>& annihilators) {
  long s = 0;
  for (int j2 : annihilators) s += t.min_removable_part(j2);
  return s > INT_MAX ? INT_MAX : static_cast<int>(s);
}

}  // namespace

// (C1 A1)(C2 A2) = sum over subsets S of A1 of C1 [(prod_S a) C2 v0] (A1 \ S) A2, since every
// annihilator kills v0 and all brackets are scalars.
CoefficientOperator multiply(const FockSpace& fock, const CoefficientOperator& a,
                             const CoefficientOperator& b, int budget) {
  const StructureTables& t = fock.tables();
  CoefficientOperator out(a.kind());
  for (const auto& [w1, c1] : a.words()) {
    const size_t r = w1.annihilators.size();
    for (const auto& [w2, c2] : b.words()) {
      Scalar c12 = c1 * c2;
      FockVector base = FockVector::basis(w2.creators, fock.kind());
      for (unsigned mask = 0; mask < (1u << r); ++mask) {
        std::vector<int> rest = w2.annihilators;
        FockVector st = base;
        for (size_t i = 0; i < r && !st.is_zero(); ++i) {
          if (mask & (1u << i)) st = fock.apply(w1.annihilators[i], st);
          else rest.push_back(w1.annihilators[i]);
        }
        if (st.is_zero()) continue;
        if (removal_cost(t, rest) > budget) continue;
        std::sort(rest.begin(), rest.end());
        std::vector<int> left = creator_word(fock, w1.creators);
        for (const auto& [m, x] : st.terms()) {
          FockVector full = fock.apply_word(left, FockVector::basis(m, fock.kind()));
          for (const auto& [m2, y] : full.terms()) out.add(Word{m2, rest}, c12 * x * y);
        }
      }
    }
  }
  out.prune(fock.noise_floor());
  return out;
}

// ---- FieldContext ----

FieldContext::FieldContext(const StructureTables& tables)
    : t_(&tables), fock_(tables), zero_(tables.kind) {}

const Band& FieldContext::ell_band(int lambda) const {
  auto it = t_->ell_band.find(lambda);
  if (it == t_->ell_band.end())
    throw WindowError("no l table for weight " + std::to_string(lambda));
  return it->second;
}

CoefficientOperator FieldContext::generator_field_coefficient(int k, int u2, int budget) const {
  const StructureTables& t = *t_;
  const int g = genus();
  if (!parity_ok(u2, g)) throw InvariantViolation("index " + std::to_string(u2) + " has the wrong parity");
  auto key = std::make_pair(k, u2);
  auto it = rows_.find(key);
  if (it == rows_.end()) {
    if (!t.in_window(u2)) throw WindowError("a^(" + std::to_string(k) + ") at " + index_str(u2) + " is outside the window");
    CoefficientOperator row(kind());
    for (const auto& [j2, c] : t.q_row(k, u2)) {
      if (j2 == g) continue;  // a_{g/2} acts as zero on V
      if (j2 < g) {
        if (u2 >= g && t.nonzero(c))
          throw InvariantViolation("a^(" + std::to_string(k) + ")_" + index_str(u2) +
                                   " has a creation component a_" + index_str(j2));
        row.add(Word{Monomial{{part_of(g, j2)}}, {}}, c);
      } else {
        row.add(Word{Monomial{}, {j2}}, c);
      }
    }
    it = rows_.emplace(key, std::move(row)).first;
  }
  if (budget == INT_MAX) return it->second;
  CoefficientOperator out(kind());
  for (const auto& [w, c] : it->second.words())
    if (removal_cost(t, w.annihilators) <= budget) out.add(w, c);
  return out;
}

int FieldContext::generator_threshold(int k, int budget) const {
  if (budget < 0) return INT_MIN;
  const StructureTables& t = *t_;
  const int g = genus();
  // annihilators a_{g/2 + h} with h2 <= h2max can act on degree <= budget
  int h2max = 2 * budget + t.gamma_band - 2 * g;
  if (budget < 1 || h2max < 2) return g - 2;
  int zlo = k == 0 ? 0 : t.zeta_band.lo;
  return g + h2max - k * zlo;
}

int FieldContext::nop_threshold(int k, int inner_weight, const InnerThreshold& inner_thr,
                                int budget) const {
  if (budget < 0) return INT_MIN;
  const Band& L = ell_band(inner_weight);
  if (L.empty) return INT_MIN;
  const int g = genus();
  int best = INT_MIN;
  int tb = inner_thr(budget);
  if (tb != INT_MIN) best = tb + (g - 2) - L.lo;
  if (budget >= 1) {
    int tb1 = inner_thr(budget - 1);
    int ta = generator_threshold(k, budget);
    if (tb1 != INT_MIN && ta >= g) best = std::max(best, tb1 + ta - L.lo);
  }
  return best;
}

int FieldContext::threshold(const FieldSpec& spec, int budget) const {
  if (budget < 0) return INT_MIN;
  if (spec.is_identity()) return -genus();
  if (spec.weight() == 1) return generator_threshold(spec.orders[0], budget);
  FieldSpec rest = spec.rest();
  return nop_threshold(spec.orders[0], rest.weight(),
                       [&](int d) { return threshold(rest, d); }, budget);
}

// :a^{(k)} B:_n = sum_{j < g/2, m} l a^{(k)}_j B_m + sum_{j >= g/2, m} l B_m a^{(k)}_j.
// The first sum needs B_m at the full budget; in the second a^{(k)}_j removes at least one
// unit of degree first, so B_m is needed one budget lower.
CoefficientOperator FieldContext::nop_impl(int k, int inner_weight, const Inner& inner,
                                           const InnerThreshold& inner_thr, int n2, int budget) {
  CoefficientOperator out(kind());
  if (budget < 0) return out;
  const StructureTables& t = *t_;
  const Band& L = ell_band(inner_weight);
  if (L.empty) return out;
  const int g = genus();

  int tb = inner_thr(budget);
  if (tb != INT_MIN) {
    for (int m2 = n2 + L.lo - (g - 2); m2 <= tb; m2 += 2) {
      const CoefficientOperator& bm = inner(m2, budget);
      if (bm.is_zero()) continue;
      for (int off = L.lo; off <= L.hi; off += 2) {
        int j2 = n2 - m2 + off;
        if (j2 > g - 2) continue;
        Scalar l = t.ell_at(inner_weight, j2, m2, n2);
        if (!t.nonzero(l)) continue;
        out.add(multiply(fock_, generator_field_coefficient(k, j2), bm, budget), l);
      }
    }
  }
  if (budget >= 1) {
    int tb1 = inner_thr(budget - 1);
    int ta = generator_threshold(k, budget);
    if (tb1 != INT_MIN) {
      for (int j2 = g; j2 <= ta; j2 += 2) {
        CoefficientOperator aj = generator_field_coefficient(k, j2, budget);
        if (aj.is_zero()) continue;
        for (int off = L.lo; off <= L.hi; off += 2) {
          int m2 = n2 - j2 + off;
          if (m2 > tb1) continue;
          const CoefficientOperator& bm = inner(m2, budget - 1);
          if (bm.is_zero()) continue;
          Scalar l = t.ell_at(inner_weight, j2, m2, n2);
          if (!t.nonzero(l)) continue;
          out.add(multiply(fock_, bm, aj, budget), l);
        }
      }
    }
  }
  out.prune(fock_.noise_floor());
  return out;
}

CoefficientOperator FieldContext::nop_coefficient(int k, const FieldSpec& inner, int n2,
                                                  int budget) {
  return nop_impl(
      k, inner.weight(), [&](int m2, int d) -> const CoefficientOperator& { return coefficient(inner, m2, d); },
      [&](int d) { return threshold(inner, d); }, n2, budget);
}

const CoefficientOperator& FieldContext::coefficient(const FieldSpec& spec, int n2, int budget) {
  if (!parity_ok(n2, genus())) throw InvariantViolation("index " + std::to_string(n2) + " has the wrong parity");
  auto key = std::make_tuple(spec.orders, n2, budget);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  CoefficientOperator op(kind());
  if (budget >= 0) {
    if (spec.is_identity()) {
      if (n2 == -genus()) op = CoefficientOperator::identity(kind());
    } else if (spec.weight() == 1) {
      if (n2 <= threshold(spec, budget)) op = generator_field_coefficient(spec.orders[0], n2, budget);
    } else {
      op = nop_coefficient(spec.orders[0], spec.rest(), n2, budget);
    }
  }
  return cache_.emplace(key, std::move(op)).first->second;
}

FockVector FieldContext::apply(const FieldSpec& spec, int n2, const FockVector& v) {
  if (v.is_zero()) return FockVector(kind());
  return coefficient(spec, n2, degree(v)).apply(fock_, v);
}

const CoefficientOperator& FieldContext::two_point_coefficient(const FieldSpec& p,
                                                               const FieldSpec& q, int n2,
                                                               int m2, int budget) {
  if (p.is_identity()) return n2 == -genus() ? coefficient(q, m2, budget) : zero_;
  auto key = std::make_tuple(p.orders, q.orders, n2, m2, budget);
  auto it = two_cache_.find(key);
  if (it != two_cache_.end()) return it->second;
  FieldSpec rest = p.rest();
  CoefficientOperator op = nop_impl(
      p.orders[0], rest.weight(),
      [&](int t2, int d) -> const CoefficientOperator& { return two_point_coefficient(rest, q, t2, m2, d); },
      [&](int d) { return threshold(rest, d); }, n2, budget);
  return two_cache_.emplace(key, std::move(op)).first->second;
}

Scalar FieldContext::contraction(int i, int u2, int j, int v2) const {
  const StructureTables& t = *t_;
  Scalar s = kind().zero();
  auto ru = t.q_row(i, u2);
  auto rv = t.q_row(j, v2);
  for (const auto& [x2, cx] : ru)
    for (const auto& [y2, cy] : rv) {
      if (std::abs(x2 + y2) > t.gamma_band) continue;
      Scalar gm = t.gamma_at(x2, y2);
      if (t.nonzero(gm)) s += cx * cy * gm;
    }
  return s * static_cast<long>(t.sigma);
}

std::pair<int, int> FieldContext::contraction_band(int i, int j) const {
  const StructureTables& t = *t_;
  int zlo = t.zeta_band.empty ? 0 : t.zeta_band.lo;
  int zhi = t.zeta_band.empty ? 0 : t.zeta_band.hi;
  // x - u in [i zlo, i zhi], y - v in [j zlo, j zhi], |x + y| <= gamma band
  return {-t.gamma_band - (i + j) * zhi, t.gamma_band - (i + j) * zlo};
}

// ---- checks ----

std::vector<FockVector> basis_states(ScalarKind kind, int max_degree) {
  std::vector<FockVector> out;
  for (const Monomial& m : monomials_up_to(max_degree)) out.push_back(FockVector::basis(m, kind));
  return out;
}

namespace {

bool exact_mode(const FieldContext& ctx) { return ctx.kind().mode == ScalarMode::exact; }

std::string state_name(const FockVector& v) {
  if (v.terms().size() == 1 && v.terms().begin()->second.abs() == 1) return v.terms().begin()->first.str();
  return v.str();
}

void record_vec(CheckReport& r, const FockVector& diff, const std::string& where) {
  r.record(diff.max_abs(), !diff.is_zero(), where);
}

bool negligible(const FieldContext& ctx, const FockVector& v) {
  return exact_mode(ctx) ? v.is_zero() : v.max_abs() <= ctx.tables().tol;
}

// First doubled index >= lo with the parity of the genus.
int first_index(int lo, int genus) { return parity_ok(lo, genus) ? lo : lo + 1; }

}  // namespace

CheckReport check_vacuum(FieldContext& ctx, const FieldSpec& spec) {
  const StructureTables& t = ctx.tables();
  CheckReport r("vacuum " + spec.str(), exact_mode(ctx), t.tol);
  const int n0 = vacuum_index(ctx.genus(), spec.weight());
  FockVector v0 = FockVector::vacuum(ctx.kind());
  r.details["s_index"] = index_str(n0);
  try {
    for (int n2 = n0 + 2; n2 <= t.window; n2 += 2) {
      FockVector w = ctx.coefficient(spec, n2, 0).apply(ctx.fock(), v0);
      record_vec(r, w, "n = " + index_str(n2) + " does not kill v0");
    }
    FockVector w = ctx.coefficient(spec, n0, 0).apply(ctx.fock(), v0);
    Monomial target = target_monomial(spec);
    Scalar c = w.coeff(target);
    r.details["target"] = target.str();
    r.details["C"] = c.str();
    bool zero = t.kind.mode == ScalarMode::exact ? c.is_zero() : c.abs() <= t.tol;
    if (zero) r.fail("C = 0 at n = " + index_str(n0));
    FockVector tail(ctx.kind());
    for (const auto& [m, x] : w.terms()) {
      if (m == target) continue;
      tail.add(m, x);
      if (m.degree() >= target.degree())
        r.record(x.abs(), !x.is_zero(), "term " + m.str() + " is not of lower degree");
    }
    r.details["tail"] = tail.to_json();
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  return r;
}

CheckReport check_translation(FieldContext& ctx, const FieldSpec& spec,
                              const std::vector<FockVector>& states, int range2) {
  const StructureTables& t = ctx.tables();
  const FockSpace& fock = ctx.fock();
  CheckReport r("translation " + spec.str(), exact_mode(ctx), t.tol);
  const int M = spec.weight();
  auto band = t.theta_band.find(M);
  if (band == t.theta_band.end()) {
    r.fail("no theta table for weight " + std::to_string(M));
    return r;
  }
  // A failing index is classified: if the defect is c_u v on every basis test state, c_u is
  // recorded under "central_defect".
  json central = json::object();
  bool all_central = true;
  try {
    for (int u2 = first_index(-range2, ctx.genus()); u2 <= range2; u2 += 2) {
      std::optional<Scalar> c;
      bool scalar = true, defect = false;
      for (const FockVector& v : states) {
        FockVector lhs(ctx.kind());
        if (!band->second.empty)
          for (int off = band->second.lo; off <= band->second.hi; off += 2) {
            int n2 = u2 + off;
            Scalar th = t.theta_at(M, n2, u2);
            if (!t.nonzero(th)) continue;
            lhs.add(ctx.apply(spec, n2, v), th);
          }
        FockVector rhs = fock.apply_T(ctx.apply(spec, u2, v)) - ctx.apply(spec, u2, fock.apply_T(v));
        FockVector d = lhs - rhs;
        record_vec(r, d, "u = " + index_str(u2) + ", v = " + state_name(v));
        if (negligible(ctx, d) || v.terms().size() != 1) continue;
        defect = true;
        if (!c) c = d.coeff(v.terms().begin()->first) / v.terms().begin()->second;
        if (!negligible(ctx, d - v.scaled(*c))) scalar = false;
      }
      if (!defect) continue;
      all_central = all_central && scalar;
      if (scalar) central[index_str(u2)] = c->str();
    }
    if (!central.empty()) {
      r.details["central_defect"] = central;
      r.details["defect_is_central"] = all_central;
    }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  return r;
}

namespace {

Rational binomial(int n, int k) {
  Rational b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

json band_json(int lo, int hi) { return json::array({index_str(lo), index_str(hi)}); }

}  // namespace

CheckReport check_locality(FieldContext& ctx, const FieldSpec& a, const FieldSpec& b,
                           const std::vector<FockVector>& states, int range2, int max_n) {
  const StructureTables& t = ctx.tables();
  const int g = ctx.genus();
  CheckReport r("locality " + a.str() + " , " + b.str(), exact_mode(ctx), t.tol);
  std::map<std::tuple<int, int, size_t>, FockVector> kcache;
  auto K = [&](int n2, int m2, size_t s) -> const FockVector& {
    auto key = std::make_tuple(n2, m2, s);
    auto it = kcache.find(key);
    if (it != kcache.end()) return it->second;
    const FockVector& v = states[s];
    FockVector k = ctx.apply(a, n2, ctx.apply(b, m2, v)) - ctx.apply(b, m2, ctx.apply(a, n2, v));
    return kcache.emplace(key, std::move(k)).first->second;
  };
  try {
    // support of the commutator in n + m, for the record
    int slo = INT_MAX, shi = INT_MIN;
    const int lo = first_index(-range2, g);
    for (int n2 = lo; n2 <= range2; n2 += 2)
      for (int m2 = lo; m2 <= range2; m2 += 2)
        for (size_t s = 0; s < states.size(); ++s)
          if (!negligible(ctx, K(n2, m2, s))) {
            slo = std::min(slo, n2 + m2);
            shi = std::max(shi, n2 + m2);
          }
    if (slo <= shi) r.details["commutator_support"] = band_json(slo, shi);

    if (g == 0) {
      int found = -1;
      for (int N = 0; N <= max_n && found < 0; ++N) {
        bool ok = true;
        for (int p2 = lo; p2 <= range2 && ok; p2 += 2)
          for (int q2 = lo; q2 <= range2 && ok; q2 += 2)
            for (size_t s = 0; s < states.size() && ok; ++s) {
              FockVector acc(ctx.kind());
              for (int i = 0; i <= N; ++i) {
                Rational c = binomial(N, i) * (i % 2 ? -1 : 1);
                acc.add(K(p2 + 2 * (N - i), q2 + 2 * i, s), Scalar(c));
              }
              ok = acc.is_zero();
            }
        if (ok) found = N;
      }
      r.details["N"] = found;
      if (found < 0) r.fail("no N <= " + std::to_string(max_n) + " annihilates the commutator");
      return r;
    }

    if (a == FieldSpec{{0}} && b == FieldSpec{{0}}) {
      for (int n2 = lo; n2 <= range2; n2 += 2)
        for (int m2 = lo; m2 <= range2; m2 += 2) {
          Scalar br = ctx.fock().bracket(n2, m2);
          if (std::abs(n2 + m2) > 2 * g + 2)
            r.record(br.abs(), t.nonzero(br), "gamma outside |n+m| <= g+1 at " + index_str(n2) + ", " + index_str(m2));
          for (size_t s = 0; s < states.size(); ++s)
            record_vec(r, K(n2, m2, s) - states[s].scaled(br),
                       "[a_n, a_m] != sigma gamma at n = " + index_str(n2) + ", m = " + index_str(m2));
        }
    }
    // contraction kernels [D^i a_-, D^j a] between the factors
    json kernels = json::array();
    for (int i : std::set<int>(a.orders.begin(), a.orders.end()))
      for (int j : std::set<int>(b.orders.begin(), b.orders.end())) {
        auto [blo, bhi] = ctx.contraction_band(i, j);
        auto ri = t.q_reliable.count(i) ? t.q_reliable.at(i) : std::make_pair(-t.window, t.window);
        auto rj = t.q_reliable.count(j) ? t.q_reliable.at(j) : std::make_pair(-t.window, t.window);
        int mlo = INT_MAX, mhi = INT_MIN;
        for (int u2 = std::max(g, ri.first); u2 <= ri.second; u2 += 2)
          for (int v2 = rj.first; v2 <= rj.second; v2 += 2) {
            Scalar c = ctx.contraction(i, u2, j, v2);
            if (!t.nonzero(c)) continue;
            mlo = std::min(mlo, u2 + v2);
            mhi = std::max(mhi, u2 + v2);
            if (u2 + v2 < blo || u2 + v2 > bhi)
              r.record(c.abs(), true, "contraction (" + std::to_string(i) + ", " + std::to_string(j) +
                                          ") outside its band at " + index_str(u2) + ", " + index_str(v2));
          }
        json e = {{"i", i}, {"j", j}, {"predicted", band_json(blo, bhi)}};
        if (mlo <= mhi) e["measured"] = band_json(mlo, mhi);
        kernels.push_back(e);
      }
    r.details["contraction_bands"] = kernels;
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  return r;
}

CheckReport check_annihilator_commutation(FieldContext& ctx, int k, int h,
                                          const std::vector<FockVector>& states, int range2) {
  const StructureTables& t = ctx.tables();
  const FockSpace& fock = ctx.fock();
  const int g = ctx.genus();
  CheckReport r("annihilator commutation (" + std::to_string(k) + ", " + std::to_string(h) + ")",
                exact_mode(ctx), t.tol);
  try {
    for (int u2 = g; u2 <= range2; u2 += 2)
      for (int v2 = g; v2 <= range2; v2 += 2) {
        CoefficientOperator x = ctx.generator_field_coefficient(k, u2);
        CoefficientOperator y = ctx.generator_field_coefficient(h, v2);
        for (const FockVector& v : states)
          record_vec(r, x.apply(fock, y.apply(fock, v)) - y.apply(fock, x.apply(fock, v)),
                     "u = " + index_str(u2) + ", v = " + index_str(v2) + " on " + state_name(v));
      }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  return r;
}

CheckReport check_double_bracket(FieldContext& ctx, int k, int h, int f,
                                 const std::vector<FockVector>& states, int range2) {
  const StructureTables& t = ctx.tables();
  const FockSpace& fock = ctx.fock();
  const int g = ctx.genus();
  CheckReport r("double bracket (" + std::to_string(k) + ", " + std::to_string(h) + ", " +
                    std::to_string(f) + ")",
                exact_mode(ctx), t.tol);
  const int lo = first_index(-range2, g);
  try {
    for (int u2 = g; u2 <= range2; u2 += 2) {
      CoefficientOperator x = ctx.generator_field_coefficient(k, u2);
      for (int v2 = lo; v2 <= range2; v2 += 2) {
        CoefficientOperator y = ctx.generator_field_coefficient(h, v2);
        auto inner = [&](const FockVector& s) {
          return x.apply(fock, y.apply(fock, s)) - y.apply(fock, x.apply(fock, s));
        };
        for (int w2 = lo; w2 <= range2; w2 += 2) {
          CoefficientOperator z = ctx.generator_field_coefficient(f, w2);
          for (const FockVector& v : states)
            record_vec(r, inner(z.apply(fock, v)) - z.apply(fock, inner(v)),
                       "u = " + index_str(u2) + ", v = " + index_str(v2) + ", w = " +
                           index_str(w2) + " on " + state_name(v));
        }
      }
    }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  return r;
}

namespace {

// One term of the Wick sum: P-factor p_pos[r] contracted with Q-factor q_pos[r].
struct Pairing {
  std::vector<int> p_pos, q_pos;
  FieldSpec p_rest, q_rest;
};

std::vector<Pairing> pairings(const FieldSpec& a, const FieldSpec& b) {
  std::vector<Pairing> out;
  const int M = a.weight(), N = b.weight();
  std::vector<int> ps, qs;
  std::vector<bool> q_used(static_cast<size_t>(N), false);
  auto emit = [&] {
    Pairing p{ps, qs, {}, {}};
    for (int i = 0; i < M; ++i)
      if (std::find(ps.begin(), ps.end(), i) == ps.end()) p.p_rest.orders.push_back(a.orders[static_cast<size_t>(i)]);
    for (int j = 0; j < N; ++j)
      if (!q_used[static_cast<size_t>(j)]) p.q_rest.orders.push_back(b.orders[static_cast<size_t>(j)]);
    out.push_back(std::move(p));
  };
  // choose P positions increasing, each matched to an unused Q position
  auto rec = [&](auto&& self, int from) -> void {
    emit();
    for (int i = from; i < M; ++i)
      for (int j = 0; j < N; ++j) {
        if (q_used[static_cast<size_t>(j)]) continue;
        ps.push_back(i);
        qs.push_back(j);
        q_used[static_cast<size_t>(j)] = true;
        self(self, i + 1);
        q_used[static_cast<size_t>(j)] = false;
        ps.pop_back();
        qs.pop_back();
      }
  };
  rec(rec, 0);
  return out;
}

// Scalar kernel of one pairing: the coefficient of f^n_M(P) f^m_N(Q) in
// prod_r [D^{i_r}a(P)_-, D^{j_r}a(Q)] * f^{n'}_{M-s}(P) f^{m'}_{N-s}(Q).
class WickKernel {
 public:
  WickKernel(const FieldContext& ctx, const FieldSpec& a, const FieldSpec& b, const Pairing& p)
      : ctx_(ctx), t_(ctx.tables()), a_(a), b_(b), p_(p) {
    lhi_ = INT_MIN;
    for (const auto& [l, band] : t_.ell_band)
      if (!band.empty) lhi_ = std::max(lhi_, band.hi);
  }

  Scalar operator()(int n2, int m2, int np2, int mp2) const {
    Scalar total = t_.kind.zero();
    std::vector<int> us;
    p_side(0, n2, np2, t_.kind.one(), us, [&](const std::vector<int>& u, const Scalar& wp) {
      std::vector<int> vs;
      v_side(0, u, vs, wp, [&](const std::vector<int>& v, const Scalar& wc) {
        total += wc * q_side(0, m2, mp2, v);
      });
    });
    return total;
  }

 private:
  const Band& band(int lambda) const {
    auto it = t_.ell_band.find(lambda);
    if (it == t_.ell_band.end()) throw WindowError("no l table for weight " + std::to_string(lambda));
    return it->second;
  }

  // omega^{u_r}(P) f^{t_next}_{lambda}(P) -> f^{t}_{lambda+1}(P), with u_r >= g/2.
  template <class Emit>
  void p_side(size_t r, int t2, int np2, const Scalar& w, std::vector<int>& us, Emit&& emit) const {
    const size_t s = p_.p_pos.size();
    if (r == s) {
      if (t2 == np2) emit(us, w);
      return;
    }
    const int g = t_.genus;
    const int lambda = a_.weight() - 1 - static_cast<int>(r);
    const Band& L = band(lambda);
    if (L.empty) return;
    const int left = static_cast<int>(s - r - 1);
    for (int off = L.lo; off <= L.hi; off += 2) {
      int hi = t2 + off - g;
      int lo = r + 1 == s ? np2 : np2 + left * (g - lhi_);
      if (r + 1 == s) hi = std::min(hi, np2);
      for (int tn = lo; tn <= hi; tn += 2) {
        int u2 = t2 - tn + off;
        if (u2 < g) continue;
        Scalar l = t_.ell_at(lambda, u2, tn, t2);
        if (!t_.nonzero(l)) continue;
        us.push_back(u2);
        p_side(r + 1, tn, np2, w * l, us, emit);
        us.pop_back();
      }
    }
  }

  template <class Emit>
  void v_side(size_t r, const std::vector<int>& us, std::vector<int>& vs, const Scalar& w,
              Emit&& emit) const {
    if (r == us.size()) {
      emit(vs, w);
      return;
    }
    int i = a_.orders[static_cast<size_t>(p_.p_pos[r])];
    int j = b_.orders[static_cast<size_t>(p_.q_pos[r])];
    auto [clo, chi] = ctx_.contraction_band(i, j);
    for (int v2 = -us[r] + clo; v2 <= -us[r] + chi; v2 += 2) {
      Scalar c = ctx_.contraction(i, us[r], j, v2);
      if (!t_.nonzero(c)) continue;
      vs.push_back(v2);
      v_side(r + 1, us, vs, w * c, emit);
      vs.pop_back();
    }
  }

  // omega^{v_r}(Q) f^{t_next}_{lambda}(Q) -> f^{t}_{lambda+1}(Q).
  Scalar q_side(size_t r, int t2, int mp2, const std::vector<int>& vs) const {
    if (r == vs.size()) return t2 == mp2 ? t_.kind.one() : t_.kind.zero();
    const int lambda = b_.weight() - 1 - static_cast<int>(r);
    const Band& L = band(lambda);
    Scalar s = t_.kind.zero();
    if (L.empty) return s;
    for (int off = L.lo; off <= L.hi; off += 2) {
      int tn = t2 - vs[r] + off;
      if (r + 1 == vs.size() && tn != mp2) continue;
      Scalar l = t_.ell_at(lambda, vs[r], tn, t2);
      if (!t_.nonzero(l)) continue;
      s += l * q_side(r + 1, tn, mp2, vs);
    }
    return s;
  }

  const FieldContext& ctx_;
  const StructureTables& t_;
  const FieldSpec& a_;
  const FieldSpec& b_;
  const Pairing& p_;
  int lhi_;
};

}  // namespace

CheckReport check_wick(FieldContext& ctx, const FieldSpec& a, const FieldSpec& b,
                       const std::vector<FockVector>& states, int range2) {
  const StructureTables& t = ctx.tables();
  const int g = ctx.genus();
  CheckReport r("wick " + a.str() + " , " + b.str(), exact_mode(ctx), t.tol);
  std::vector<Pairing> terms = pairings(a, b);
  r.details["terms"] = terms.size();
  int llo = INT_MAX, lhi = INT_MIN;
  for (const auto& [l, band] : t.ell_band)
    if (!band.empty) {
      llo = std::min(llo, band.lo);
      lhi = std::max(lhi, band.hi);
    }
  const int lo = first_index(-range2, g);
  try {
    for (int n2 = lo; n2 <= range2; n2 += 2)
      for (int m2 = lo; m2 <= range2; m2 += 2)
        for (const FockVector& v : states) {
          const int D = degree(v);
          FockVector lhs = ctx.apply(a, n2, ctx.apply(b, m2, v));
          FockVector rhs(ctx.kind());
          for (const Pairing& p : terms) {
            const int s = static_cast<int>(p.p_pos.size());
            if (s == 0) {
              rhs.add(ctx.two_point_coefficient(a, b, n2, m2, D).apply(ctx.fock(), v), ctx.kind().one());
              continue;
            }
            WickKernel kernel(ctx, a, b, p);
            int clo = 0, chi = 0;
            for (int q = 0; q < s; ++q) {
              auto [x, y] = ctx.contraction_band(a.orders[static_cast<size_t>(p.p_pos[static_cast<size_t>(q)])],
                                                 b.orders[static_cast<size_t>(p.q_pos[static_cast<size_t>(q)])]);
              clo += x;
              chi += y;
            }
            // n' + m' is pinned to a band by the l and contraction bands
            int sum_lo = n2 + m2 + 2 * s * llo - chi, sum_hi = n2 + m2 + 2 * s * lhi - clo;
            int nthr = p.p_rest.is_identity() ? -g : ctx.threshold(p.p_rest, D);
            int mthr = p.q_rest.is_identity() ? -g : ctx.threshold(p.q_rest, D);
            if (nthr == INT_MIN || mthr == INT_MIN) continue;
            int nlo = p.p_rest.is_identity() ? -g : first_index(sum_lo - mthr, g);
            for (int np2 = nlo; np2 <= nthr; np2 += 2) {
              int mlo = p.q_rest.is_identity() ? -g : first_index(sum_lo - np2, g);
              int mhi = p.q_rest.is_identity() ? -g : std::min(mthr, sum_hi - np2);
              for (int mp2 = mlo; mp2 <= mhi; mp2 += 2) {
                const CoefficientOperator& z = ctx.two_point_coefficient(p.p_rest, p.q_rest, np2, mp2, D);
                if (z.is_zero()) continue;
                Scalar k = kernel(n2, m2, np2, mp2);
                if (!t.nonzero(k)) continue;
                rhs.add(z.apply(ctx.fock(), v), k);
              }
            }
          }
          record_vec(r, lhs - rhs, "n = " + index_str(n2) + ", m = " + index_str(m2) + " on " + state_name(v));
        }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  return r;
}

CheckReport check_field_property(FieldContext& ctx, const FieldSpec& spec,
                                 const std::vector<FockVector>& states) {
  const StructureTables& t = ctx.tables();
  CheckReport r("field property " + spec.str(), exact_mode(ctx), t.tol);
  json thresholds = json::object();
  try {
    for (const FockVector& v : states) {
      int thr = ctx.threshold(spec, degree(v));
      thresholds[state_name(v)] = thr == INT_MIN ? "none" : index_str(thr);
      int from = thr == INT_MIN ? first_index(-t.window, ctx.genus()) : thr + 2;
      for (int n2 = from; n2 <= t.window; n2 += 2)
        record_vec(r, ctx.apply(spec, n2, v), "n = " + index_str(n2) + " on " + state_name(v));
    }
  } catch (const WindowError& e) {
    r.fail(std::string("window overflow: ") + e.what());
  }
  r.details["thresholds"] = thresholds;
  return r;
}

}  // namespace knva
