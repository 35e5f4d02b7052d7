#include "knva/fock.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>

#include "knva/errors.hpp"

namespace knva {

int Monomial::degree() const { return std::accumulate(parts.begin(), parts.end(), 0); }

std::string Monomial::str() const {
  std::string s;
  for (int p : parts) s += "a[" + std::to_string(-p) + "]";
  return s + "|0>";
}

namespace {

// The creation offsets of "a[-3]a[-1]|0>" as positive parts, in the order written.
std::vector<int> parse_parts(const std::string& text) {
  std::vector<int> parts;
  size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto expect = [&](const std::string& tok) {
    skip();
    if (text.compare(i, tok.size(), tok) != 0)
      throw ParseError("state literal '" + text + "': expected '" + tok + "' at offset " +
                       std::to_string(i));
    i += tok.size();
  };
  skip();
  while (i < text.size() && text[i] == 'a') {
    expect("a");
    expect("[");
    skip();
    size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(text.substr(i), &used);
    } catch (const std::exception&) {
      throw ParseError("state literal '" + text + "': bad integer at offset " + std::to_string(i));
    }
    i += used;
    expect("]");
    if (k >= 0) throw ParseError("state literal '" + text + "': creation offsets must be negative");
    parts.push_back(-k);
    skip();
  }
  expect("|0>");
  skip();
  if (i != text.size()) throw ParseError("state literal '" + text + "': trailing characters");
  return parts;
}

}  // namespace

Monomial parse_monomial(const std::string& text) {
  Monomial m{parse_parts(text)};
  if (!std::is_sorted(m.parts.rbegin(), m.parts.rend()))
    throw ParseError("state literal '" + text + "': parts must be non-increasing");
  return m;
}

std::vector<Monomial> monomials_of_degree(int degree) {
  std::vector<Monomial> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int left, int max_part) {
    if (left == 0) {
      out.push_back(Monomial{cur});
      return;
    }
    for (int p = std::min(left, max_part); p >= 1; --p) {
      cur.push_back(p);
      rec(left - p, p);
      cur.pop_back();
    }
  };
  rec(degree, degree);
  return out;
}

std::vector<Monomial> monomials_up_to(int max_degree) {
  std::vector<Monomial> out;
  for (int d = 0; d <= max_degree; ++d) {
    auto v = monomials_of_degree(d);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

// ---- FockVector ----

FockVector FockVector::vacuum(ScalarKind kind) { return basis(Monomial{}, kind); }

FockVector FockVector::basis(const Monomial& m, ScalarKind kind) {
  FockVector v(kind);
  v.terms_.emplace(m, kind.one());
  return v;
}

Scalar FockVector::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? kind_.zero() : it->second;
}

void FockVector::add(const Monomial& m, const Scalar& c) {
  if (c.is_exact() && c.is_zero()) return;
  auto [it, fresh] = terms_.try_emplace(m, c);
  if (fresh) return;
  it->second += c;
  if (it->second.is_exact() && it->second.is_zero()) terms_.erase(it);
}

void FockVector::add(const FockVector& v, const Scalar& c) {
  for (const auto& [m, x] : v.terms_) add(m, x * c);
}

FockVector FockVector::scaled(const Scalar& c) const {
  FockVector out(kind_);
  out.add(*this, c);
  return out;
}

void FockVector::prune(double floor) {
  if (kind_.mode == ScalarMode::exact) return;
  std::erase_if(terms_, [&](const auto& kv) { return kv.second.abs() <= floor; });
}

double FockVector::max_abs() const {
  double m = 0;
  for (const auto& [k, c] : terms_) m = std::max(m, c.abs());
  return m;
}

std::string FockVector::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [m, c] : terms_) {
    if (!s.empty()) s += " + ";
    s += "(" + c.str() + ") " + m.str();
  }
  return s;
}

json FockVector::to_json() const {
  json a = json::array();
  for (const auto& [m, c] : terms_) a.push_back({{"state", m.str()}, {"coeff", c.str()}});
  return a;
}

FockVector operator+(const FockVector& a, const FockVector& b) {
  FockVector out = a;
  out.add(b, a.kind().one());
  return out;
}

FockVector operator-(const FockVector& a, const FockVector& b) {
  FockVector out = a;
  out.add(b, a.kind().from_int(-1));
  return out;
}

double distance(const FockVector& a, const FockVector& b) { return (a - b).max_abs(); }

int degree(const FockVector& v) {
  if (v.is_zero()) throw InvariantViolation("degree of the zero vector");
  int d = 0;
  for (const auto& [m, c] : v.terms()) d = std::max(d, m.degree());
  return d;
}

// ---- FockSpace ----

FockSpace::FockSpace(const StructureTables& tables) : t_(&tables) {
  if (tables.kind.mode != ScalarMode::exact) noise_ = tables.tol * 1e-20;
}

Scalar FockSpace::bracket(int n2, int m2) const { return t_->gamma_at(n2, m2) * static_cast<long>(t_->sigma); }

namespace {

Monomial suffix(const Monomial& m, size_t from) {
  return Monomial{std::vector<int>(m.parts.begin() + static_cast<long>(from), m.parts.end())};
}

// c prepended to every monomial of v; every part of v must be <= c.
FockVector prepend(int c, const FockVector& v) {
  FockVector out(v.kind());
  for (const auto& [m, x] : v.terms()) {
    Monomial n;
    n.parts.reserve(m.parts.size() + 1);
    n.parts.push_back(c);
    n.parts.insert(n.parts.end(), m.parts.begin(), m.parts.end());
    out.add(n, x);
  }
  return out;
}

}  // namespace

// a_{g/2-part} (a_{c_from} ... v0): move the new creator right past larger parts.
FockVector FockSpace::insert_creator(int part, const Monomial& m, size_t from) const {
  const int g = t_->genus;
  if (from == m.parts.size() || part >= m.parts[from]) {
    Monomial n = suffix(m, from);
    n.parts.insert(n.parts.begin(), part);
    return FockVector::basis(n, kind());
  }
  int c = m.parts[from];
  FockVector out = prepend(c, insert_creator(part, m, from + 1));
  Scalar b = bracket(creator_index(g, part), creator_index(g, c));
  if (!b.is_zero()) out.add(suffix(m, from + 1), b);
  return out;
}

// a_j (a_{c_1} Y) = a_{c_1} (a_j Y) + [a_j, a_{c_1}] Y for an annihilator a_j.
FockVector FockSpace::remove_by(int j2, const Monomial& m) const {
  FockVector out(kind());
  if (m.parts.empty()) return out;
  const int g = t_->genus;
  Monomial rest = suffix(m, 1);
  int c = m.parts[0];
  out = prepend(c, remove_by(j2, rest));
  Scalar b = bracket(j2, creator_index(g, c));
  if (!b.is_zero()) out.add(rest, b);
  return out;
}

FockVector FockSpace::apply(int j2, const Monomial& m) const {
  if (!parity_ok(j2, genus())) throw InvariantViolation("index " + std::to_string(j2) + " has the wrong parity");
  if (j2 < genus()) return insert_creator(part_of(genus(), j2), m, 0);
  if (j2 == genus()) return FockVector(kind());  // a_{g/2} is central and kills v0
  return remove_by(j2, m);
}

FockVector FockSpace::apply(int j2, const FockVector& v) const {
  FockVector out(kind());
  for (const auto& [m, c] : v.terms()) out.add(apply(j2, m), c);
  out.prune(noise_);
  return out;
}

FockVector FockSpace::apply_word(const std::vector<int>& word, const FockVector& v) const {
  FockVector cur = v;
  for (auto it = word.rbegin(); it != word.rend() && !cur.is_zero(); ++it) cur = apply(*it, cur);
  return cur;
}

FockVector FockSpace::create(const std::vector<int>& creators) const {
  return apply_word(creators, FockVector::vacuum(kind()));
}

FockVector FockSpace::apply_T(const Monomial& m) const {
  FockVector out(kind());
  if (m.parts.empty()) return out;
  const int g = genus();
  const StructureTables& t = *t_;
  int c2 = creator_index(g, m.parts[0]);
  Monomial rest = suffix(m, 1);
  FockVector restv = FockVector::basis(rest, kind());
  // [T, a_c] rest = sum_n zeta^n_c a_n rest
  if (t.zeta_band.empty) throw WindowError("zeta table is empty");
  for (int n2 = c2 + t.zeta_band.lo; n2 <= c2 + t.zeta_band.hi; n2 += 2) {
    Scalar z = t.zeta_at(n2, c2);
    if (!t.nonzero(z)) continue;
    out.add(apply(n2, restv), z);
  }
  out.add(apply(c2, apply_T(rest)), kind().one());
  out.prune(noise_);
  return out;
}

FockVector FockSpace::apply_T(const FockVector& v) const {
  FockVector out(kind());
  for (const auto& [m, c] : v.terms()) out.add(apply_T(m), c);
  out.prune(noise_);
  return out;
}

FockVector FockSpace::parse_state(const std::string& text) const {
  std::vector<int> word;
  for (int p : parse_parts(text)) word.push_back(creator_index(genus(), p));
  return create(word);
}

CheckReport check_admissibility(const FockSpace& fock, const FockVector& v, int* n0) {
  const StructureTables& t = fock.tables();
  CheckReport r("admissibility", t.kind.mode == ScalarMode::exact, t.tol);
  int first = t.window + 2;
  for (int n2 = t.window; n2 >= -t.window; n2 -= 2) {
    FockVector w = fock.apply(n2, v);
    bool zero = t.kind.mode == ScalarMode::exact ? w.is_zero() : w.max_abs() <= t.tol;
    if (!zero) break;
    first = n2;
  }
  if (first > t.window) r.fail("a_n v != 0 at the window edge; n0 lies outside the window");
  else r.details["n0"] = index_str(first);
  if (n0) *n0 = first;
  return r;
}

}  // namespace knva
