#include "knva/index.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "knva/errors.hpp"

namespace knva {

std::string index_str(int doubled) {
  if (doubled % 2 == 0) return std::to_string(doubled / 2);
  return std::to_string(doubled) + "/2";
}

namespace {

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

// Parses a plain number ("3", "-1/2", "6.5") into a doubled value.
int parse_plain(const std::string& s) {
  if (s.empty()) throw ParseError("empty index");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    if (s.substr(slash + 1) != "2") throw ParseError("index denominator must be 2 in '" + s + "'");
    size_t used = 0;
    int num = std::stoi(s.substr(0, slash), &used);
    if (used != slash) throw ParseError("bad index '" + s + "'");
    return num;
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string frac = s.substr(dot + 1);
    if (frac != "5" && frac != "0") throw ParseError("index must be a multiple of 1/2: '" + s + "'");
    std::string whole = s.substr(0, dot);
    bool neg = !whole.empty() && whole[0] == '-';
    int w = std::abs(std::stoi(whole.empty() || whole == "-" || whole == "+" ? whole + "0" : whole));
    int d = 2 * w + (frac == "5" ? 1 : 0);
    return neg ? -d : d;
  }
  size_t used = 0;
  int v = std::stoi(s, &used);
  if (used != s.size()) throw ParseError("bad index '" + s + "'");
  return 2 * v;
}

}  // namespace

int parse_index(const std::string& text, int genus) {
  std::string s = strip(text);
  try {
    int d;
    if (s.rfind("g/2", 0) == 0) {
      std::string rest = s.substr(3);
      d = genus;
      if (!rest.empty()) {
        if (rest[0] != '+' && rest[0] != '-') throw ParseError("bad index '" + text + "'");
        int off = parse_plain(rest.substr(1));
        d += rest[0] == '+' ? off : -off;
      }
    } else {
      d = parse_plain(s);
    }
    if (!parity_ok(d, genus))
      throw ParseError("index " + index_str(d) + " has the wrong parity for genus " +
                       std::to_string(genus));
    return d;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("bad index '" + text + "'");
  }
}

Rational s_lambda(int genus, int lambda) { return Rational(s_lambda_doubled(genus, lambda), 2); }

}  // namespace knva
