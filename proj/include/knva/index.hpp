#pragma once

#include <string>

#include "knva/scalar.hpp"

namespace knva {

// Indices n live in Z (even genus) or Z + 1/2 (odd genus); they are stored doubled,
// so an index is an int d with d = 2n and d = genus (mod 2).
struct BasisIndex {
  int doubled = 0;
  bool operator==(const BasisIndex&) const = default;
  auto operator<=>(const BasisIndex&) const = default;
};

inline bool parity_ok(int doubled, int genus) { return ((doubled - genus) % 2 + 2) % 2 == 0; }

// "3", "-1/2", ...
std::string index_str(int doubled);

// Accepts "6.5", "-3/2", "4", "g/2", "g/2-1", "g/2+3/2".
int parse_index(const std::string& text, int genus);

// s_lambda = (1 - 2 lambda) g / 2 + lambda, returned doubled.
inline int s_lambda_doubled(int genus, int lambda) { return (1 - 2 * lambda) * genus + 2 * lambda; }
Rational s_lambda(int genus, int lambda);

}  // namespace knva
