#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "knva/scalar.hpp"

namespace knva {

using nlohmann::json;

// Outcome of one check: a pass/fail verdict, the worst residual seen and a capped list of
// located violations.
struct CheckReport {
  std::string name;
  bool passed = true;
  bool exact = false;
  double max_residual = 0;
  double tolerance = 0;
  std::vector<std::string> findings;
  json details = json::object();

  CheckReport() = default;
  CheckReport(std::string n, bool exact_mode, double tol)
      : name(std::move(n)), exact(exact_mode), tolerance(tol) {}

  // Records a residual value; in exact mode any nonzero value fails.
  void record(const Scalar& residual, const std::string& where);
  void record(double residual, bool nonzero, const std::string& where);
  void fail(const std::string& why);
  void merge(const CheckReport& other);

  json to_json() const;
  std::string summary() const;
};

inline constexpr size_t kMaxFindings = 20;

}  // namespace knva
