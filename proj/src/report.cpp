#include "knva/report.hpp"

#include <algorithm>
#include <cstdio>

namespace knva {

void CheckReport::record(const Scalar& residual, const std::string& where) {
  record(residual.abs(), !residual.is_zero(), where);
}

void CheckReport::record(double residual, bool nonzero, const std::string& where) {
  max_residual = std::max(max_residual, residual);
  bool bad = exact ? nonzero : residual > tolerance;
  if (!bad) return;
  passed = false;
  if (findings.size() < kMaxFindings) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", residual);
    findings.push_back(where + ": residual " + buf);
  }
}

void CheckReport::fail(const std::string& why) {
  passed = false;
  if (findings.size() < kMaxFindings) findings.push_back(why);
}

void CheckReport::merge(const CheckReport& other) {
  passed = passed && other.passed;
  max_residual = std::max(max_residual, other.max_residual);
  for (const auto& f : other.findings)
    if (findings.size() < kMaxFindings) findings.push_back(other.name + ": " + f);
}

json CheckReport::to_json() const {
  json j;
  j["check"] = name;
  j["passed"] = passed;
  j["exact"] = exact;
  j["max_residual"] = max_residual;
  j["tolerance"] = tolerance;
  j["findings"] = findings;
  j["details"] = details;
  return j;
}

std::string CheckReport::summary() const {
  char buf[128];
  if (exact)
    std::snprintf(buf, sizeof buf, "%s  exact, max residual %.3e", passed ? "PASS" : "FAIL",
                  max_residual);
  else
    std::snprintf(buf, sizeof buf, "%s  max residual %.3e (tol %.1e)", passed ? "PASS" : "FAIL",
                  max_residual, tolerance);
  return name + ": " + buf;
}

}  // namespace knva
