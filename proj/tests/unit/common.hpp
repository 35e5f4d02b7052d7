#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "knva/atlas.hpp"

namespace knva::testing {

inline AtlasConfig genus0_config(int window_doubled, std::vector<int> lambdas = {-1, 0, 1, 2}) {
  AtlasConfig c;
  c.genus = 0;
  c.window = window_doubled;
  c.trunc = AtlasConfig::min_trunc(window_doubled);
  c.lambdas = std::move(lambdas);
  return c;
}

// tau = i with a generic pair of marked points.
inline AtlasConfig genus1_config(int window_doubled, unsigned precision = 40,
                                 std::vector<int> lambdas = {-1, 0, 1, 2}) {
  AtlasConfig c;
  c.genus = 1;
  c.mode = ScalarMode::complex;
  c.window = window_doubled;
  c.trunc = AtlasConfig::min_trunc(window_doubled);
  c.lambdas = std::move(lambdas);
  c.precision = precision;
  c.tau = "0+1i";
  c.p_plus = "0.17+0.31i";
  c.p_minus = "-0.2317+0.1123i";
  return c;
}

// Small xorshift generator so the property cases are reproducible without a seed file.
struct Gen {
  unsigned long s;
  int uniform(int lo, int hi) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return lo + static_cast<int>(s % static_cast<unsigned long>(hi - lo + 1));
  }
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("knva_test_" + name);
}

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(KNVA_TEST_DATA_DIR) / name;
}

}  // namespace knva::testing
