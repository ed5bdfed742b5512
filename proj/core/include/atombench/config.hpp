#pragma once

// Run configuration shared by every command. Its JSON form is echoed into
// every output file so results can be traced back to the settings used.

#include <cstdint>
#include <string>

#include "atombench/dataset.hpp"
#include "atombench/metrics.hpp"
#include "atombench/niggli.hpp"
#include "atombench/protocol.hpp"

namespace atombench {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct RunConfig {
  std::string command;
  std::string dataset;  // path or manifest name
  DatasetSchema schema = DatasetSchema::generic;
  std::uint64_t seed = kDefaultSplitSeed;
  SplitRatios ratios;
  TestRounding rounding = TestRounding::remainder;
  std::size_t nbins = 30;
  double epsilon = 1e-9;
  RmseNorm rmse_norm = RmseNorm::vol_per_atom;
  MatchMode match_mode = MatchMode::assignment;
  double niggli_tol = kDefaultNiggliTol;
  std::string out_dir;

  // Throws InvalidArgument for out-of-range values.
  void validate() const;
  EvalConfig eval_config() const;
};

// Compact single-line JSON object with keys in a fixed order.
std::string config_to_json(const RunConfig& c);

// "atombench 0.1.0 (dataset schema 1, split schema 1, report schema 1)"
std::string version_string();

}  // namespace atombench
