#include "atombench/config.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "atombench/error.hpp"

namespace atombench {

void RunConfig::validate() const {
  if (nbins < 2) throw InvalidArgument(fmt::format("--nbins must be at least 2, got {}", nbins));
  if (!(epsilon > 0) || !(epsilon < 1))
    throw InvalidArgument(fmt::format("--epsilon must lie in (0, 1), got {}", epsilon));
  if (!(niggli_tol > 0) || !(niggli_tol < 0.1))
    throw InvalidArgument(fmt::format("--niggli-tol must lie in (0, 0.1), got {}", niggli_tol));
  const double sum = ratios.train + ratios.val + ratios.test;
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0) || std::abs(sum - 1.0) > 1e-9)
    throw InvalidArgument("--ratios must be three positive numbers summing to 1");
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig e;
  e.nbins = nbins;
  e.epsilon = epsilon;
  e.rmse.norm = rmse_norm;
  e.rmse.match = match_mode;
  return e;
}

std::string config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["toolkit_version"] = kToolkitVersion;
  j["command"] = c.command;
  j["dataset"] = c.dataset;
  j["schema"] = schema_name(c.schema);
  j["seed"] = c.seed;
  j["ratios"] = {c.ratios.train, c.ratios.val, c.ratios.test};
  j["test_rounding"] = rounding_name(c.rounding);
  j["nbins"] = c.nbins;
  j["epsilon"] = c.epsilon;
  j["rmse_norm"] = rmse_norm_name(c.rmse_norm);
  j["match_mode"] = match_mode_name(c.match_mode);
  j["niggli_tol"] = c.niggli_tol;
  j["out"] = c.out_dir;
  return j.dump();
}

std::string version_string() {
  return fmt::format("atombench {} (dataset schema {}, split schema {}, report schema {})",
                     kToolkitVersion, kDatasetSchemaVersion, kSplitSchemaVersion,
                     kReportSchemaVersion);
}

}  // namespace atombench
