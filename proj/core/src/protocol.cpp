#include "atombench/protocol.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "atombench/error.hpp"

namespace atombench {
namespace {

using json = nlohmann::json;

std::size_t floor_count(double ratio, std::size_t n) {
  // Guard against products such as 0.1 * 10 landing a hair below the integer.
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

}  // namespace

TestRounding parse_rounding(std::string_view name) {
  if (name == "remainder") return TestRounding::remainder;
  if (name == "floor") return TestRounding::floor;
  throw InvalidArgument(fmt::format("unknown test rounding '{}' (floor|remainder)", name));
}

const char* rounding_name(TestRounding r) {
  return r == TestRounding::floor ? "floor" : "remainder";
}

Split split_dataset(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed,
                    TestRounding rounding) {
  if (ids.empty()) throw EmptyDataset("cannot split an empty dataset");
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw InvalidArgument(fmt::format("split ratios ({}, {}, {}) must be positive and sum to 1",
                                      ratios.train, ratios.val, ratios.test));
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size())
    throw InvalidArgument("split ids are not unique");

  const std::size_t n = ids.size();
  seeded_shuffle(ids, seed);
  const std::size_t n_train = floor_count(ratios.train, n);
  std::size_t n_val = 0;
  if (rounding == TestRounding::remainder) {
    n_val = floor_count(ratios.val, n);
  } else {
    n_val = n - n_train - std::min(n - n_train, floor_count(ratios.test, n));
  }

  Split s;
  s.seed = seed;
  s.ratios = ratios;
  s.rounding = rounding;
  auto it = ids.begin();
  s.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  s.val.assign(it, it + static_cast<std::ptrdiff_t>(n_val));
  it += static_cast<std::ptrdiff_t>(n_val);
  s.test.assign(it, ids.end());
  return s;
}

std::string split_to_json(const Split& s, std::string_view config_json) {
  json j;
  j["schema_version"] = kSplitSchemaVersion;
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  j["seed"] = s.seed;
  j["ratios"] = json::array({s.ratios.train, s.ratios.val, s.ratios.test});
  j["rounding"] = rounding_name(s.rounding);
  j["prng"] = "splitmix64+fisher-yates";
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  return j.dump(1) + "\n";
}

Split split_from_json(std::string_view text) {
  try {
    const json j = json::parse(text.begin(), text.end());
    Split s;
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto r = j.at("ratios").get<std::vector<double>>();
    if (r.size() != 3) throw SchemaError("split 'ratios' must hold three numbers");
    s.ratios = {r[0], r[1], r[2]};
    if (j.contains("rounding")) s.rounding = parse_rounding(j["rounding"].get<std::string>());
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("malformed split JSON: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
}

const char* status_name(PairStatus s) {
  switch (s) {
    case PairStatus::ok: return "ok";
    case PairStatus::species_mismatch: return "species_mismatch";
    case PairStatus::parse_failed: return "parse_failed";
    case PairStatus::reduction_failed: return "reduction_failed";
  }
  return "";
}

std::vector<EvalPair> pair_structures(const std::vector<DatasetRecord>& truth,
                                      const std::map<std::string, Crystal>& preds,
                                      const PairingOptions& options) {
  std::vector<EvalPair> out;
  out.reserve(truth.size());
  for (const auto& rec : truth) {
    EvalPair pair{rec.id, rec.tc, rec.structure, std::nullopt, PairStatus::ok};
    auto it = preds.find(rec.id);
    if (it == preds.end()) {
      pair.status = PairStatus::parse_failed;
      out.push_back(std::move(pair));
      continue;
    }
    pair.pred = it->second;
    if (options.reduce) {
      auto t = reduce_crystal(rec.structure, options.niggli_tol, options.max_iter);
      auto p = reduce_crystal(it->second, options.niggli_tol, options.max_iter);
      if (!t.reduction.converged || !p.reduction.converged) {
        pair.status = PairStatus::reduction_failed;
        out.push_back(std::move(pair));
        continue;
      }
      pair.truth = std::move(t.crystal);
      pair.pred = std::move(p.crystal);
    }
    if (element_counts(pair.truth.species()) != element_counts(pair.pred->species()))
      pair.status = PairStatus::species_mismatch;
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace atombench
