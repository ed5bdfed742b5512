#pragma once

// Benchmark protocol: seeded train/val/test splitting and pairing of
// ground-truth structures with model predictions by dataset id.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atombench/dataset.hpp"
#include "atombench/niggli.hpp"
#include "atombench/xtal.hpp"

namespace atombench {

inline constexpr int kSplitSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSplitSeed = 3407;

// SplitMix64 (Steele, Lea & Flood 2014). The k-th output (k = 1, 2, ...) is
// mix(seed + k * 0x9E3779B97F4A7C15) with
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31)
// which makes it a counter-based generator with a fully specified stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound) by rejection: draws below
  // (2^64 - bound) mod bound are discarded, the rest are reduced mod bound.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

// Fisher-Yates: for i = n-1 down to 1, swap item i with item below(i + 1).
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = items.size(); i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(items[i], items[j]);
  }
}

struct SplitRatios {
  double train = 0.8, val = 0.1, test = 0.1;
};

// remainder: |train| = floor(r_train N), |val| = floor(r_val N), test gets
//            the rest.
// floor:     |train| = floor(r_train N), |test| = floor(r_test N), val gets
//            the rest.
enum class TestRounding { remainder, floor };

TestRounding parse_rounding(std::string_view name);
const char* rounding_name(TestRounding r);

struct Split {
  std::vector<std::string> train, val, test;
  std::uint64_t seed = kDefaultSplitSeed;
  SplitRatios ratios;
  TestRounding rounding = TestRounding::remainder;
};

// Shuffles ids with seeded_shuffle, then slices train | val | test.
// Throws EmptyDataset for no ids, InvalidArgument for duplicate ids or
// ratios that are not positive or do not sum to 1 within 1e-9.
Split split_dataset(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed,
                    TestRounding rounding = TestRounding::remainder);

std::string split_to_json(const Split& s, std::string_view config_json = {});
// Throws SchemaError.
Split split_from_json(std::string_view text);

enum class PairStatus { ok, species_mismatch, parse_failed, reduction_failed };
const char* status_name(PairStatus s);

struct EvalPair {
  std::string id;
  double tc = 0;
  Crystal truth;               // Niggli-reduced unless reduction was disabled or failed
  std::optional<Crystal> pred;  // absent when status == parse_failed
  PairStatus status = PairStatus::ok;

  // Both lattices are defined (ok or species_mismatch).
  bool lattice_evaluable() const {
    return status == PairStatus::ok || status == PairStatus::species_mismatch;
  }
};

struct PairingOptions {
  bool reduce = true;
  double niggli_tol = kDefaultNiggliTol;
  int max_iter = kDefaultNiggliMaxIter;
};

// One EvalPair per truth record, in truth order. Never throws for
// per-pair problems; those become statuses.
std::vector<EvalPair> pair_structures(const std::vector<DatasetRecord>& truth,
                                      const std::map<std::string, Crystal>& preds,
                                      const PairingOptions& options = {});

}  // namespace atombench
