#pragma once

// Evaluation metrics over paired ground-truth / predicted crystals:
// per-parameter lattice MAE, histogram KL divergence and normalised
// periodic coordinate RMSE with optimal per-species atom matching.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atombench/protocol.hpp"
#include "atombench/xtal.hpp"

namespace atombench {

inline constexpr int kReportSchemaVersion = 1;

struct Histogram {
  std::vector<double> edges;  // B + 1 strictly increasing boundaries
  std::vector<long> counts;   // B bins
  long n_total = 0;
};

// Bin index of x; values outside [edges.front(), edges.back()] are clamped
// into the first / last bin.
std::size_t bin_index(const std::vector<double>& edges, double x);
Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges);

struct Domain {
  double lo, hi;
};
// Niggli-reduced angles live in [60, 120] degrees.
inline constexpr Domain kNiggliAngleDomain{60.0, 120.0};

// Uniform edges over [min, max] of the union of both samples, widened by
// 1e-9 on each side, or exactly over the override domain when given.
// Throws EmptyInput (no values) or InvalidArgument (nbins < 2).
std::vector<double> shared_edges(const std::vector<double>& truth_vals,
                                 const std::vector<double>& pred_vals, std::size_t nbins,
                                 std::optional<Domain> domain_override = std::nullopt);

// D(P||Q) = sum p ln(p/q) in nats, after adding epsilon to every bin of both
// normalised distributions and renormalising. Throws EdgeMismatch.
double kl_divergence(const Histogram& p, const Histogram& q, double epsilon = 1e-9);

// Truth / prediction values of one lattice parameter over lattice-evaluable
// pairs, in pair order.
std::pair<std::vector<double>, std::vector<double>> lattice_values(
    const std::vector<EvalPair>& pairs, LatticeParam param);

// Mean |truth - pred| of one parameter over lattice-evaluable pairs.
// Throws NoEvaluablePairs.
double lattice_mae(const std::vector<EvalPair>& pairs, LatticeParam param);

struct Matching {
  // pred_for_truth[i] = index of the prediction site matched to truth site i.
  std::vector<std::size_t> pred_for_truth;
  double cost = 0;  // sum of squared min-image distances, Å^2
};

// Per element, the assignment minimising the summed squared min-image
// distance (in the truth lattice) between truth and prediction sites.
// Throws SpeciesMismatch when the element multisets differ.
Matching match_atoms(const Crystal& truth, const Crystal& pred);

// Pairs the i-th truth site of each element with the i-th prediction site
// of that element.
Matching match_in_order(const Crystal& truth, const Crystal& pred);

enum class RmseNorm { vol_per_atom, cell_diagonal };
enum class MatchMode { assignment, list_order };

RmseNorm parse_rmse_norm(std::string_view s);
const char* rmse_norm_name(RmseNorm n);
MatchMode parse_match_mode(std::string_view s);
const char* match_mode_name(MatchMode m);

// vol_per_atom: (V_truth / N)^(1/3); cell_diagonal: |a + b + c| of the truth cell.
double normalization_length(const Crystal& truth, RmseNorm norm);

struct RmseResult {
  double angstrom = 0;
  double normalized = 0;
};

struct RmseOptions {
  RmseNorm norm = RmseNorm::vol_per_atom;
  MatchMode match = MatchMode::assignment;
  // Remove the circular mean of matched fractional displacements and match
  // once more; for models with origin gauge freedom.
  bool align_translation = false;
};

// Throws SpeciesMismatch unless pair.status == ok.
RmseResult coord_rmse(const EvalPair& pair, const RmseOptions& options = {});

struct EvalConfig {
  std::size_t nbins = 30;
  double epsilon = 1e-9;
  double sensitivity_epsilon = 1e-6;
  bool angle_domain = true;  // use kNiggliAngleDomain for angle histograms
  RmseOptions rmse;
};

struct ParamHistograms {
  Histogram truth, pred;
};

struct MetricReport {
  std::array<double, 6> mae{};              // a, b, c in Å; alpha, beta, gamma in degrees
  std::array<double, 6> kld{};              // nats, at config.epsilon
  std::array<double, 6> kld_sensitivity{};  // nats, at config.sensitivity_epsilon
  std::optional<double> rmse_mean;          // normalised; absent without ok pairs
  std::optional<double> rmse_mean_angstrom;
  std::size_t n_pairs = 0;
  std::size_t n_lattice = 0;  // pairs contributing to MAE / KLD
  std::size_t n_ok = 0;
  std::size_t n_skipped_species = 0;
  std::size_t n_skipped_parse = 0;
  std::size_t n_skipped_reduction = 0;
  std::array<ParamHistograms, 6> histograms;
  EvalConfig config;
};

// Aggregates in ascending id order, so the result does not depend on the
// order of pairs. Throws NoEvaluablePairs.
MetricReport evaluate(const std::vector<EvalPair>& pairs, const EvalConfig& config = {});

}  // namespace atombench
