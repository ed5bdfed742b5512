#include "atombench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "atombench/assignment.hpp"
#include "atombench/error.hpp"

namespace atombench {
namespace {

// Element -> site indices, in site order.
std::map<std::string, std::vector<std::size_t>> sites_by_element(const Crystal& c) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < c.size(); ++i) out[c.species()[i]].push_back(i);
  return out;
}

void require_same_species(const Crystal& truth, const Crystal& pred) {
  if (element_counts(truth.species()) != element_counts(pred.species()))
    throw SpeciesMismatch(fmt::format("truth {} vs prediction {}", reduced_formula(truth.species()),
                                      reduced_formula(pred.species())));
}

double squared_distance(const Crystal& truth, std::size_t i, const Crystal& pred, std::size_t j) {
  const double d = min_image_delta(truth.frac_coords()[i], pred.frac_coords()[j], truth.lattice()).distance;
  return d * d;
}

Crystal shifted(const Crystal& c, const Vec3& shift) {
  std::vector<Vec3> frac = c.frac_coords();
  for (auto& f : frac) f = f - shift;
  return Crystal(c.species(), std::move(frac), c.lattice(), c.provenance());
}

// Per-component circular mean of the matched fractional displacements.
Vec3 mean_displacement(const Crystal& truth, const Crystal& pred, const Matching& m) {
  Vec3 s{}, co{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Vec3 d = pred.frac_coords()[m.pred_for_truth[i]] - truth.frac_coords()[i];
    for (int k = 0; k < 3; ++k) {
      s[k] += std::sin(2 * kPi * d[k]);
      co[k] += std::cos(2 * kPi * d[k]);
    }
  }
  Vec3 mean{};
  for (int k = 0; k < 3; ++k)
    mean[k] = (s[k] == 0 && co[k] == 0) ? 0.0 : std::atan2(s[k], co[k]) / (2 * kPi);
  return mean;
}

double rmse_of(const Crystal& truth, const Crystal& pred, const Matching& m) {
  double sum = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += squared_distance(truth, i, pred, m.pred_for_truth[i]);
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

Matching match(const Crystal& truth, const Crystal& pred, MatchMode mode) {
  return mode == MatchMode::assignment ? match_atoms(truth, pred) : match_in_order(truth, pred);
}

}  // namespace

std::size_t bin_index(const std::vector<double>& edges, double x) {
  const std::size_t nbins = edges.size() - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0;
  return std::min(static_cast<std::size_t>(it - edges.begin()) - 1, nbins - 1);
}

Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges) {
  if (edges.size() < 2) throw InvalidArgument("histogram needs at least one bin");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw InvalidArgument("histogram edges must increase strictly");
  Histogram h;
  h.counts.assign(edges.size() - 1, 0);
  for (double x : values) ++h.counts[bin_index(edges, x)];
  h.n_total = static_cast<long>(values.size());
  h.edges = std::move(edges);
  return h;
}

std::vector<double> shared_edges(const std::vector<double>& truth_vals,
                                 const std::vector<double>& pred_vals, std::size_t nbins,
                                 std::optional<Domain> domain_override) {
  if (nbins < 2) throw InvalidArgument(fmt::format("nbins must be >= 2, got {}", nbins));
  double lo = 0, hi = 0;
  if (domain_override) {
    lo = domain_override->lo;
    hi = domain_override->hi;
  } else {
    if (truth_vals.empty() && pred_vals.empty()) throw EmptyInput("no values to bin");
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto* vals : {&truth_vals, &pred_vals})
      for (double x : *vals) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    lo -= 1e-9;
    hi += 1e-9;
  }
  std::vector<double> edges(nbins + 1);
  for (std::size_t i = 0; i < nbins; ++i)
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nbins);
  edges[nbins] = hi;
  return edges;
}

double kl_divergence(const Histogram& p, const Histogram& q, double epsilon) {
  if (p.edges != q.edges || p.counts.size() != q.counts.size())
    throw EdgeMismatch("KL divergence needs histograms over identical edges");
  const std::size_t n = p.counts.size();
  auto smoothed = [&](const Histogram& h) {
    std::vector<double> prob(n);
    for (std::size_t i = 0; i < n; ++i)
      prob[i] = (h.n_total > 0 ? static_cast<double>(h.counts[i]) / static_cast<double>(h.n_total) : 0.0) + epsilon;
    const double z = std::accumulate(prob.begin(), prob.end(), 0.0);
    for (double& x : prob) x /= z;
    return prob;
  };
  const auto pp = smoothed(p), qq = smoothed(q);
  double d = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (pp[i] > 0) d += pp[i] * std::log(pp[i] / qq[i]);
  // Gibbs' inequality; rounding can leave a tiny negative residue.
  return std::max(d, 0.0);
}

std::pair<std::vector<double>, std::vector<double>> lattice_values(
    const std::vector<EvalPair>& pairs, LatticeParam param) {
  std::vector<double> truth, pred;
  for (const auto& pair : pairs) {
    if (!pair.lattice_evaluable()) continue;
    truth.push_back(get(pair.truth.params(), param));
    pred.push_back(get(pair.pred->params(), param));
  }
  return {std::move(truth), std::move(pred)};
}

double lattice_mae(const std::vector<EvalPair>& pairs, LatticeParam param) {
  const auto [truth, pred] = lattice_values(pairs, param);
  if (truth.empty()) throw NoEvaluablePairs("no pair has both lattices defined");
  double sum = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - pred[i]);
  return sum / static_cast<double>(truth.size());
}

Matching match_atoms(const Crystal& truth, const Crystal& pred) {
  require_same_species(truth, pred);
  const auto t_sites = sites_by_element(truth);
  const auto p_sites = sites_by_element(pred);
  Matching m;
  m.pred_for_truth.assign(truth.size(), 0);
  for (const auto& [el, ti] : t_sites) {
    const auto& pi = p_sites.at(el);
    const std::size_t k = ti.size();
    std::vector<double> cost(k * k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) cost[r * k + c] = squared_distance(truth, ti[r], pred, pi[c]);
    const Assignment a = solve_assignment(cost, k);
    for (std::size_t r = 0; r < k; ++r) m.pred_for_truth[ti[r]] = pi[a.col_for_row[r]];
    m.cost += a.cost;
  }
  return m;
}

Matching match_in_order(const Crystal& truth, const Crystal& pred) {
  require_same_species(truth, pred);
  const auto t_sites = sites_by_element(truth);
  const auto p_sites = sites_by_element(pred);
  Matching m;
  m.pred_for_truth.assign(truth.size(), 0);
  for (const auto& [el, ti] : t_sites) {
    const auto& pi = p_sites.at(el);
    for (std::size_t r = 0; r < ti.size(); ++r) {
      m.pred_for_truth[ti[r]] = pi[r];
      m.cost += squared_distance(truth, ti[r], pred, pi[r]);
    }
  }
  return m;
}

RmseNorm parse_rmse_norm(std::string_view s) {
  if (s == "vol_per_atom") return RmseNorm::vol_per_atom;
  if (s == "cell_diagonal") return RmseNorm::cell_diagonal;
  throw InvalidArgument(fmt::format("unknown RMSE normalisation '{}' (vol_per_atom|cell_diagonal)", s));
}

const char* rmse_norm_name(RmseNorm n) {
  return n == RmseNorm::vol_per_atom ? "vol_per_atom" : "cell_diagonal";
}

MatchMode parse_match_mode(std::string_view s) {
  if (s == "assignment") return MatchMode::assignment;
  if (s == "list_order") return MatchMode::list_order;
  throw InvalidArgument(fmt::format("unknown match mode '{}' (assignment|list_order)", s));
}

const char* match_mode_name(MatchMode m) {
  return m == MatchMode::assignment ? "assignment" : "list_order";
}

double normalization_length(const Crystal& truth, RmseNorm norm) {
  if (norm == RmseNorm::vol_per_atom)
    return std::cbrt(cell_volume(truth.lattice()) / static_cast<double>(truth.size()));
  const auto& r = truth.lattice().rows();
  return atombench::norm(r[0] + r[1] + r[2]);
}

RmseResult coord_rmse(const EvalPair& pair, const RmseOptions& options) {
  if (pair.status != PairStatus::ok || !pair.pred)
    throw SpeciesMismatch(fmt::format("pair '{}' has status {}", pair.id, status_name(pair.status)));
  const Crystal& truth = pair.truth;
  Matching m = match(truth, *pair.pred, options.match);
  double rmse = 0;
  if (options.align_translation) {
    const Crystal moved = shifted(*pair.pred, mean_displacement(truth, *pair.pred, m));
    m = match(truth, moved, options.match);
    rmse = rmse_of(truth, moved, m);
  } else {
    rmse = rmse_of(truth, *pair.pred, m);
  }
  return {rmse, rmse / normalization_length(truth, options.norm)};
}

MetricReport evaluate(const std::vector<EvalPair>& pairs, const EvalConfig& config) {
  std::vector<const EvalPair*> ordered;
  ordered.reserve(pairs.size());
  for (const auto& p : pairs) ordered.push_back(&p);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const EvalPair* l, const EvalPair* r) { return l->id < r->id; });

  MetricReport rep;
  rep.config = config;
  rep.n_pairs = pairs.size();
  std::vector<EvalPair> lattice_pairs;
  for (const EvalPair* p : ordered) {
    switch (p->status) {
      case PairStatus::ok: ++rep.n_ok; break;
      case PairStatus::species_mismatch: ++rep.n_skipped_species; break;
      case PairStatus::parse_failed: ++rep.n_skipped_parse; break;
      case PairStatus::reduction_failed: ++rep.n_skipped_reduction; break;
    }
    if (p->lattice_evaluable()) lattice_pairs.push_back(*p);
  }
  rep.n_lattice = lattice_pairs.size();
  if (lattice_pairs.empty()) throw NoEvaluablePairs("no pair has both lattices defined");

  for (LatticeParam param : kAllLatticeParams) {
    const auto idx = static_cast<std::size_t>(param);
    const auto [truth, pred] = lattice_values(lattice_pairs, param);
    rep.mae[idx] = lattice_mae(lattice_pairs, param);
    const auto domain = (is_angle(param) && config.angle_domain)
                            ? std::optional<Domain>(kNiggliAngleDomain)
                            : std::nullopt;
    auto edges = shared_edges(truth, pred, config.nbins, domain);
    auto& h = rep.histograms[idx];
    h.truth = make_histogram(truth, edges);
    h.pred = make_histogram(pred, std::move(edges));
    rep.kld[idx] = kl_divergence(h.truth, h.pred, config.epsilon);
    rep.kld_sensitivity[idx] = kl_divergence(h.truth, h.pred, config.sensitivity_epsilon);
  }

  double sum_norm = 0, sum_ang = 0;
  for (const EvalPair& p : lattice_pairs) {
    if (p.status != PairStatus::ok) continue;
    const RmseResult r = coord_rmse(p, config.rmse);
    sum_norm += r.normalized;
    sum_ang += r.angstrom;
  }
  if (rep.n_ok > 0) {
    rep.rmse_mean = sum_norm / static_cast<double>(rep.n_ok);
    rep.rmse_mean_angstrom = sum_ang / static_cast<double>(rep.n_ok);
  }
  return rep;
}

}  // namespace atombench
