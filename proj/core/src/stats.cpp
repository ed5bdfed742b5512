#include "atombench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "atombench/error.hpp"
#include "atombench/niggli.hpp"
#include "atombench/report.hpp"
#include "atombench/structio.hpp"

namespace atombench {
namespace {

using json = nlohmann::json;

struct Candidate {
  std::array<std::int64_t, 3> coeffs;
  Vec3 v;
  double len;
};

double angle_deg(const Vec3& u, const Vec3& v) {
  return rad2deg(std::acos(std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0)));
}

}  // namespace

CompositionWeighting parse_weighting(std::string_view s) {
  if (s == "sites") return CompositionWeighting::sites;
  if (s == "structures") return CompositionWeighting::structures;
  throw InvalidArgument(fmt::format("unknown composition weighting '{}' (sites|structures)", s));
}

const char* weighting_name(CompositionWeighting w) {
  return w == CompositionWeighting::sites ? "sites" : "structures";
}

CompositionStats element_fractions(const std::vector<DatasetRecord>& records,
                                   CompositionWeighting weighting) {
  if (records.empty()) throw EmptyDataset("no records for composition statistics");
  std::map<std::string, long> counts;
  long total = 0;
  for (const auto& r : records) {
    for (const auto& [el, n] : element_counts(r.structure.species())) {
      const long w = weighting == CompositionWeighting::sites ? n : 1;
      counts[el] += w;
      total += w;
    }
  }
  CompositionStats out;
  out.weighting = weighting;
  for (const auto& [el, n] : counts)
    out.fractions[el] = static_cast<double>(n) / static_cast<double>(total);
  out.top_k.assign(out.fractions.begin(), out.fractions.end());
  std::stable_sort(out.top_k.begin(), out.top_k.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });
  return out;
}

const char* family_name(CrystalFamily f) {
  switch (f) {
    case CrystalFamily::cubic: return "cubic";
    case CrystalFamily::hexagonal: return "hexagonal";
    case CrystalFamily::trigonal: return "trigonal";
    case CrystalFamily::tetragonal: return "tetragonal";
    case CrystalFamily::orthorhombic: return "orthorhombic";
    case CrystalFamily::monoclinic: return "monoclinic";
    case CrystalFamily::triclinic: return "triclinic";
  }
  return "";
}

int lattice_symmetry_order(const LatticeParams& p, double len_tol_rel, double ang_tol_deg) {
  const Mat3 m = params_to_matrix(p).rows();
  const double lens[3] = {p.a, p.b, p.c};
  const double angles[3][3] = {{0, p.gamma, p.beta}, {p.gamma, 0, p.alpha}, {p.beta, p.alpha, 0}};

  // Lattice vectors u a + v b + w c with |u|,|v|,|w| <= 2, bucketed by the
  // basis length they could stand in for.
  std::array<std::vector<Candidate>, 3> rows;
  for (std::int64_t u = -2; u <= 2; ++u)
    for (std::int64_t v = -2; v <= 2; ++v)
      for (std::int64_t w = -2; w <= 2; ++w) {
        if (u == 0 && v == 0 && w == 0) continue;
        const Vec3 vec = vecmat(Vec3{double(u), double(v), double(w)}, m);
        const double len = norm(vec);
        for (int i = 0; i < 3; ++i)
          if (std::abs(len - lens[i]) <= len_tol_rel * lens[i]) rows[i].push_back({{u, v, w}, vec, len});
      }

  int order = 0;
  for (const auto& r0 : rows[0])
    for (const auto& r1 : rows[1]) {
      if (std::abs(angle_deg(r0.v, r1.v) - angles[0][1]) > ang_tol_deg) continue;
      for (const auto& r2 : rows[2]) {
        if (std::abs(angle_deg(r0.v, r2.v) - angles[0][2]) > ang_tol_deg) continue;
        if (std::abs(angle_deg(r1.v, r2.v) - angles[1][2]) > ang_tol_deg) continue;
        const IMat3 wmat{r0.coeffs, r1.coeffs, r2.coeffs};
        const auto d = det(wmat);
        if (d == 1 || d == -1) ++order;
      }
    }
  return order;
}

CrystalFamily classify_family(const LatticeParams& p, double len_tol_rel, double ang_tol_deg) {
  const int order = lattice_symmetry_order(p, len_tol_rel, ang_tol_deg);
  if (order >= 48) return CrystalFamily::cubic;
  if (order >= 24) return CrystalFamily::hexagonal;
  if (order >= 16) return CrystalFamily::tetragonal;
  if (order >= 12) return CrystalFamily::trigonal;
  if (order >= 8) return CrystalFamily::orthorhombic;
  if (order >= 4) return CrystalFamily::monoclinic;
  return CrystalFamily::triclinic;
}

std::map<CrystalFamily, long> family_counts(const std::vector<DatasetRecord>& records,
                                            double niggli_tol, double len_tol_rel,
                                            double ang_tol_deg) {
  std::map<CrystalFamily, long> counts;
  for (CrystalFamily f : kAllFamilies) counts[f] = 0;
  for (const auto& r : records) {
    const auto red = niggli_reduce(r.structure.lattice(), niggli_tol);
    ++counts[classify_family(matrix_to_params(red.reduced), len_tol_rel, ang_tol_deg)];
  }
  return counts;
}

Histogram tc_histogram(const std::vector<DatasetRecord>& records, const std::vector<double>& edges) {
  if (records.empty()) throw EmptyDataset("no records for a Tc histogram");
  std::vector<double> tcs;
  tcs.reserve(records.size());
  for (const auto& r : records) tcs.push_back(r.tc);
  return make_histogram(tcs, edges);
}

std::vector<double> tc_edges(const std::vector<DatasetRecord>& records, double width) {
  if (!(width > 0)) throw InvalidArgument("Tc bin width must be positive");
  double max_tc = 0;
  for (const auto& r : records) max_tc = std::max(max_tc, r.tc);
  const auto nbins = static_cast<std::size_t>(std::floor(max_tc / width)) + 1;
  std::vector<double> edges(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i) edges[i] = width * static_cast<double>(i);
  return edges;
}

DatasetStats compute_stats(const std::vector<DatasetRecord>& records,
                           CompositionWeighting weighting, double niggli_tol, double tc_bin_width) {
  DatasetStats s;
  s.n_records = records.size();
  s.composition = element_fractions(records, weighting);
  s.families = family_counts(records, niggli_tol);
  s.tc = tc_histogram(records, tc_edges(records, tc_bin_width));
  return s;
}

std::string stats_to_json(const DatasetStats& s, std::string_view config_json) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "dataset_stats";
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  j["n_records"] = s.n_records;
  j["composition"]["weighting"] = weighting_name(s.composition.weighting);
  json top = json::array();
  for (const auto& [el, f] : s.composition.top_k) top.push_back(json::array({el, f}));
  j["composition"]["fractions"] = std::move(top);
  json fam = json::array();
  for (CrystalFamily f : kAllFamilies) {
    const auto it = s.families.find(f);
    fam.push_back(json::array({family_name(f), it == s.families.end() ? 0 : it->second}));
  }
  j["families"] = std::move(fam);
  j["tc_histogram"] = {{"edges", s.tc.edges}, {"counts", s.tc.counts}, {"n_total", s.tc.n_total}};
  return j.dump(1) + "\n";
}

std::string stats_to_csv(const DatasetStats& s, std::string_view config_json) {
  std::string out = "section,key,value\n";
  if (!config_json.empty()) out += "config,run," + csv_field(config_json) + "\n";
  out += fmt::format("dataset,n_records,{}\n", s.n_records);
  for (const auto& [el, f] : s.composition.top_k)
    out += fmt::format("composition_{},{},{:.9f}\n", weighting_name(s.composition.weighting), el, f);
  for (CrystalFamily f : kAllFamilies) {
    const auto it = s.families.find(f);
    out += fmt::format("family,{},{}\n", family_name(f), it == s.families.end() ? 0 : it->second);
  }
  for (std::size_t i = 0; i < s.tc.counts.size(); ++i)
    out += fmt::format("tc_bin,{}-{},{}\n", fixed6(s.tc.edges[i]), fixed6(s.tc.edges[i + 1]),
                       s.tc.counts[i]);
  return out;
}

}  // namespace atombench
