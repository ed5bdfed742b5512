#pragma once

// Dataset-level statistics: elemental composition, lattice-family
// distribution and Tc histograms.

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atombench/dataset.hpp"
#include "atombench/metrics.hpp"
#include "atombench/xtal.hpp"

namespace atombench {

// sites: every atomic site counts once. structures: every structure
// counts each element it contains once.
enum class CompositionWeighting { sites, structures };

CompositionWeighting parse_weighting(std::string_view s);
const char* weighting_name(CompositionWeighting w);

struct CompositionStats {
  std::map<std::string, double> fractions;
  // (element, fraction) by descending fraction, ties by symbol.
  std::vector<std::pair<std::string, double>> top_k;
  CompositionWeighting weighting = CompositionWeighting::sites;
};

// Throws EmptyDataset.
CompositionStats element_fractions(const std::vector<DatasetRecord>& records,
                                   CompositionWeighting weighting = CompositionWeighting::sites);

enum class CrystalFamily { cubic, hexagonal, trigonal, tetragonal, orthorhombic, monoclinic, triclinic };
inline constexpr std::array<CrystalFamily, 7> kAllFamilies = {
    CrystalFamily::cubic,        CrystalFamily::hexagonal,  CrystalFamily::trigonal,
    CrystalFamily::tetragonal,   CrystalFamily::orthorhombic, CrystalFamily::monoclinic,
    CrystalFamily::triclinic};

const char* family_name(CrystalFamily f);

// Lattice-metric classification (a proxy, not a space-group assignment).
// Counts the basis changes W with entries in {-2..2} that preserve the
// metric of the reduced cell within the tolerances (lengths relative,
// angles in degrees). The count is the order of the lattice point group:
// 48 cubic, 24 hexagonal, 16 tetragonal, 12 trigonal (rhombohedral),
// 8 orthorhombic, 4 monoclinic, 2 triclinic. Centred lattices are caught
// through their primitive cells (fcc at a=b=c, 60 deg is cubic).
// Input is expected to be Niggli-reduced.
CrystalFamily classify_family(const LatticeParams& p, double len_tol_rel = 1e-2,
                              double ang_tol_deg = 0.5);

// Number of metric-preserving W found for p (exposed for tests).
int lattice_symmetry_order(const LatticeParams& p, double len_tol_rel = 1e-2,
                           double ang_tol_deg = 0.5);

// Reduces each structure, then classifies it.
std::map<CrystalFamily, long> family_counts(const std::vector<DatasetRecord>& records,
                                            double niggli_tol, double len_tol_rel = 1e-2,
                                            double ang_tol_deg = 0.5);

// Throws EmptyDataset.
Histogram tc_histogram(const std::vector<DatasetRecord>& records, const std::vector<double>& edges);

// Uniform edges [0, width, 2 width, ...] covering the largest Tc.
std::vector<double> tc_edges(const std::vector<DatasetRecord>& records, double width = 5.0);

struct DatasetStats {
  std::size_t n_records = 0;
  CompositionStats composition;
  std::map<CrystalFamily, long> families;
  Histogram tc;
};

DatasetStats compute_stats(const std::vector<DatasetRecord>& records,
                           CompositionWeighting weighting, double niggli_tol,
                           double tc_bin_width = 5.0);

std::string stats_to_json(const DatasetStats& s, std::string_view config_json);
// Rows of section,key,value; a non-empty config echo becomes a
// "config,run,<json>" row after the header.
std::string stats_to_csv(const DatasetStats& s, std::string_view config_json = {});

}  // namespace atombench
