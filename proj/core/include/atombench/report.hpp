#pragma once

// Output artefacts: static SVG charts, leaderboard CSV and JSON metric
// reports. Every emitter is a pure function of its input, byte for byte.

#include <string>
#include <string_view>
#include <vector>

#include "atombench/metrics.hpp"
#include "atombench/protocol.hpp"

namespace atombench {

struct Series {
  std::string name;
  std::vector<double> values;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  // Overlay histograms: shared bin edges (values are per-bin heights).
  std::vector<double> edges;
  // Bar charts: one label per bar group (values are per-category heights).
  std::vector<std::string> categories;
  int width = 800;
  int height = 500;
  // Free text (typically the run-config JSON) stored in <metadata>.
  std::string metadata;
};

// Overlaid translucent histograms sharing one set of edges. Throws SpecError
// for empty series, missing labels, mismatched bin counts, negative or
// non-finite heights.
std::string emit_overlay_histogram(const PlotSpec& spec);

// Grouped bar chart, one group per category and one bar per series.
// Throws SpecError as above.
std::string emit_bar_chart(const PlotSpec& spec);

// At most max_ticks round-number ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int max_ticks = 8);

// RFC 4180 field quoting (quotes doubled, field quoted when it contains
// a comma, quote, CR or LF).
std::string csv_field(std::string_view s);
// Parses RFC 4180 text into rows of fields. Throws ParseError.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Header "id,target,prediction"; target and prediction hold the POSCAR
// text of the (reduced) truth and predicted structures. One row per test id
// of the split whose pair has both lattices defined, in split order.
std::string emit_leaderboard_csv(const std::vector<EvalPair>& pairs, const Split& split);

// Report JSON (schema kReportSchemaVersion). config_json is embedded verbatim
// as the "config" member; pairs adds a per-pair status table when non-null.
std::string report_to_json(const MetricReport& report, std::string_view config_json,
                           const std::vector<EvalPair>* pairs = nullptr);

}  // namespace atombench
