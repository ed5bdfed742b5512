#include "atombench/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "atombench/error.hpp"
#include "atombench/structio.hpp"

namespace atombench {
namespace {

using json = nlohmann::json;

constexpr const char* kPalette[] = {"#1f77b4", "#d4a017", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

constexpr double kLeft = 80, kRight = 20, kTop = 50, kBottom = 70;

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double x) {
  std::string s = fmt::format("{:.2f}", x);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string tick_label(double x) {
  std::string s = fmt::format("{:.6g}", x);
  if (s == "-0") s = "0";
  return s;
}

void check_common(const PlotSpec& spec) {
  if (spec.series.empty()) throw SpecError("plot has no series");
  if (spec.title.empty() || spec.x_label.empty() || spec.y_label.empty())
    throw SpecError("plot title and axis labels must be non-empty");
  if (spec.width < 200 || spec.height < 150) throw SpecError("plot is too small");
  for (const auto& s : spec.series) {
    if (s.name.empty()) throw SpecError("series name must be non-empty");
    for (double v : s.values)
      if (!std::isfinite(v) || v < 0)
        throw SpecError(fmt::format("series '{}' holds a negative or non-finite value", s.name));
  }
}

double series_max(const PlotSpec& spec) {
  double m = 0;
  for (const auto& s : spec.series)
    for (double v : s.values) m = std::max(m, v);
  return m;
}

class Canvas {
 public:
  Canvas(const PlotSpec& spec, double x_lo, double x_hi, double y_hi)
      : spec_(spec), x_lo_(x_lo), x_hi_(x_hi), y_hi_(y_hi) {
    out_ = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\">\n",
        spec.width, spec.height, spec.width, spec.height);
    out_ += fmt::format("<title>{}</title>\n", xml_escape(spec.title));
    if (!spec.metadata.empty()) out_ += fmt::format("<metadata>{}</metadata>\n", xml_escape(spec.metadata));
    out_ += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
                        spec.width, spec.height);
  }

  double px(double x) const { return kLeft + (x - x_lo_) / (x_hi_ - x_lo_) * plot_w(); }
  double py(double y) const { return kTop + plot_h() - y / y_hi_ * plot_h(); }
  double plot_w() const { return spec_.width - kLeft - kRight; }
  double plot_h() const { return spec_.height - kTop - kBottom; }

  void rect(double x0, double x1, double y, const char* fill, double opacity) {
    const double top = py(y), bottom = py(0);
    out_ += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"{}\" "
        "stroke=\"{}\" stroke-width=\"0.5\"/>\n",
        num(px(x0)), num(top), num(px(x1) - px(x0)), num(bottom - top), fill, num(opacity), fill);
  }

  void y_axis(const std::vector<double>& ticks) {
    out_ += "<g font-family=\"sans-serif\" font-size=\"12\" stroke=\"#000000\">\n";
    out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n", num(kLeft), num(kTop),
                        num(kLeft), num(kTop + plot_h()));
    for (double t : ticks) {
      const double y = py(t);
      out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n", num(kLeft - 5), num(y),
                          num(kLeft), num(y));
      out_ += fmt::format(
          "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" stroke=\"none\">{}</text>\n", num(kLeft - 8),
          num(y + 4), xml_escape(tick_label(t)));
    }
    out_ += "</g>\n";
  }

  void x_axis_line() {
    out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>\n",
                        num(kLeft), num(kTop + plot_h()), num(kLeft + plot_w()), num(kTop + plot_h()));
  }

  void x_tick(double x, const std::string& label) {
    const double bottom = kTop + plot_h();
    out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>\n",
                        num(px(x)), num(bottom), num(px(x)), num(bottom + 5));
    out_ += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">{}</text>\n",
        num(px(x)), num(bottom + 20), xml_escape(label));
  }

  void labels() {
    out_ += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">{}</text>\n",
        num(spec_.width / 2.0), num(kTop / 2 + 6), xml_escape(spec_.title));
    out_ += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">{}</text>\n",
        num(kLeft + plot_w() / 2), num(spec_.height - 20.0), xml_escape(spec_.x_label));
    const double cy = kTop + plot_h() / 2;
    out_ += fmt::format(
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        num(cy), num(cy), xml_escape(spec_.y_label));
  }

  void legend(double opacity) {
    out_ += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    double y = kTop + 5;
    for (std::size_t i = 0; i < spec_.series.size(); ++i) {
      const double x = kLeft + plot_w() - 150;
      out_ += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\" fill-opacity=\"{}\"/>\n",
          num(x), num(y), color(i), num(opacity));
      out_ += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(x + 18), num(y + 10),
                          xml_escape(spec_.series[i].name));
      y += 18;
    }
    out_ += "</g>\n";
  }

  static const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

  std::string& body() { return out_; }
  std::string finish() { return out_ + "</svg>\n"; }

 private:
  const PlotSpec& spec_;
  double x_lo_, x_hi_, y_hi_;
  std::string out_;
};

double y_top(const std::vector<double>& ticks, double max_value) {
  return std::max(ticks.back(), max_value > 0 ? max_value : 1.0);
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int max_ticks) {
  if (!(hi > lo)) hi = lo + 1;
  max_ticks = std::max(max_ticks, 2);
  const double raw = (hi - lo) / (max_ticks - 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag * 10;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    const double s = m * mag;
    const double first = std::ceil(lo / s - 1e-9) * s;
    const double last = std::floor(hi / s + 1e-9) * s;
    if (static_cast<int>(std::llround((last - first) / s)) + 1 <= max_ticks) {
      step = s;
      break;
    }
  }
  std::vector<double> ticks;
  const double first = std::ceil(lo / step - 1e-9) * step;
  for (double t = first; t <= hi + step * 1e-9 && static_cast<int>(ticks.size()) < max_ticks;
       t = first + step * static_cast<double>(ticks.size()))
    ticks.push_back(std::abs(t) < step * 1e-12 ? 0.0 : t);
  return ticks;
}

std::string emit_overlay_histogram(const PlotSpec& spec) {
  check_common(spec);
  if (spec.edges.size() < 2) throw SpecError("histogram needs at least two edges");
  for (std::size_t i = 1; i < spec.edges.size(); ++i)
    if (!(spec.edges[i] > spec.edges[i - 1])) throw SpecError("histogram edges must increase");
  for (const auto& s : spec.series)
    if (s.values.size() != spec.edges.size() - 1)
      throw SpecError(fmt::format("series '{}' has {} bins, edges define {}", s.name,
                                  s.values.size(), spec.edges.size() - 1));

  const double vmax = series_max(spec);
  const auto yticks = nice_ticks(0, vmax > 0 ? vmax : 1);
  Canvas cv(spec, spec.edges.front(), spec.edges.back(), y_top(yticks, vmax));
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    cv.body() += fmt::format("<g id=\"series-{}\">\n", k);
    const auto& s = spec.series[k];
    for (std::size_t i = 0; i < s.values.size(); ++i)
      cv.rect(spec.edges[i], spec.edges[i + 1], s.values[i], Canvas::color(k), 0.5);
    cv.body() += "</g>\n";
  }
  cv.x_axis_line();
  for (double t : nice_ticks(spec.edges.front(), spec.edges.back())) cv.x_tick(t, tick_label(t));
  cv.y_axis(yticks);
  cv.labels();
  cv.legend(0.5);
  return cv.finish();
}

std::string emit_bar_chart(const PlotSpec& spec) {
  check_common(spec);
  if (spec.categories.empty()) throw SpecError("bar chart has no categories");
  for (const auto& s : spec.series)
    if (s.values.size() != spec.categories.size())
      throw SpecError(fmt::format("series '{}' has {} values for {} categories", s.name,
                                  s.values.size(), spec.categories.size()));

  const double vmax = series_max(spec);
  const auto yticks = nice_ticks(0, vmax > 0 ? vmax : 1);
  const double ncat = static_cast<double>(spec.categories.size());
  Canvas cv(spec, 0, ncat, y_top(yticks, vmax));
  const double group = 0.8, bar = group / static_cast<double>(spec.series.size());
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    cv.body() += fmt::format("<g id=\"series-{}\">\n", k);
    for (std::size_t c = 0; c < spec.categories.size(); ++c) {
      const double x0 = static_cast<double>(c) + 0.1 + bar * static_cast<double>(k);
      cv.rect(x0, x0 + bar, spec.series[k].values[c], Canvas::color(k), 0.9);
    }
    cv.body() += "</g>\n";
  }
  cv.x_axis_line();
  for (std::size_t c = 0; c < spec.categories.size(); ++c)
    cv.x_tick(static_cast<double>(c) + 0.5, spec.categories[c]);
  cv.y_axis(yticks);
  cv.labels();
  cv.legend(0.9);
  return cv.finish();
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t line = 1;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
          if (i + 1 < text.size() && text[i + 1] != ',' && text[i + 1] != '\n' && text[i + 1] != '\r')
            throw ParseError(line, "characters after closing quote");
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started) throw ParseError(line, "quote inside unquoted field");
        quoted = field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
        row.clear();
        field.clear();
        field_started = false;
        ++line;
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (quoted) throw ParseError(line, "unterminated quoted field");
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string emit_leaderboard_csv(const std::vector<EvalPair>& pairs, const Split& split) {
  std::map<std::string, const EvalPair*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.id, &p);
  std::string out = "id,target,prediction\r\n";
  for (const auto& id : split.test) {
    const auto it = by_id.find(id);
    if (it == by_id.end() || !it->second->lattice_evaluable()) continue;
    const EvalPair& p = *it->second;
    out += csv_field(p.id) + "," + csv_field(write_poscar(p.truth)) + "," +
           csv_field(write_poscar(*p.pred)) + "\r\n";
  }
  return out;
}

std::string report_to_json(const MetricReport& r, std::string_view config_json,
                           const std::vector<EvalPair>* pairs) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "metric_report";
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  j["eval"] = {{"nbins", r.config.nbins},
               {"epsilon", r.config.epsilon},
               {"sensitivity_epsilon", r.config.sensitivity_epsilon},
               {"angle_domain", r.config.angle_domain ? json::array({kNiggliAngleDomain.lo, kNiggliAngleDomain.hi})
                                                      : json(nullptr)},
               {"rmse_norm", rmse_norm_name(r.config.rmse.norm)},
               {"match_mode", match_mode_name(r.config.rmse.match)},
               {"align_translation", r.config.rmse.align_translation}};
  json mae, kld, kld_s, hist;
  for (LatticeParam p : kAllLatticeParams) {
    const auto i = static_cast<std::size_t>(p);
    mae[name(p)] = r.mae[i];
    kld[name(p)] = r.kld[i];
    kld_s[name(p)] = r.kld_sensitivity[i];
    hist[name(p)] = {{"edges", r.histograms[i].truth.edges},
                     {"truth", r.histograms[i].truth.counts},
                     {"pred", r.histograms[i].pred.counts}};
  }
  j["mae"] = std::move(mae);
  j["mae_units"] = {{"a", "angstrom"}, {"b", "angstrom"}, {"c", "angstrom"},
                    {"alpha", "degree"}, {"beta", "degree"}, {"gamma", "degree"}};
  j["kld_nats"] = std::move(kld);
  j["kld_nats_sensitivity"] = std::move(kld_s);
  j["rmse_mean"] = r.rmse_mean ? json(*r.rmse_mean) : json(nullptr);
  j["rmse_mean_angstrom"] = r.rmse_mean_angstrom ? json(*r.rmse_mean_angstrom) : json(nullptr);
  j["counts"] = {{"pairs", r.n_pairs},
                 {"lattice_evaluable", r.n_lattice},
                 {"ok", r.n_ok},
                 {"skipped_species", r.n_skipped_species},
                 {"skipped_parse", r.n_skipped_parse},
                 {"skipped_reduction", r.n_skipped_reduction}};
  j["histograms"] = std::move(hist);
  if (pairs) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& p : *pairs) rows.emplace_back(p.id, status_name(p.status));
    std::sort(rows.begin(), rows.end());
    json st = json::array();
    for (const auto& [id, s] : rows) st.push_back({{"id", id}, {"status", s}});
    j["pairs"] = std::move(st);
  }
  return j.dump(1) + "\n";
}

}  // namespace atombench
