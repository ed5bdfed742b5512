#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "atombench/atomic_file.hpp"
#include "atombench/config.hpp"
#include "atombench/dataset.hpp"
#include "atombench/error.hpp"
#include "atombench/fetch.hpp"
#include "atombench/metrics.hpp"
#include "atombench/protocol.hpp"
#include "atombench/report.hpp"
#include "atombench/stats.hpp"
#include "atombench/structio.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace atombench::cli {
namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Data: return "data";
    case ErrorKind::Io: return "io";
  }
  return "internal";
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Data: return kExitData;
    case ErrorKind::Io: return kExitIo;
  }
  return kExitInternal;
}

int fail(std::ostream& err, const std::string& code, const char* kind, int status, const std::string& msg) {
  const json j{{"code", code}, {"kind", kind}, {"exit", status}, {"message", msg}};
  err << "atombench: error " << j.dump(-1, ' ', false, json::error_handler_t::replace) << "\n";
  return status;
}

SplitRatios parse_ratios(const std::string& text) {
  std::vector<double> v;
  std::size_t at = 0;
  while (at <= text.size()) {
    const auto end = std::min(text.find_first_of(",:", at), text.size());
    double x = 0;
    const auto [p, ec] = std::from_chars(text.data() + at, text.data() + end, x);
    if (ec != std::errc() || p != text.data() + end || end == at)
      throw InvalidArgument(fmt::format("--ratios: cannot parse '{}'", text));
    v.push_back(x);
    at = end + 1;
  }
  if (v.size() != 3) throw InvalidArgument("--ratios takes three numbers, e.g. 0.8,0.1,0.1");
  return {v[0], v[1], v[2]};
}

fs::path output_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  return dir;
}

void emit(std::ostream& out, const fs::path& path, std::string_view content) {
  write_file_atomic(path, content);
  out << "wrote " << path.string() << "\n";
}

std::vector<DatasetRecord> load_clean(const fs::path& path, DatasetSchema schema) {
  auto r = load_dataset(path, schema);
  if (!r.rejects.empty()) {
    const auto& first = r.rejects.front();
    throw SchemaError(fmt::format("{}: {} invalid record(s); first at index {}: {}", path.string(),
                                  r.rejects.size(), first.index, first.reason));
  }
  return std::move(r.records);
}

fs::path default_cache_dir() {
  if (const char* env = std::getenv("ATOMBENCH_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "atombench";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "atombench";
  return fs::temp_directory_path() / "atombench-cache";
}

// Directory of <id>.poscar / <id>.vasp / <id>.txt files, or a canonical
// dataset JSON. Files that do not parse are left out, so their ids pair
// as parse_failed.
std::map<std::string, Crystal> load_predictions(const fs::path& path, std::ostream& out) {
  std::map<std::string, Crystal> preds;
  if (!fs::exists(path)) throw IoError(fmt::format("predictions '{}' do not exist", path.string()));
  if (!fs::is_directory(path)) {
    const auto r = load_dataset(path, DatasetSchema::generic);
    for (const auto& rec : r.records) preds.emplace(rec.id, rec.structure);
    if (!r.rejects.empty()) out << fmt::format("{} prediction record(s) unreadable\n", r.rejects.size());
    return preds;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(path))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::size_t unreadable = 0;
  for (const auto& f : files) {
    const std::string ext = f.extension().string();
    if (ext != ".poscar" && ext != ".vasp" && ext != ".txt") continue;
    const std::string id = f.stem().string();
    if (preds.count(id)) throw SchemaError(fmt::format("more than one prediction file for id '{}'", id));
    const std::string text = read_file(f);
    auto parse_as = [&](bool poscar) { return poscar ? parse_poscar(text, f.string()) : parse_atomgpt_block(text, f.string()); };
    const bool poscar_first = ext != ".txt";
    try {
      preds.emplace(id, parse_as(poscar_first));
    } catch (const Error&) {
      try {
        preds.emplace(id, parse_as(!poscar_first));
      } catch (const Error&) {
        ++unreadable;
      }
    }
  }
  if (unreadable) out << fmt::format("{} prediction file(s) unreadable\n", unreadable);
  return preds;
}

// ---- subcommands -----------------------------------------------------------

struct FetchArgs {
  std::string name, manifests, url, sha256, cache_dir;
  std::int64_t record_count = 0;
};

void cmd_fetch(const FetchArgs& a, std::ostream& out) {
  DatasetManifest m;
  if (!a.url.empty()) {
    if (a.sha256.empty() || a.record_count <= 0)
      throw InvalidArgument("fetch --url needs --sha256 and --record-count");
    m = {a.name.empty() ? fs::path(a.url).filename().string() : a.name, a.url, a.sha256, a.record_count};
  } else {
    if (a.manifests.empty() || a.name.empty())
      throw InvalidArgument("fetch needs a dataset name with --manifests, or --url");
    const auto all = load_manifests(a.manifests);
    const auto it = std::find_if(all.begin(), all.end(), [&](const DatasetManifest& x) { return x.name == a.name; });
    if (it == all.end()) throw InvalidArgument(fmt::format("no manifest named '{}' in {}", a.name, a.manifests));
    m = *it;
  }
  const fs::path cache = a.cache_dir.empty() ? default_cache_dir() : fs::path(a.cache_dir);
  out << fetch_dataset(m, cache).string() << "\n";
}

void cmd_ingest(const RunConfig& cfg, bool allow_rejects, std::ostream& out) {
  const auto r = load_dataset(cfg.dataset, cfg.schema);
  const auto dir = output_dir(cfg);
  const std::string echo = config_to_json(cfg);
  emit(out, dir / "dataset.json", records_to_json(r.records, echo));
  emit(out, dir / "rejects.json", rejects_to_json(r.rejects, echo));
  out << fmt::format("{} raw, {} records, {} rejected\n", r.raw_count, r.records.size(), r.rejects.size());
  if (!r.rejects.empty() && !allow_rejects) {
    const auto& first = r.rejects.front();
    throw SchemaError(fmt::format("{} record(s) rejected; first at index {}{}: {}", r.rejects.size(), first.index,
                                  first.id.empty() ? "" : " (" + first.id + ")", first.reason));
  }
}

void cmd_split(const RunConfig& cfg, std::ostream& out) {
  const auto records = load_clean(cfg.dataset, cfg.schema);
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.id);
  const auto s = split_dataset(ids, cfg.ratios, cfg.seed, cfg.rounding);
  emit(out, output_dir(cfg) / "split.json", split_to_json(s, config_to_json(cfg)));
  out << fmt::format("train {}, val {}, test {}\n", s.train.size(), s.val.size(), s.test.size());
}

void cmd_eval(const RunConfig& cfg, const std::string& predictions, const std::string& split_path,
              std::ostream& out) {
  const auto records = load_clean(cfg.dataset, cfg.schema);
  Split split;
  std::vector<DatasetRecord> truth;
  if (split_path.empty()) {
    truth = records;
    for (const auto& r : records) split.test.push_back(r.id);
    std::sort(split.test.begin(), split.test.end());
  } else {
    split = split_from_json(read_file(split_path));
    std::map<std::string, const DatasetRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.id, &r);
    for (const auto& id : split.test) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw SchemaError(fmt::format("split test id '{}' is not in {}", id, cfg.dataset));
      truth.push_back(*it->second);
    }
  }
  const auto preds = load_predictions(predictions, out);
  PairingOptions popt;
  popt.niggli_tol = cfg.niggli_tol;
  const auto pairs = pair_structures(truth, preds, popt);
  const auto report = evaluate(pairs, cfg.eval_config());

  const auto dir = output_dir(cfg);
  const std::string echo = config_to_json(cfg);
  emit(out, dir / "report.json", report_to_json(report, echo, &pairs));
  const std::string csv = emit_leaderboard_csv(pairs, split);
  emit(out, dir / "leaderboard.csv", csv);
  const json meta{{"config", json::parse(echo)},
                  {"file", "leaderboard.csv"},
                  {"columns", {"id", "target", "prediction"}},
                  {"payload_format", "POSCAR, Niggli-reduced, RFC 4180 quoted"},
                  {"rows", parse_csv(csv).size() - 1},
                  {"sha256", sha256_hex(csv)}};
  emit(out, dir / "leaderboard.meta.json", meta.dump(1) + "\n");
  out << fmt::format("pairs {}: ok {}, species mismatch {}, missing/unparsed {}, reduction failed {}\n",
                     report.n_pairs, report.n_ok, report.n_skipped_species, report.n_skipped_parse,
                     report.n_skipped_reduction);
}

void cmd_stats(const RunConfig& cfg, const std::string& weighting, std::ostream& out) {
  const auto records = load_clean(cfg.dataset, cfg.schema);
  const auto s = compute_stats(records, parse_weighting(weighting), cfg.niggli_tol);
  const auto dir = output_dir(cfg);
  const std::string echo = config_to_json(cfg);
  emit(out, dir / "stats.json", stats_to_json(s, echo));
  emit(out, dir / "stats.csv", stats_to_csv(s, echo));
}

// ---- plot ------------------------------------------------------------------

const char* axis_label(LatticeParam p) {
  switch (p) {
    case LatticeParam::a: return "a (Å)";
    case LatticeParam::b: return "b (Å)";
    case LatticeParam::c: return "c (Å)";
    case LatticeParam::alpha: return "α (degrees)";
    case LatticeParam::beta: return "β (degrees)";
    case LatticeParam::gamma: return "γ (degrees)";
  }
  return "";
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: {}", path, e.what()));
  }
}

std::vector<double> doubles(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

void plot_reports(const std::vector<json>& docs, const std::vector<std::string>& labels, const fs::path& dir,
                  const std::string& meta, std::ostream& out) {
  if (docs.size() == 1) {
    for (LatticeParam p : kAllLatticeParams) {
      const auto& h = docs[0].at("histograms").at(name(p));
      PlotSpec s;
      s.title = fmt::format("Distribution of {}", name(p));
      s.x_label = axis_label(p);
      s.y_label = "structures";
      s.edges = doubles(h.at("edges"));
      s.series = {{"target", doubles(h.at("truth"))}, {"prediction", doubles(h.at("pred"))}};
      s.metadata = meta;
      emit(out, dir / fmt::format("hist_{}.svg", name(p)), emit_overlay_histogram(s));
    }
  }
  auto bars = [&](const std::string& file, const std::string& title, const std::string& ylabel,
                  const std::string& field, std::vector<LatticeParam> params) {
    PlotSpec s;
    s.title = title;
    s.x_label = "lattice parameter";
    s.y_label = ylabel;
    for (auto p : params) s.categories.push_back(name(p));
    for (std::size_t k = 0; k < docs.size(); ++k) {
      Series ser{labels[k], {}};
      for (auto p : params) ser.values.push_back(docs[k].at(field).at(name(p)).get<double>());
      s.series.push_back(std::move(ser));
    }
    s.metadata = meta;
    emit(out, dir / file, emit_bar_chart(s));
  };
  using P = LatticeParam;
  bars("kld.svg", "KL divergence of lattice parameters", "KLD (nats)", "kld_nats",
       {P::a, P::b, P::c, P::alpha, P::beta, P::gamma});
  bars("mae_lengths.svg", "MAE of lattice lengths", "MAE (Å)", "mae", {P::a, P::b, P::c});
  bars("mae_angles.svg", "MAE of lattice angles", "MAE (degrees)", "mae", {P::alpha, P::beta, P::gamma});
}

void plot_stats(const json& doc, const fs::path& dir, const std::string& meta, std::ostream& out) {
  PlotSpec el;
  el.title = "Most frequent elements";
  el.x_label = "element";
  el.y_label = "share of " + doc.at("composition").at("weighting").get<std::string>() + " (%)";
  Series share{"records", {}};
  const auto& fr = doc.at("composition").at("fractions");
  for (std::size_t i = 0; i < std::min<std::size_t>(10, fr.size()); ++i) {
    el.categories.push_back(fr[i].at(0).get<std::string>());
    share.values.push_back(100.0 * fr[i].at(1).get<double>());
  }
  el.series = {share};
  el.metadata = meta;
  emit(out, dir / "elements.svg", emit_bar_chart(el));

  PlotSpec fam;
  fam.title = "Crystal families (lattice proxy)";
  fam.x_label = "family";
  fam.y_label = "structures";
  Series counts{"records", {}};
  for (const auto& f : doc.at("families")) {
    fam.categories.push_back(f.at(0).get<std::string>());
    counts.values.push_back(f.at(1).get<double>());
  }
  fam.series = {counts};
  fam.metadata = meta;
  emit(out, dir / "families.svg", emit_bar_chart(fam));

  PlotSpec tc;
  tc.title = "Critical temperature";
  tc.x_label = "Tc (K)";
  tc.y_label = "structures";
  tc.edges = doubles(doc.at("tc_histogram").at("edges"));
  tc.series = {{"records", doubles(doc.at("tc_histogram").at("counts"))}};
  tc.metadata = meta;
  emit(out, dir / "tc.svg", emit_overlay_histogram(tc));
}

void cmd_plot(const RunConfig& cfg, const std::vector<std::string>& inputs, std::vector<std::string> labels,
              std::ostream& out) {
  if (!labels.empty() && labels.size() != inputs.size())
    throw InvalidArgument(fmt::format("{} --label value(s) for {} input(s)", labels.size(), inputs.size()));
  std::vector<json> docs;
  std::set<std::string> kinds;
  for (const auto& in : inputs) {
    docs.push_back(load_json(in));
    kinds.insert(docs.back().value("kind", ""));
  }
  if (kinds.size() != 1) throw SchemaError("plot inputs must all be reports or all be stats");
  if (labels.empty()) {
    for (const auto& in : inputs) {
      const fs::path p(in);
      const std::string parent = p.parent_path().filename().string();
      labels.push_back(p.stem() == "report" && !parent.empty() ? parent : p.stem().string());
    }
  }
  const auto dir = output_dir(cfg);
  const std::string meta = config_to_json(cfg);
  const std::string kind = *kinds.begin();
  try {
    if (kind == "metric_report") {
      plot_reports(docs, labels, dir, meta, out);
    } else if (kind == "dataset_stats") {
      if (docs.size() != 1) throw InvalidArgument("plot takes a single stats file");
      plot_stats(docs[0], dir, meta, out);
    } else {
      throw SchemaError(fmt::format("{}: not a report or stats file", inputs.front()));
    }
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("malformed plot input: {}", e.what()));
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmark toolkit for crystal-structure generators", "atombench"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  RunConfig cfg;
  std::string schema = "generic", ratios = "0.8,0.1,0.1", rounding = "remainder";
  std::string rmse_norm = "vol_per_atom", match_mode = "assignment", weighting = "sites";
  std::string predictions, split_path;
  std::vector<std::string> plot_inputs, labels;
  bool allow_rejects = false;
  FetchArgs fetch;

  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out_dir, "Output directory")->required(); };
  auto add_schema = [&](CLI::App* sub) {
    sub->add_option("--schema", schema, "Input schema: generic, jarvis or alexandria")->capture_default_str();
  };

  auto* f = app.add_subcommand("fetch", "Download a dataset archive into the local cache");
  f->add_option("name", fetch.name, "Dataset name in the manifest file");
  f->add_option("--manifests", fetch.manifests, "Manifest JSON file");
  f->add_option("--url", fetch.url, "Source URL (instead of a manifest)");
  f->add_option("--sha256", fetch.sha256, "Expected digest of the downloaded bytes");
  f->add_option("--record-count", fetch.record_count, "Expected number of records");
  f->add_option("--cache-dir", fetch.cache_dir, "Cache directory (default $ATOMBENCH_CACHE_DIR)");

  auto* ing = app.add_subcommand("ingest", "Validate a raw dataset and write canonical JSON");
  ing->add_option("input", cfg.dataset, "Raw dataset JSON")->required();
  add_schema(ing);
  ing->add_flag("--allow-rejects", allow_rejects, "Exit 0 even when records were rejected");
  add_out(ing);

  auto* spl = app.add_subcommand("split", "Seeded train/val/test split of a canonical dataset");
  spl->add_option("dataset", cfg.dataset, "Canonical dataset JSON")->required();
  spl->add_option("--seed", cfg.seed, "Shuffle seed")->capture_default_str();
  spl->add_option("--ratios", ratios, "train,val,test fractions")->capture_default_str();
  spl->add_option("--test-rounding", rounding, "remainder or floor")->capture_default_str();
  add_out(spl);

  auto* ev = app.add_subcommand("eval", "Score predicted structures against the ground truth");
  ev->add_option("dataset", cfg.dataset, "Canonical ground-truth JSON")->required();
  ev->add_option("predictions", predictions, "Directory of <id>.poscar|.vasp|.txt files or canonical JSON")
      ->required();
  ev->add_option("--split", split_path, "Split JSON; only its test ids are scored");
  ev->add_option("--nbins", cfg.nbins, "Histogram bins for KLD")->capture_default_str();
  ev->add_option("--epsilon", cfg.epsilon, "KLD smoothing")->capture_default_str();
  ev->add_option("--rmse-norm", rmse_norm, "vol_per_atom or cell_diagonal")->capture_default_str();
  ev->add_option("--match-mode", match_mode, "assignment or list_order")->capture_default_str();
  ev->add_option("--niggli-tol", cfg.niggli_tol, "Relative Niggli tolerance")->capture_default_str();
  add_out(ev);

  auto* st = app.add_subcommand("stats", "Composition, crystal-family and Tc statistics");
  st->add_option("dataset", cfg.dataset, "Dataset JSON")->required();
  add_schema(st);
  st->add_option("--weighting", weighting, "sites or structures")->capture_default_str();
  st->add_option("--niggli-tol", cfg.niggli_tol, "Relative Niggli tolerance")->capture_default_str();
  add_out(st);

  auto* pl = app.add_subcommand("plot", "Render report or stats JSON as SVG");
  pl->add_option("inputs", plot_inputs, "report.json files, or one stats.json")->required();
  pl->add_option("--label", labels, "Series label per input");
  add_out(pl);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return fail(err, "UsageError", "usage", kExitUsage, e.what());
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.schema = parse_schema_name(schema);
    cfg.ratios = parse_ratios(ratios);
    cfg.rounding = parse_rounding(rounding);
    cfg.rmse_norm = parse_rmse_norm(rmse_norm);
    cfg.match_mode = parse_match_mode(match_mode);
    cfg.validate();
    if (cfg.command == "plot") {
      cfg.dataset.clear();
      for (const auto& in : plot_inputs) cfg.dataset += (cfg.dataset.empty() ? "" : ",") + in;
    }

    if (*f) cmd_fetch(fetch, out);
    else if (*ing) cmd_ingest(cfg, allow_rejects, out);
    else if (*spl) cmd_split(cfg, out);
    else if (*ev) cmd_eval(cfg, predictions, split_path, out);
    else if (*st) cmd_stats(cfg, weighting, out);
    else if (*pl) cmd_plot(cfg, plot_inputs, labels, out);
    return kExitOk;
  } catch (const Error& e) {
    return fail(err, e.code(), kind_name(e.kind()), exit_for(e.kind()), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(err, "IoError", "io", kExitIo, e.what());
  } catch (const std::exception& e) {
    return fail(err, "InternalError", "internal", kExitInternal, e.what());
  }
}

}  // namespace atombench::cli
