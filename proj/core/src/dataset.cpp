#include "atombench/dataset.hpp"

#include <initializer_list>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "atombench/atomic_file.hpp"
#include "atombench/error.hpp"

namespace atombench {
namespace {

using json = nlohmann::json;

// Thrown while mapping one record; turned into a Reject by the caller.
struct RecordProblem {
  std::string kind;
  std::string reason;
};

[[noreturn]] void schema_problem(const std::string& reason) { throw RecordProblem{"schema", reason}; }
[[noreturn]] void invalid(const std::string& reason) { throw RecordProblem{"validation", reason}; }

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) schema_problem(fmt::format("expected an object holding '{}'", key));
  auto it = obj.find(key);
  if (it == obj.end()) schema_problem(fmt::format("missing field '{}'", key));
  return *it;
}

// First key present in obj (or nullptr).
const json* first_of(const json& obj, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) return nullptr;
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it != obj.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

double number(const json& v, const char* what) {
  if (!v.is_number()) schema_problem(fmt::format("field '{}' is not a number", what));
  return v.get<double>();
}

std::string string_field(const json& v, const char* what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  schema_problem(fmt::format("field '{}' is not a string", what));
}

Vec3 vec3(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 3)
    schema_problem(fmt::format("field '{}' is not a 3-vector", what));
  return {number(v[0], what), number(v[1], what), number(v[2], what)};
}

std::vector<Vec3> vec3_list(const json& v, const char* what) {
  if (!v.is_array()) schema_problem(fmt::format("field '{}' is not an array", what));
  std::vector<Vec3> out;
  for (const auto& e : v) out.push_back(vec3(e, what));
  return out;
}

Mat3 mat3(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 3)
    schema_problem(fmt::format("field '{}' is not a 3x3 matrix", what));
  return {vec3(v[0], what), vec3(v[1], what), vec3(v[2], what)};
}

std::vector<std::string> string_list(const json& v, const char* what) {
  if (!v.is_array()) schema_problem(fmt::format("field '{}' is not an array", what));
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) schema_problem(fmt::format("field '{}' holds a non-string", what));
    out.push_back(e.get<std::string>());
  }
  return out;
}

// Shared semantic checks; constructs the Crystal and the record.
DatasetRecord finish(std::string id, const std::optional<std::string>& formula, double tc,
                     std::vector<std::string> species, std::vector<Vec3> frac,
                     const LatticeMatrix& lattice, std::string_view source) {
  if (id.empty()) invalid("empty id");
  if (!(tc >= 0)) invalid(fmt::format("negative Tc {}", tc));
  try {
    Crystal c(std::move(species), std::move(frac), lattice, std::string(source));
    std::string reduced = reduced_formula(c.species());
    if (formula) {
      std::map<std::string, long> declared;
      try {
        declared = parse_formula(*formula);
      } catch (const ParseError& e) {
        invalid(e.what());
      }
      if (!same_composition(declared, element_counts(c.species())))
        invalid(fmt::format("formula '{}' disagrees with sites ({})", *formula, reduced));
    }
    return DatasetRecord{std::move(id), std::move(reduced), tc, std::move(c)};
  } catch (const InvalidCrystal& e) {
    invalid(e.what());
  } catch (const DegenerateCell& e) {
    invalid(e.what());
  }
}

std::optional<std::string> optional_formula(const json& obj) {
  if (const json* f = first_of(obj, {"formula"})) return string_field(*f, "formula");
  return std::nullopt;
}

LatticeMatrix lattice_of(const Mat3& m) {
  try {
    return LatticeMatrix(m);
  } catch (const DegenerateCell& e) {
    invalid(e.what());
  }
}

DatasetRecord from_generic(const json& r, std::string_view source) {
  const std::string id = string_field(field(r, "id"), "id");
  const std::string formula = string_field(field(r, "formula"), "formula");
  const double tc = number(field(r, "tc_k"), "tc_k");
  const Vec3 abc = vec3(field(r, "lattice_abc"), "lattice_abc");
  const Vec3 ang = vec3(field(r, "lattice_angles"), "lattice_angles");
  auto species = string_list(field(r, "species"), "species");
  auto frac = vec3_list(field(r, "frac_coords"), "frac_coords");
  LatticeMatrix lattice = [&] {
    try {
      return params_to_matrix({abc[0], abc[1], abc[2], ang[0], ang[1], ang[2]});
    } catch (const DegenerateCell& e) {
      invalid(e.what());
    }
  }();
  return finish(id, formula, tc, std::move(species), std::move(frac), lattice, source);
}

DatasetRecord from_jarvis(const json& r, std::string_view source) {
  const json* idv = first_of(r, {"jid", "id"});
  if (!idv) schema_problem("missing field 'jid'");
  const std::string id = string_field(*idv, "jid");
  const json* tcv = first_of(r, {"Tc", "tc", "Tc_K", "tc_k"});
  if (!tcv) schema_problem("missing field 'Tc'");
  const double tc = number(*tcv, "Tc");
  const json& atoms = field(r, "atoms");
  const LatticeMatrix lattice = lattice_of(mat3(field(atoms, "lattice_mat"), "lattice_mat"));
  auto coords = vec3_list(field(atoms, "coords"), "coords");
  auto elements = string_list(field(atoms, "elements"), "elements");
  bool cartesian = false;
  if (const json* cv = first_of(atoms, {"cartesian"})) {
    if (!cv->is_boolean()) schema_problem("field 'cartesian' is not a boolean");
    cartesian = cv->get<bool>();
  }
  if (cartesian) {
    const Mat3 inv = inverse(lattice.rows());
    for (auto& x : coords) x = vecmat(x, inv);
  }
  return finish(id, optional_formula(r), tc, std::move(elements), std::move(coords), lattice,
                source);
}

DatasetRecord from_alexandria(const json& entry, std::size_t index, std::string_view source) {
  const json* data = first_of(entry, {"data"});
  const json& structure = entry.contains("structure") ? entry["structure"] : entry;

  std::string id;
  const json* idv = data ? first_of(*data, {"mat_id", "id", "entry_id"}) : nullptr;
  if (!idv) idv = first_of(entry, {"mat_id", "entry_id", "id"});
  id = idv ? string_field(*idv, "mat_id") : fmt::format("{}#{}", source, index);

  const std::initializer_list<const char*> tc_keys = {"Tc", "tc", "Tc_AD", "tc_ad", "tc_k"};
  const json* tcv = data ? first_of(*data, tc_keys) : nullptr;
  if (!tcv) tcv = first_of(entry, tc_keys);
  if (!tcv) schema_problem("missing field 'data.Tc'");
  const double tc = number(*tcv, "Tc");

  const json& lat = field(structure, "lattice");
  const LatticeMatrix lattice = lattice_of(mat3(field(lat, "matrix"), "lattice.matrix"));
  const json& sites = field(structure, "sites");
  if (!sites.is_array()) schema_problem("field 'sites' is not an array");
  std::vector<std::string> species;
  std::vector<Vec3> frac;
  for (const auto& site : sites) {
    const json& sp = field(site, "species");
    if (!sp.is_array() || sp.empty()) schema_problem("site has no species");
    if (sp.size() != 1) invalid("disordered site (more than one species)");
    const json* occ = first_of(sp[0], {"occu"});
    if (occ && std::abs(number(*occ, "occu") - 1.0) > 1e-6) invalid("partially occupied site");
    species.push_back(string_field(field(sp[0], "element"), "element"));
    frac.push_back(vec3(field(site, "abc"), "abc"));
  }
  std::optional<std::string> formula;
  if (data) formula = optional_formula(*data);
  return finish(id, formula, tc, std::move(species), std::move(frac), lattice, source);
}

const json& entries_of(const json& doc, DatasetSchema schema) {
  if (doc.is_array()) return doc;
  const char* key = schema == DatasetSchema::alexandria ? "entries"
                    : schema == DatasetSchema::generic  ? "records"
                                                        : nullptr;
  if (key && doc.is_object()) {
    auto it = doc.find(key);
    if (it != doc.end() && it->is_array()) return *it;
  }
  throw SchemaError(fmt::format("{} dataset must be a JSON array{}", schema_name(schema),
                                key ? fmt::format(" or an object with a '{}' array", key) : ""));
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

DatasetSchema parse_schema_name(std::string_view name) {
  if (name == "jarvis") return DatasetSchema::jarvis;
  if (name == "alexandria") return DatasetSchema::alexandria;
  if (name == "generic") return DatasetSchema::generic;
  throw InvalidArgument(fmt::format("unknown dataset schema '{}'", name));
}

const char* schema_name(DatasetSchema s) {
  switch (s) {
    case DatasetSchema::jarvis: return "jarvis";
    case DatasetSchema::alexandria: return "alexandria";
    case DatasetSchema::generic: return "generic";
  }
  return "";
}

bool LoadResult::has_schema_errors() const {
  for (const auto& r : rejects)
    if (r.kind == "schema") return true;
  return false;
}

LoadResult parse_dataset(std::string_view json_text, DatasetSchema schema,
                         std::string_view source) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(fmt::format("{}: invalid JSON: {}", source, e.what()));
  }
  const json& entries = entries_of(doc, schema);

  LoadResult out;
  out.raw_count = entries.size();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    try {
      DatasetRecord rec = [&] {
        switch (schema) {
          case DatasetSchema::jarvis: return from_jarvis(e, source);
          case DatasetSchema::alexandria: return from_alexandria(e, i, source);
          case DatasetSchema::generic: break;
        }
        return from_generic(e, source);
      }();
      if (!seen.insert(rec.id).second) invalid(fmt::format("duplicate id '{}'", rec.id));
      out.records.push_back(std::move(rec));
    } catch (const RecordProblem& p) {
      std::string id;
      if (const json* idv = first_of(e, {"id", "jid", "mat_id"}); idv && idv->is_string())
        id = idv->get<std::string>();
      out.rejects.push_back({i, std::move(id), p.kind, p.reason});
    } catch (const json::exception& ex) {
      out.rejects.push_back({i, {}, "schema", ex.what()});
    }
  }
  return out;
}

LoadResult load_dataset(const std::filesystem::path& path, DatasetSchema schema) {
  return parse_dataset(read_file(path), schema, path.filename().string());
}

std::string records_to_json(const std::vector<DatasetRecord>& records,
                            std::string_view config_json) {
  json arr = json::array();
  for (const auto& r : records) {
    const LatticeParams p = r.structure.params();
    json coords = json::array();
    for (const auto& f : r.structure.frac_coords()) coords.push_back(vec_json(f));
    arr.push_back(json{{"id", r.id},
                       {"formula", r.formula},
                       {"tc_k", r.tc},
                       {"lattice_abc", json::array({p.a, p.b, p.c})},
                       {"lattice_angles", json::array({p.alpha, p.beta, p.gamma})},
                       {"species", r.structure.species()},
                       {"frac_coords", std::move(coords)}});
  }
  json doc{{"schema_version", kDatasetSchemaVersion},
           {"config", config_json.empty() ? json::object() : json::parse(config_json)},
           {"records", std::move(arr)}};
  return doc.dump(1) + "\n";
}

std::string rejects_to_json(const std::vector<Reject>& rejects, std::string_view config_json) {
  json arr = json::array();
  for (const auto& r : rejects)
    arr.push_back(
        json{{"index", r.index}, {"id", r.id}, {"kind", r.kind}, {"reason", r.reason}});
  json doc{{"config", config_json.empty() ? json::object() : json::parse(config_json)},
           {"rejects", std::move(arr)}};
  return doc.dump(1) + "\n";
}

}  // namespace atombench
