#pragma once

// File formats: CSV edge lists, node statistics, comparison rows, bias pairs,
// solver configs (JSON or TOML) and convergence traces.
//
// Numbers are written in the shortest form that round-trips, so outputs are
// byte-stable across runs and platforms with the same libstdc++.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "nullnet/bias.hpp"
#include "nullnet/dataset.hpp"
#include "nullnet/errors.hpp"
#include "nullnet/graph.hpp"
#include "nullnet/netstats.hpp"
#include "nullnet/selection.hpp"
#include "nullnet/solver.hpp"

namespace nullnet {

// ---------------------------------------------------------------- reading

namespace io_detail {

struct CsvRecord {
  std::size_t line;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 records: quoted fields may contain commas, doubled quotes and
/// newlines. Blank lines are skipped; CRLF is accepted.
inline std::vector<CsvRecord> parse_csv(std::string_view text, std::string_view source = "input") {
  std::vector<CsvRecord> out;
  std::size_t line = 1, pos = 0;
  const std::size_t n = text.size();
  while (pos < n) {
    CsvRecord rec{line, {}};
    std::string field;
    bool quoted = false, was_quoted = false, end = false;
    while (!end) {
      if (pos >= n) {
        if (quoted) throw InputError(std::string(source) + ":" + std::to_string(rec.line) + ": unterminated quote");
        end = true;
        break;
      }
      const char c = text[pos++];
      if (quoted) {
        if (c == '"') {
          if (pos < n && text[pos] == '"') {
            field += '"';
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || was_quoted)
            throw InputError(std::string(source) + ":" + std::to_string(line) + ": stray quote inside a field");
          quoted = was_quoted = true;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          was_quoted = false;
          break;
        case '\r':
          if (pos < n && text[pos] == '\n') break;
          field += c;
          break;
        case '\n':
          ++line;
          end = true;
          break;
        default:
          if (was_quoted)
            throw InputError(std::string(source) + ":" + std::to_string(line) + ": text after a closing quote");
          field += c;
      }
    }
    rec.fields.push_back(std::move(field));
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty() && !was_quoted;
    if (!blank) out.push_back(std::move(rec));
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
  return text;
}

}  // namespace io_detail

/// Node labels, one per line (first CSV column). A header line `node` is skipped.
inline std::vector<std::string> parse_node_list(const std::filesystem::path& path) {
  const auto records = io_detail::parse_csv(io_detail::read_file(path), path.string());
  std::vector<std::string> nodes;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto label = std::string(io_detail::trim(records[r].fields[0]));
    if (r == 0 && label == "node") continue;
    if (label.empty()) throw InputError(path.string() + ":" + std::to_string(records[r].line) + ": empty node label");
    if (!seen.insert(label).second)
      throw InputError(path.string() + ":" + std::to_string(records[r].line) + ": duplicate node '" + label + "'");
    nodes.push_back(label);
  }
  return nodes;
}

/// Parses `year,layer,source,target,value` text. Duplicate rows are summed.
/// Without `node_order` the node set is every label seen, sorted.
inline MultiplexDataset parse_edge_list_text(std::string_view text, std::string_view source = "input",
                                             const std::optional<std::vector<std::string>>& node_order = std::nullopt) {
  const auto records = io_detail::parse_csv(text, source);
  auto where = [&](std::size_t line) { return std::string(source) + ":" + std::to_string(line) + ": "; };
  if (records.empty()) throw InputError(std::string(source) + ": missing header");
  const std::vector<std::string> expected = {"year", "layer", "source", "target", "value"};
  std::vector<std::string> header;
  for (const auto& f : records[0].fields) header.emplace_back(io_detail::trim(f));
  if (header != expected) throw InputError(where(records[0].line) + "header must be year,layer,source,target,value");

  struct Row {
    Year year;
    std::string layer, source, target;
    double value;
  };
  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 5)
      throw InputError(where(rec.line) + "expected 5 fields, found " + std::to_string(rec.fields.size()));
    const auto year = io_detail::parse_number<Year>(rec.fields[0]);
    if (!year) throw InputError(where(rec.line) + "bad year '" + rec.fields[0] + "'");
    const auto value = io_detail::parse_number<double>(rec.fields[4]);
    if (!value || !std::isfinite(*value)) throw InputError(where(rec.line) + "bad value '" + rec.fields[4] + "'");
    if (*value < 0.0) throw InputError(where(rec.line) + "negative value " + rec.fields[4]);
    Row row{*year, std::string(io_detail::trim(rec.fields[1])), std::string(io_detail::trim(rec.fields[2])),
            std::string(io_detail::trim(rec.fields[3])), *value};
    if (row.layer.empty() || row.source.empty() || row.target.empty())
      throw InputError(where(rec.line) + "empty layer or node label");
    if (row.source == row.target) throw InputError(where(rec.line) + "self-flow for node '" + row.source + "'");
    rows.push_back(std::move(row));
  }

  std::vector<std::string> nodes;
  if (node_order) {
    nodes = *node_order;
  } else {
    std::set<std::string> labels;
    for (const auto& row : rows) {
      labels.insert(row.source);
      labels.insert(row.target);
    }
    nodes.assign(labels.begin(), labels.end());
  }
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!index.emplace(nodes[i], i).second) throw InputError("duplicate node '" + nodes[i] + "' in node list");

  std::map<MultiplexDataset::CellKey, std::map<std::pair<std::size_t, std::size_t>, double>> merged;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto lookup = [&](const std::string& label) {
      auto it = index.find(label);
      if (it == index.end()) throw InputError(where(records[r + 1].line) + "node '" + label + "' is not in the node list");
      return it->second;
    };
    merged[{row.year, row.layer}][{lookup(row.source), lookup(row.target)}] += row.value;
  }
  std::map<MultiplexDataset::CellKey, std::vector<Flow>> cells;
  for (auto& [key, flows] : merged) {
    auto& list = cells[key];
    for (auto& [pair, value] : flows) list.push_back({pair.first, pair.second, value});
  }
  return MultiplexDataset(std::move(nodes), std::move(cells));
}

inline MultiplexDataset parse_edge_list(const std::filesystem::path& path,
                                        const std::optional<std::filesystem::path>& node_file = std::nullopt) {
  std::optional<std::vector<std::string>> order;
  if (node_file) order = parse_node_list(*node_file);
  return parse_edge_list_text(io_detail::read_file(path), path.string(), order);
}

// ---------------------------------------------------------------- writing

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// `# key=value` comment lines heading every CSV output.
inline void write_metadata(std::ostream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
}

/// Conventions shared by all statistic outputs.
inline Metadata statistics_conventions() {
  return {{"undefined", "knn/snn need k>=1, c/cw need k>=2 (expected: positive denominators); undefined cells are empty and excluded from summaries"},
          {"std", "population (divide by count)"},
          {"expected_stats", "ratios of expectations"}};
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& graph, Year year, std::string_view layer) {
  out << "year,layer,source,target,value\n";
  const auto& nodes = graph.nodes();
  for (std::size_t i = 0; i < graph.size(); ++i)
    for (std::size_t j = 0; j < graph.size(); ++j)
      if (graph.weight(i, j) > 0)
        out << year << ',' << csv_field(layer) << ',' << csv_field(nodes[i]) << ',' << csv_field(nodes[j]) << ','
            << graph.weight(i, j) << '\n';
}

inline void write_node_stats(std::ostream& out, const NodeStatistics& st, const Metadata& meta = {}) {
  write_metadata(out, meta);
  out << "node,k,s,knn,c,snn,cw,model,knn_defined,c_defined,snn_defined,cw_defined\n";
  const std::string model = st.model ? std::string(to_string(*st.model)) : "observed";
  for (std::size_t i = 0; i < st.size(); ++i) {
    out << csv_field(st.nodes[i]) << ',' << format_number(st.degree[i]) << ',' << format_number(st.strength[i]);
    for (auto s : kAllStatistics) out << ',' << format_number(st.get(s)[i]);
    out << ',' << model;
    for (auto s : kAllStatistics) out << ',' << (st.get(s)[i] ? 1 : 0);
    out << '\n';
  }
}

inline void write_trace(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "iteration,max_degree_residual,max_strength_residual,log_likelihood\n";
  for (const auto& t : trace)
    out << t.iteration << ',' << format_number(t.max_degree_residual) << ',' << format_number(t.max_strength_residual)
        << ',' << format_number(t.log_likelihood) << '\n';
}

inline std::string comparison_csv_header() {
  return "year,layer,nodes,loglik_ecm,loglik_wcm,k_ecm,k_wcm,aicc_ecm,aicc_wcm,bic_ecm,bic_wcm,"
         "w_aicc_ecm,w_aicc_wcm,w_bic_ecm,w_bic_wcm";
}

inline std::string comparison_csv_row(Year year, std::string_view layer, const ModelComparison& c) {
  std::ostringstream o;
  o << year << ',' << csv_field(layer) << ',' << c.nodes << ',' << format_number(c.ecm.log_likelihood) << ','
    << format_number(c.wcm.log_likelihood) << ',' << c.ecm.parameters << ',' << c.wcm.parameters << ','
    << format_number(c.ecm.aic_c) << ',' << format_number(c.wcm.aic_c) << ',' << format_number(c.ecm.bic) << ','
    << format_number(c.wcm.bic) << ',' << format_number(c.aic_c_weights.ecm) << ','
    << format_number(c.aic_c_weights.wcm) << ',' << format_number(c.bic_weights.ecm) << ','
    << format_number(c.bic_weights.wcm);
  return o.str();
}

inline void write_bias_pairs(std::ostream& out, const BiasReport& report) {
  out << "node_i,node_j,bias,class\n";
  for (const auto& p : report.pairs)
    out << csv_field(report.nodes[p.i]) << ',' << csv_field(report.nodes[p.j]) << ',' << format_number(p.bias) << ','
        << to_string(p.cls) << '\n';
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(io_detail::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
}

inline ModelParams load_params(const std::filesystem::path& path) {
  try {
    return read_json(path).get<ModelParams>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------- configs

namespace io_detail {

inline void apply_fit_field(FitConfig& cfg, const std::string& key, const nlohmann::json& v) {
  if (key == "max_iterations") cfg.max_iterations = v.get<int>();
  else if (key == "degree_tolerance") cfg.degree_tolerance = v.get<double>();
  else if (key == "strength_tolerance") cfg.strength_tolerance = v.get<double>();
  else if (key == "damping") cfg.damping = v.get<double>();
  else if (key == "deterministic_init") cfg.deterministic_init = v.get<bool>();
  else throw InputError("unknown fit config field '" + key + "'");
}

inline nlohmann::json toml_to_json(const toml::node& node) {
  if (auto t = node.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (auto a = node.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (auto v = node.as_integer()) return v->get();
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_boolean()) return v->get();
  if (auto v = node.as_string()) return v->get();
  throw InputError("unsupported TOML value type");
}

}  // namespace io_detail

/// Reads fit settings from the top level or a `[fit]` / "fit" section. Other
/// sections are left for the caller.
inline FitConfig fit_config_from_json(const nlohmann::json& doc) {
  FitConfig cfg;
  const nlohmann::json& section = doc.contains("fit") ? doc.at("fit") : doc;
  if (!section.is_object()) throw InputError("fit config must be an object");
  try {
    for (const auto& [k, v] : section.items()) {
      if (&section == &doc && v.is_object()) continue;
      if (&section == &doc && (k == "samples" || k == "seed" || k == "alpha")) continue;
      io_detail::apply_fit_field(cfg, k, v);
    }
  } catch (const nlohmann::json::type_error& e) {
    throw InputError(std::string("fit config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

/// Loads a JSON or TOML document (by extension; .toml is TOML) as JSON.
inline nlohmann::json load_config_document(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".toml") {
    try {
      const auto table = toml::parse(io_detail::read_file(path), path.string());
      return io_detail::toml_to_json(table);
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << path.string() << ":" << e.source().begin.line << ": " << e.description();
      throw InputError(msg.str());
    }
  }
  return read_json(path);
}

inline FitConfig load_fit_config(const std::filesystem::path& path) {
  return fit_config_from_json(load_config_document(path));
}

}  // namespace nullnet
