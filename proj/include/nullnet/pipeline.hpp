#pragma once

// Panel workflow over (year, layer selection) cells: aggregate, fit, compute
// statistics, optionally sample, compare models and classify pair bias.
//
// Every cell is independent. Its random seed depends only on the run seed,
// the year and the selection label, so a cell gives the same output whether
// it runs alone, in a larger panel, or on any number of workers.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nullnet/bias.hpp"
#include "nullnet/dataset.hpp"
#include "nullnet/errors.hpp"
#include "nullnet/graph.hpp"
#include "nullnet/io.hpp"
#include "nullnet/models.hpp"
#include "nullnet/netstats.hpp"
#include "nullnet/sampler.hpp"
#include "nullnet/selection.hpp"
#include "nullnet/solver.hpp"

namespace nullnet {

/// A named group of layers summed into one graph. Empty `codes` means every
/// layer of the year.
struct LayerSelection {
  std::string label;
  std::vector<std::string> codes;

  friend bool operator==(const LayerSelection&, const LayerSelection&) = default;
};

/// Layers of the multi-resolution comparison: four single commodities, the
/// fourteen most relevant ones together, and the full aggregate.
inline std::vector<std::string> multires_layer_preset() { return {"93", "9", "39", "90", "84", "top14", "all"}; }

/// Comma-separated selection terms:
///   all      every layer summed
///   each     one selection per dataset layer
///   top14    the fourteen most relevant commodities summed
///   multires the preset above
///   a+b+c    the listed codes summed
///   code     one layer
inline std::vector<LayerSelection> parse_layer_selection(std::string_view text, const MultiplexDataset& data) {
  std::vector<LayerSelection> out;
  auto add = [&](LayerSelection sel) {
    for (const auto& existing : out)
      if (existing.label == sel.label) return;
    out.push_back(std::move(sel));
  };
  std::vector<std::string> terms;
  {
    std::string term;
    std::istringstream in{std::string(text)};
    while (std::getline(in, term, ',')) {
      const auto t = std::string(io_detail::trim(term));
      if (t.empty()) throw InputError("empty term in layer selection '" + std::string(text) + "'");
      if (t == "multires")
        for (const auto& p : multires_layer_preset()) terms.push_back(p);
      else
        terms.push_back(t);
    }
  }
  if (terms.empty()) throw InputError("empty layer selection");
  for (const auto& t : terms) {
    if (t == "all") {
      add({"all", {}});
    } else if (t == "each") {
      for (const auto& l : data.layers()) add({l, {l}});
    } else if (t == "top14") {
      LayerSelection sel{"top14", {}};
      for (const auto& code : top14_layers()) sel.codes.push_back(data.resolve_layer(code));
      add(std::move(sel));
    } else if (t.find('+') != std::string::npos) {
      LayerSelection sel;
      std::string part;
      std::istringstream in(t);
      while (std::getline(in, part, '+')) {
        if (part.empty()) throw InputError("empty code in layer group '" + t + "'");
        sel.codes.push_back(data.resolve_layer(part));
      }
      for (const auto& c : sel.codes) sel.label += (sel.label.empty() ? "" : "+") + c;
      add(std::move(sel));
    } else {
      const auto canonical = data.resolve_layer(t);
      add({canonical, {canonical}});
    }
  }
  return out;
}

/// `all`, a range `a..b`, or a comma-separated list.
inline std::vector<Year> parse_years(std::string_view text, const MultiplexDataset& data) {
  const auto s = io_detail::trim(text);
  if (s.empty() || s == "all") return data.years();
  std::vector<Year> out;
  if (const auto dots = s.find(".."); dots != std::string_view::npos) {
    const auto lo = io_detail::parse_number<Year>(s.substr(0, dots));
    const auto hi = io_detail::parse_number<Year>(s.substr(dots + 2));
    if (!lo || !hi || *lo > *hi) throw InputError("bad year range '" + std::string(s) + "'");
    for (Year y = *lo; y <= *hi; ++y) out.push_back(y);
  } else {
    std::string part;
    std::istringstream in{std::string(s)};
    while (std::getline(in, part, ',')) {
      const auto y = io_detail::parse_number<Year>(part);
      if (!y) throw InputError("bad year '" + part + "'");
      out.push_back(*y);
    }
  }
  for (auto y : out)
    if (!data.has_year(y)) throw LookupError("year " + std::to_string(y) + " is not in the dataset");
  return out;
}

inline std::vector<ModelKind> parse_models(std::string_view s) {
  if (s == "both") return {ModelKind::ecm, ModelKind::wcm};
  return {parse_model_kind(s)};
}

inline WeightedGraph cell_graph(const MultiplexDataset& data, Year year, const LayerSelection& sel) {
  return symmetrize_and_round(aggregate_layers(data, year, sel.codes), data.nodes());
}

// ------------------------------------------------------------ ensemble metrics

/// Percentile intervals of the four summary metrics of each statistic over
/// graphs sampled from `params`. Each sample is treated like observed data: its
/// metrics use its own degrees/strengths, and (iv) correlates it with `expected`.
/// Weighted quantities are multiplied by `weight_scale`.
inline std::array<std::array<std::optional<Interval>, 4>, 4> ensemble_metric_intervals(
    const ModelParams& params, const NodeStatistics& expected, const SampleConfig& config, double weight_scale = 1.0) {
  config.validate();
  if (config.samples < 100) throw InputError("percentile intervals need at least 100 samples");
  // draws[m][statistic][metric]
  std::vector<std::array<std::array<std::optional<double>, 4>, 4>> draws(config.samples);
  parallel_for_samples(config.samples, config.threads, [&](std::size_t m) {
    auto st = observed_stats(sample_graph(params, config.seed, m));
    if (weight_scale != 1.0) st = st.scaled_weights(weight_scale);
    for (std::size_t s = 0; s < 4; ++s) {
      const auto kind = kAllStatistics[s];
      const auto summary = panel_summary(st.get(kind), st.constraint_for(kind), expected.get(kind));
      draws[m][s] = {summary.mean, summary.std_dev, summary.corr_constraint, summary.corr_expected};
    }
  });
  std::array<std::array<std::optional<Interval>, 4>, 4> out{};
  std::vector<std::optional<double>> column(config.samples);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t m = 0; m < config.samples; ++m) column[m] = draws[m][s][k];
      out[s][k] = percentile_interval(column, config.alpha);
    }
  return out;
}

// ------------------------------------------------------------ panel run

struct RunManifest {
  std::filesystem::path data;
  std::optional<std::filesystem::path> node_file;
  std::vector<Year> years;
  std::vector<LayerSelection> layers;
  std::vector<ModelKind> models{ModelKind::ecm, ModelKind::wcm};
  FitConfig fit;
  SampleConfig sampling{0, 0, 0.05, 1};  // samples = 0: no ensemble intervals
  bool normalize = false;
  unsigned jobs = 1;
  std::filesystem::path out;

  void validate() const {
    if (years.empty()) throw InputError("no years selected");
    if (layers.empty()) throw InputError("no layers selected");
    if (models.empty()) throw InputError("no models selected");
    fit.validate();
    if (sampling.samples > 0) {
      sampling.validate();
      if (sampling.samples < 100) throw InputError("--samples must be 0 or at least 100");
    }
    if (out.empty()) throw InputError("output directory required");
  }
};

/// Manifest echo written next to the results. Worker count and output path
/// are left out because they do not affect any result.
inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) layers.push_back({{"label", l.label}, {"codes", l.codes}});
  nlohmann::json models = nlohmann::json::array();
  for (auto k : m.models) models.push_back(to_string(k));
  return {{"data", m.data.filename().string()},
          {"years", m.years},
          {"layers", layers},
          {"models", models},
          {"fit",
           {{"max_iterations", m.fit.max_iterations},
            {"degree_tolerance", m.fit.degree_tolerance},
            {"strength_tolerance", m.fit.strength_tolerance},
            {"damping", m.fit.damping},
            {"deterministic_init", m.fit.deterministic_init}}},
          {"samples", m.sampling.samples},
          {"seed", m.sampling.seed},
          {"alpha", m.sampling.alpha},
          {"normalize", m.normalize}};
}

inline Metadata run_metadata(const RunManifest& m) {
  Metadata meta{{"normalize", m.normalize ? "on (s, snn, cw divided by the total weight)" : "off"}};
  for (auto& kv : statistics_conventions()) meta.push_back(kv);
  if (m.sampling.samples > 0)
    meta.push_back({"ci", "percentile Monte Carlo, samples=" + std::to_string(m.sampling.samples) +
                              " alpha=" + format_number(m.sampling.alpha) + " seed=" + std::to_string(m.sampling.seed)});
  else
    meta.push_back({"ci", "none"});
  meta.push_back({"bic_n", "dyads N(N-1)/2"});
  return meta;
}

enum class CellStatus { ok, fit_failed, nesting_violation, input_error };

inline std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::ok: return "ok";
    case CellStatus::fit_failed: return "fit_failed";
    case CellStatus::nesting_violation: return "nesting_violation";
    case CellStatus::input_error: return "input_error";
  }
  return "?";
}

struct PanelRow {
  StatisticKind statistic;
  std::string series;  // observed | ecm | wcm
  PanelSummary summary;
};

struct CellResult {
  Year year = 0;
  LayerSelection layer;
  CellStatus status = CellStatus::ok;
  std::string message;
  std::vector<PanelRow> panel;
  std::optional<ModelComparison> comparison;
  std::string comparison_note;
};

struct PanelResult {
  std::vector<CellResult> cells;
  bool any_failed() const {
    for (const auto& c : cells)
      if (c.status != CellStatus::ok) return true;
    return false;
  }
  bool any_input_error() const {
    for (const auto& c : cells)
      if (c.status == CellStatus::input_error) return true;
    return false;
  }
};

namespace pipeline_detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t cell_seed(std::uint64_t seed, Year year, std::string_view label, ModelKind kind) {
  SplitMix64 mix(seed ^ fnv1a(label));
  mix();
  SplitMix64 second(mix() ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(year)));
  return second() ^ (kind == ModelKind::ecm ? 0x45434dULL : 0x57434dULL);
}

inline std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                      c == '-' || c == '+' || c == '_';
    out += keep ? c : '_';
  }
  return out;
}

inline std::string to_csv(const NodeStatistics& st, const Metadata& meta) {
  std::ostringstream o;
  write_node_stats(o, st, meta);
  return o.str();
}

}  // namespace pipeline_detail

inline std::filesystem::path cell_directory(const RunManifest& m, Year year, const LayerSelection& sel) {
  return m.out / "cells" / (std::to_string(year) + "_" + pipeline_detail::safe_name(sel.label));
}

/// Runs one cell and writes its files under `cell_directory`.
inline CellResult run_cell(const RunManifest& m, const MultiplexDataset& data, Year year, const LayerSelection& sel,
                           unsigned sample_threads = 1) {
  CellResult res;
  res.year = year;
  res.layer = sel;
  const auto dir = cell_directory(m, year, sel);
  const auto meta = run_metadata(m);
  try {
    const WeightedGraph graph = cell_graph(data, year, sel);
    double scale = 1.0;
    if (m.normalize) scale = 1.0 / static_cast<double>(normalize_total_weight(graph).total_weight);
    auto observed = observed_stats(graph);
    if (m.normalize) observed = observed.scaled_weights(scale);
    write_text(dir / "observed_stats.csv", pipeline_detail::to_csv(observed, meta));

    for (auto s : kAllStatistics) {
      const std::vector<MaybeValue> none(observed.size());
      res.panel.push_back({s, "observed", panel_summary(observed.get(s), observed.constraint_for(s), none)});
    }

    std::optional<double> ll_ecm, ll_wcm;
    for (auto kind : m.models) {
      const std::string name(to_string(kind));
      ModelParams params;
      try {
        params = fit(graph, kind, m.fit);
      } catch (const FitError& e) {
        write_json(dir / ("params_" + name + ".json"), e.best());
        res.status = CellStatus::fit_failed;
        res.message += name + ": " + e.what() + "; ";
        continue;
      }
      write_json(dir / ("params_" + name + ".json"), params);
      (kind == ModelKind::ecm ? ll_ecm : ll_wcm) = params.diagnostics.log_likelihood;

      auto expected = expected_stats(params);
      if (m.normalize) expected = expected.scaled_weights(scale);
      write_text(dir / ("expected_" + name + ".csv"), pipeline_detail::to_csv(expected, meta));

      std::array<std::array<std::optional<Interval>, 4>, 4> cis{};
      if (m.sampling.samples > 0) {
        SampleConfig sc = m.sampling;
        sc.seed = pipeline_detail::cell_seed(m.sampling.seed, year, sel.label, kind);
        sc.threads = sample_threads;
        cis = ensemble_metric_intervals(params, expected, sc, scale);
      }
      for (std::size_t s = 0; s < 4; ++s) {
        const auto statistic = kAllStatistics[s];
        PanelRow row{statistic, name,
                     panel_summary(expected.get(statistic), observed.constraint_for(statistic),
                                   observed.get(statistic))};
        row.summary.mean_ci = cis[s][0];
        row.summary.std_dev_ci = cis[s][1];
        row.summary.corr_constraint_ci = cis[s][2];
        row.summary.corr_expected_ci = cis[s][3];
        res.panel.push_back(std::move(row));
      }

      if (kind == ModelKind::ecm) {
        const auto report = bias_report(params);
        std::ostringstream pairs;
        write_bias_pairs(pairs, report);
        write_text(dir / "bias_pairs.csv", pairs.str());
        write_json(dir / "bias_summary.json", report);
      }
    }

    if (ll_ecm && ll_wcm) {
      try {
        res.comparison = compare_models(*ll_ecm, *ll_wcm, graph.size());
        write_json(dir / "comparison.json", *res.comparison);
      } catch (const DomainError& e) {
        const std::string what = e.what();
        if (what.find("nested") != std::string::npos) {
          res.status = CellStatus::nesting_violation;
          res.message += what + "; ";
        } else {
          res.comparison_note = what;
        }
      }
    }
  } catch (const DegenerateInputError& e) {
    res.status = CellStatus::input_error;
    res.message += e.what();
  } catch (const InputError& e) {
    res.status = CellStatus::input_error;
    res.message += e.what();
  } catch (const LookupError& e) {
    res.status = CellStatus::input_error;
    res.message += e.what();
  }
  return res;
}

inline std::string panel_csv_header() {
  return "year,layer,statistic,series,defined,mean,std,corr_constraint,corr_expected,"
         "mean_ci_low,mean_ci_high,std_ci_low,std_ci_high,corr_constraint_ci_low,corr_constraint_ci_high,"
         "corr_expected_ci_low,corr_expected_ci_high";
}

inline void write_panel_rows(std::ostream& out, const CellResult& cell) {
  auto ci = [](const std::optional<Interval>& i) {
    return i ? format_number(i->low) + "," + format_number(i->high) : std::string(",");
  };
  for (const auto& row : cell.panel) {
    const auto& s = row.summary;
    out << cell.year << ',' << csv_field(cell.layer.label) << ',' << to_string(row.statistic) << ',' << row.series
        << ',' << s.defined << ',' << format_number(s.mean) << ',' << format_number(s.std_dev) << ','
        << format_number(s.corr_constraint) << ',' << format_number(s.corr_expected) << ',' << ci(s.mean_ci) << ','
        << ci(s.std_dev_ci) << ',' << ci(s.corr_constraint_ci) << ',' << ci(s.corr_expected_ci) << '\n';
  }
}

/// Runs every (year, selection) cell on up to `jobs` workers and writes the
/// aggregated tables in cell order.
inline PanelResult run_panel(const RunManifest& m, const MultiplexDataset& data) {
  m.validate();
  for (auto y : m.years)
    if (!data.has_year(y)) throw LookupError("year " + std::to_string(y) + " is not in the dataset");
  std::vector<std::pair<Year, LayerSelection>> cells;
  for (auto y : m.years)
    for (const auto& l : m.layers) cells.emplace_back(y, l);

  PanelResult result;
  result.cells.resize(cells.size());
  const unsigned cell_workers = std::max(1u, std::min<unsigned>(m.jobs, static_cast<unsigned>(cells.size())));
  const unsigned sample_threads = std::max(1u, m.jobs / cell_workers);
  parallel_for_samples(cells.size(), cell_workers, [&](std::size_t c) {
    result.cells[c] = run_cell(m, data, cells[c].first, cells[c].second, sample_threads);
  });

  const auto meta = run_metadata(m);
  std::ostringstream panel, comparison, status;
  write_metadata(panel, meta);
  panel << panel_csv_header() << '\n';
  write_metadata(comparison, {{"bic_n", "dyads N(N-1)/2"}});
  comparison << comparison_csv_header() << '\n';
  status << "year,layer,status,message\n";
  for (const auto& cell : result.cells) {
    write_panel_rows(panel, cell);
    if (cell.comparison) comparison << comparison_csv_row(cell.year, cell.layer.label, *cell.comparison) << '\n';
    std::string message = cell.message;
    if (!cell.comparison_note.empty()) message += "comparison skipped: " + cell.comparison_note;
    status << cell.year << ',' << csv_field(cell.layer.label) << ',' << to_string(cell.status) << ','
           << csv_field(message) << '\n';
  }
  write_text(m.out / "panel_summary.csv", panel.str());
  write_text(m.out / "comparison.csv", comparison.str());
  write_text(m.out / "cells.csv", status.str());
  write_json(m.out / "manifest.json", manifest_json(m));
  return result;
}

}  // namespace nullnet
