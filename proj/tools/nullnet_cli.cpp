// nullnet: command-line front end.
//
//   nullnet ingest  --data flows.csv
//   nullnet fit     --data flows.csv --years 2002 --layers all --model both --out fits/
//   nullnet stats   --data flows.csv --years 2002 --layers all [--params fits/params_ecm.json] --out stats/
//   nullnet sample  --params fits/params_ecm.json --samples 1000 --seed 7 --out samples/
//   nullnet compare --ecm fits/params_ecm.json --wcm fits/params_wcm.json --out cmp/
//   nullnet bias    --params fits/params_ecm.json --out bias/
//   nullnet panel   --data flows.csv --years 1992..2002 --layers multires --out panel/
//
// Exit status: 0 success, 2 input error, 3 convergence failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nullnet/nullnet.hpp"

namespace fs = std::filesystem;
using namespace nullnet;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConvergence = 3;

struct DataOptions {
  std::string data;
  std::string nodes;
  std::string years = "all";
  std::string layers = "all";

  MultiplexDataset load() const {
    std::optional<fs::path> node_file;
    if (!nodes.empty()) node_file = nodes;
    return parse_edge_list(data, node_file);
  }
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.data, "Edge-list CSV (year,layer,source,target,value)")->required();
  cmd->add_option("--nodes", o.nodes, "Node list fixing the node order");
  cmd->add_option("--years", o.years, "all, a..b, or a comma list")->capture_default_str();
  cmd->add_option("--layers", o.layers, "all|each|top14|multires|<code>|<a+b>, comma separated")->capture_default_str();
}

/// The single (year, selection) cell addressed by fit/stats.
std::pair<Year, LayerSelection> single_cell(const DataOptions& o, const MultiplexDataset& data) {
  const auto years = parse_years(o.years, data);
  const auto layers = parse_layer_selection(o.layers, data);
  if (years.size() != 1 || layers.size() != 1)
    throw InputError("this command needs exactly one year and one layer selection; use 'panel' for more");
  return {years.front(), layers.front()};
}

FitConfig load_fit(const std::string& path) { return path.empty() ? FitConfig{} : load_fit_config(path); }

int cmd_ingest(const DataOptions& o, const std::string& out) {
  const auto data = o.load();
  nlohmann::json summary{{"nodes", data.node_count()}, {"years", data.years()}, {"layers", data.layers()}};
  std::size_t flows = 0;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, list] : data.cells()) {
    flows += list.size();
    double total = 0.0;
    for (const auto& f : list) total += f.value;
    cells.push_back({{"year", key.first}, {"layer", key.second}, {"flows", list.size()}, {"total_value", total}});
  }
  summary["flows"] = flows;
  summary["cells"] = cells;
  if (out.empty())
    std::cout << summary.dump(2) << '\n';
  else
    write_json(out, summary);
  return 0;
}

int cmd_fit(const DataOptions& o, const std::string& model, const std::string& config, const std::string& trace,
            const std::string& out) {
  const auto data = o.load();
  const auto [year, sel] = single_cell(o, data);
  const auto graph = cell_graph(data, year, sel);
  const auto cfg = load_fit(config);
  int status = 0;
  for (auto kind : parse_models(model)) {
    const std::string name(to_string(kind));
    std::vector<TracePoint> points;
    ModelParams params;
    try {
      params = fit(graph, kind, cfg, trace.empty() ? nullptr : &points);
    } catch (const FitError& e) {
      std::cerr << "nullnet: " << name << " fit did not converge: " << e.what() << '\n';
      params = e.best();
      status = kExitConvergence;
    }
    write_json(fs::path(out) / ("params_" + name + ".json"), params);
    if (!trace.empty()) {
      std::ostringstream t;
      write_trace(t, points);
      write_text(fs::path(trace) / ("trace_" + name + ".csv"), t.str());
    }
    std::cout << name << ": iterations=" << params.diagnostics.iterations
              << " loglik=" << format_number(params.diagnostics.log_likelihood)
              << " max_degree_residual=" << format_number(params.diagnostics.max_degree_residual)
              << " max_strength_residual=" << format_number(params.diagnostics.max_strength_residual) << '\n';
  }
  return status;
}

int cmd_stats(const DataOptions& o, const std::vector<std::string>& params_files, bool normalize,
              const std::string& out) {
  const auto data = o.load();
  const auto [year, sel] = single_cell(o, data);
  const auto graph = cell_graph(data, year, sel);
  const double scale = normalize ? 1.0 / static_cast<double>(normalize_total_weight(graph).total_weight) : 1.0;
  Metadata meta{{"year", std::to_string(year)},
                {"layer", sel.label},
                {"normalize", normalize ? "on (s, snn, cw divided by the total weight)" : "off"}};
  for (auto& kv : statistics_conventions()) meta.push_back(kv);

  auto emit = [&](const NodeStatistics& st, const std::string& file) {
    std::ostringstream s;
    write_node_stats(s, normalize ? st.scaled_weights(scale) : st, meta);
    write_text(fs::path(out) / file, s.str());
  };
  emit(observed_stats(graph), "observed_stats.csv");
  for (const auto& p : params_files) {
    const auto params = load_params(p);
    if (params.nodes != graph.nodes()) throw InputError("'" + p + "' was fitted on a different node set");
    emit(expected_stats(params), "expected_" + std::string(to_string(params.kind)) + ".csv");
  }
  return 0;
}

int cmd_sample(const std::string& params_file, const SampleConfig& cfg, bool write_graphs, const std::string& out) {
  const auto params = load_params(params_file);
  cfg.validate();
  const fs::path dir(out);
  if (write_graphs) {
    for (std::size_t m = 0; m < cfg.samples; ++m) {
      std::ostringstream s;
      write_edge_list(s, sample_graph(params, cfg.seed, m), 0, "sample");
      write_text(dir / "graphs" / ("sample_" + std::to_string(m) + ".csv"), s.str());
    }
  }
  if (cfg.samples < 100) {
    std::cerr << "nullnet: fewer than 100 samples, percentile intervals skipped\n";
    return 0;
  }
  // Per-node intervals for k, s and the four statistics.
  const std::size_t n = params.size();
  std::vector<std::vector<std::optional<double>>> draws(cfg.samples);
  parallel_for_samples(cfg.samples, cfg.threads, [&](std::size_t m) {
    const auto st = observed_stats(sample_graph(params, cfg.seed, m));
    auto& row = draws[m];
    row.reserve(6 * n);
    for (std::size_t i = 0; i < n; ++i) row.push_back(st.degree[i]);
    for (std::size_t i = 0; i < n; ++i) row.push_back(st.strength[i]);
    for (auto s : kAllStatistics)
      for (std::size_t i = 0; i < n; ++i) row.push_back(st.get(s)[i]);
  });
  std::ostringstream csv;
  write_metadata(csv, {{"model", std::string(to_string(params.kind))},
                       {"ci", "percentile Monte Carlo, samples=" + std::to_string(cfg.samples) +
                                  " alpha=" + format_number(cfg.alpha) + " seed=" + std::to_string(cfg.seed)},
                       {"undefined", "interval empty when the statistic is undefined in more than half the samples"}});
  csv << "node,k_low,k_high,s_low,s_high,knn_low,knn_high,c_low,c_high,snn_low,snn_high,cw_low,cw_high\n";
  std::vector<std::optional<double>> column(cfg.samples);
  for (std::size_t i = 0; i < n; ++i) {
    csv << csv_field(params.nodes[i]);
    for (std::size_t q = 0; q < 6; ++q) {
      for (std::size_t m = 0; m < cfg.samples; ++m) column[m] = draws[m][q * n + i];
      const auto ci = percentile_interval(column, cfg.alpha);
      csv << ',' << (ci ? format_number(ci->low) : "") << ',' << (ci ? format_number(ci->high) : "");
    }
    csv << '\n';
  }
  write_text(dir / "node_intervals.csv", csv.str());
  return 0;
}

int cmd_compare(const std::string& ecm_file, const std::string& wcm_file, const std::string& out) {
  const auto ecm = load_params(ecm_file);
  const auto wcm = load_params(wcm_file);
  if (ecm.kind != ModelKind::ecm || wcm.kind != ModelKind::wcm) throw InputError("expected one ECM and one WCM fit");
  if (ecm.nodes != wcm.nodes) throw InputError("the two fits use different node sets");
  const auto c = compare_models(ecm.diagnostics.log_likelihood, wcm.diagnostics.log_likelihood, ecm.size());
  const nlohmann::json j = c;
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(fs::path(out) / "comparison.json", j);
    write_text(fs::path(out) / "comparison.csv",
               "# bic_n=dyads N(N-1)/2\n" + comparison_csv_header() + "\n" + comparison_csv_row(0, "", c) + "\n");
  }
  return 0;
}

int cmd_bias(const std::string& params_file, double tolerance, const std::string& out) {
  const auto report = bias_report(load_params(params_file), tolerance);
  std::ostringstream pairs;
  write_bias_pairs(pairs, report);
  write_text(fs::path(out) / "bias_pairs.csv", pairs.str());
  write_json(fs::path(out) / "bias_summary.json", report);
  const nlohmann::json j = report;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_panel(const DataOptions& o, const std::string& model, const std::string& config, const SampleConfig& sampling,
              bool normalize, unsigned jobs, const std::string& out) {
  const auto data = o.load();
  RunManifest m;
  m.data = o.data;
  if (!o.nodes.empty()) m.node_file = o.nodes;
  m.years = parse_years(o.years, data);
  m.layers = parse_layer_selection(o.layers, data);
  m.models = parse_models(model);
  m.fit = load_fit(config);
  m.sampling = sampling;
  m.normalize = normalize;
  m.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
  m.out = out;
  const auto result = run_panel(m, data);
  std::size_t failed = 0;
  for (const auto& c : result.cells)
    if (c.status != CellStatus::ok) {
      ++failed;
      std::cerr << "nullnet: cell " << c.year << "/" << c.layer.label << ": " << to_string(c.status) << " "
                << c.message << '\n';
    }
  std::cout << result.cells.size() << " cells, " << failed << " failed\n";
  if (result.any_input_error()) return kExitInput;
  return result.any_failed() ? kExitConvergence : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-entropy null models (ECM and WCM) for weighted multiplex networks"};
  app.require_subcommand(1);

  DataOptions data;
  std::string model = "both", config, trace, out, params_file, ecm_file, wcm_file;
  std::vector<std::string> params_files;
  SampleConfig sampling{0, 0, 0.05, 1};
  bool normalize = false, graphs = false;
  unsigned jobs = 1;
  double tolerance = kDefaultNeutralTolerance;

  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and summarise it");
  add_data_options(ingest, data);
  ingest->add_option("--out", out, "Write the summary JSON here instead of stdout");

  auto* fitc = app.add_subcommand("fit", "Fit ECM and/or WCM to one cell");
  add_data_options(fitc, data);
  fitc->add_option("--model", model, "ecm|wcm|both")->capture_default_str();
  fitc->add_option("--config", config, "Fit config (.json or .toml)");
  fitc->add_option("--trace", trace, "Directory for convergence traces");
  fitc->add_option("--out", out, "Output directory")->required();

  auto* stats = app.add_subcommand("stats", "Observed and expected node statistics of one cell");
  add_data_options(stats, data);
  stats->add_option("--params", params_files, "Fitted parameter files");
  stats->add_flag("--normalize", normalize, "Divide s, snn and cw by the total weight");
  stats->add_option("--out", out, "Output directory")->required();

  auto* sample = app.add_subcommand("sample", "Sample graphs and per-node percentile intervals");
  sample->add_option("--params", params_file, "Fitted parameter file")->required();
  sample->add_option("--samples", sampling.samples, "Number of sampled graphs")->required();
  sample->add_option("--seed", sampling.seed, "Random seed")->capture_default_str();
  sample->add_option("--alpha", sampling.alpha, "1 - confidence level")->capture_default_str();
  sample->add_option("--jobs", sampling.threads, "Worker threads")->capture_default_str();
  sample->add_flag("--graphs", graphs, "Also write every sampled graph as an edge list");
  sample->add_option("--out", out, "Output directory")->required();

  auto* compare = app.add_subcommand("compare", "AICc / BIC comparison of two fits");
  compare->add_option("--ecm", ecm_file, "ECM parameter file")->required();
  compare->add_option("--wcm", wcm_file, "WCM parameter file")->required();
  compare->add_option("--out", out, "Output directory (default: stdout)");

  auto* bias = app.add_subcommand("bias", "Pair bias classification of an ECM fit");
  bias->add_option("--params", params_file, "ECM parameter file")->required();
  bias->add_option("--tolerance", tolerance, "Neutral band around 1")->capture_default_str();
  bias->add_option("--out", out, "Output directory")->required();

  auto* panel = app.add_subcommand("panel", "Full workflow over years x layer selections");
  add_data_options(panel, data);
  panel->add_option("--model", model, "ecm|wcm|both")->capture_default_str();
  panel->add_option("--config", config, "Fit config (.json or .toml)");
  panel->add_option("--seed", sampling.seed, "Random seed")->capture_default_str();
  panel->add_option("--samples", sampling.samples, "Samples per fitted model for intervals (0: none)")
      ->capture_default_str();
  panel->add_option("--alpha", sampling.alpha, "1 - confidence level")->capture_default_str();
  panel->add_flag("--normalize", normalize, "Divide s, snn and cw by the total weight");
  panel->add_option("--jobs", jobs, "Worker threads (0: all cores)")->capture_default_str();
  panel->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*ingest) return cmd_ingest(data, out);
    if (*fitc) return cmd_fit(data, model, config, trace, out);
    if (*stats) return cmd_stats(data, params_files, normalize, out);
    if (*sample) return cmd_sample(params_file, sampling, graphs, out);
    if (*compare) return cmd_compare(ecm_file, wcm_file, out);
    if (*bias) return cmd_bias(params_file, tolerance, out);
    if (*panel) return cmd_panel(data, model, config, sampling, normalize, jobs, out);
  } catch (const FitError& e) {
    std::cerr << "nullnet: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "nullnet: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::out_of_range& e) {
    std::cerr << "nullnet: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "nullnet: " << e.what() << '\n';
    return kExitInput;
  } catch (const DegenerateInputError& e) {
    std::cerr << "nullnet: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "nullnet: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
