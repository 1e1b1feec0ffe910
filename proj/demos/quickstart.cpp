// Fits both null models to one year of the toy panel and prints how well each
// reproduces the observed neighbour statistics.
//
//   quickstart [flows.csv] [year]

#include <iomanip>
#include <iostream>
#include <string>

#include "nullnet/nullnet.hpp"

using namespace nullnet;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : NULLNET_DEMO_DATA;
  const Year year = argc > 2 ? std::stoi(argv[2]) : 2002;

  const auto data = parse_edge_list(path);
  const auto graph = symmetrize_and_round(aggregate_layers(data, year, {}), data.nodes());
  std::cout << data.node_count() << " nodes, total weight " << graph.total_weight() << "\n\n";

  const auto ecm = fit(graph, ModelKind::ecm);
  const auto wcm = fit(graph, ModelKind::wcm);
  const auto observed = observed_stats(graph);

  std::cout << std::setw(6) << "stat" << std::setw(12) << "obs mean" << std::setw(12) << "ECM mean" << std::setw(12)
            << "WCM mean" << std::setw(12) << "ECM corr" << std::setw(12) << "WCM corr" << '\n';
  const auto e_ecm = expected_stats(ecm);
  const auto e_wcm = expected_stats(wcm);
  for (auto s : kAllStatistics) {
    const auto obs = panel_summary(observed.get(s), observed.constraint_for(s), observed.get(s));
    const auto a = panel_summary(e_ecm.get(s), observed.constraint_for(s), observed.get(s));
    const auto b = panel_summary(e_wcm.get(s), observed.constraint_for(s), observed.get(s));
    std::cout << std::setw(6) << to_string(s) << std::setw(12) << obs.mean.value_or(NAN) << std::setw(12)
              << a.mean.value_or(NAN) << std::setw(12) << b.mean.value_or(NAN) << std::setw(12)
              << a.corr_expected.value_or(NAN) << std::setw(12) << b.corr_expected.value_or(NAN) << '\n';
  }

  const auto cmp = compare_models(ecm.diagnostics.log_likelihood, wcm.diagnostics.log_likelihood, graph.size());
  std::cout << "\nAICc  ECM " << cmp.ecm.aic_c << "  WCM " << cmp.wcm.aic_c << "  w_ECM " << cmp.aic_c_weights.ecm
            << '\n';

  const auto bias = bias_report(ecm);
  std::cout << "pairs: " << bias.extensive << " extensive, " << bias.intensive << " intensive, " << bias.excluded
            << " excluded\n";
}
