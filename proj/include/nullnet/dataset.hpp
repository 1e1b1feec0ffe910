#pragma once

// Multiplex flow panels indexed by (year, layer, source, target).

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nullnet/errors.hpp"
#include "nullnet/matrix.hpp"

namespace nullnet {

using Year = int;

/// HS1996 two-digit codes of the fourteen most relevant commodity classes.
inline constexpr std::array<std::string_view, 14> kTop14Layers = {
    "84", "85", "27", "87", "90", "39", "29", "30", "72", "71", "10", "52", "9", "93"};

struct Flow {
  std::size_t source;
  std::size_t target;
  double value;

  friend bool operator==(const Flow&, const Flow&) = default;
};

namespace detail {

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::string_view strip_leading_zeros(std::string_view s) {
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return s;
}

}  // namespace detail

/// Directed non-negative flows on a constant node set. Nodes that never trade
/// in a given (year, layer) are simply isolated in that matrix.
class MultiplexDataset {
 public:
  using CellKey = std::pair<Year, std::string>;

  MultiplexDataset() = default;

  /// `cells` holds one flow list per (year, layer); entries must already be
  /// merged (one entry per ordered pair).
  MultiplexDataset(std::vector<std::string> nodes, std::map<CellKey, std::vector<Flow>> cells)
      : nodes_(std::move(nodes)), cells_(std::move(cells)) {
    std::set<Year> years;
    std::set<std::string> layers;
    for (auto& [key, flows] : cells_) {
      years.insert(key.first);
      layers.insert(key.second);
      for (const auto& f : flows) {
        if (f.source >= nodes_.size() || f.target >= nodes_.size())
          throw InputError("flow endpoint outside the node set");
        if (f.source == f.target) throw InputError("self-flow for node '" + nodes_[f.source] + "'");
        if (!std::isfinite(f.value) || f.value < 0.0) throw InputError("flow value is negative or not finite");
      }
      std::sort(flows.begin(), flows.end(), [](const Flow& a, const Flow& b) {
        return std::pair(a.source, a.target) < std::pair(b.source, b.target);
      });
    }
    years_.assign(years.begin(), years.end());
    layers_.assign(layers.begin(), layers.end());
  }

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<Year>& years() const noexcept { return years_; }
  const std::vector<std::string>& layers() const noexcept { return layers_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const std::map<CellKey, std::vector<Flow>>& cells() const noexcept { return cells_; }

  bool has_year(Year year) const { return std::binary_search(years_.begin(), years_.end(), year); }

  /// Canonical layer code for `code`. Purely numeric codes match regardless of
  /// leading zeros, so "9" finds a layer stored as "09".
  std::string resolve_layer(std::string_view code) const {
    if (std::binary_search(layers_.begin(), layers_.end(), code, std::less<>{})) return std::string(code);
    if (detail::all_digits(code)) {
      const auto want = detail::strip_leading_zeros(code);
      for (const auto& l : layers_)
        if (detail::all_digits(l) && detail::strip_leading_zeros(l) == want) return l;
    }
    throw LookupError("unknown layer '" + std::string(code) + "'");
  }

  const std::vector<Flow>& flows(Year year, std::string_view layer) const {
    if (!has_year(year)) throw LookupError("unknown year " + std::to_string(year));
    const auto canonical = resolve_layer(layer);
    auto it = cells_.find(CellKey{year, canonical});
    if (it == cells_.end())
      throw LookupError("layer '" + canonical + "' has no data for year " + std::to_string(year));
    return it->second;
  }

  SquareMatrix<double> flow_matrix(Year year, std::string_view layer) const {
    SquareMatrix<double> m(node_count());
    for (const auto& f : flows(year, layer)) m(f.source, f.target) += f.value;
    return m;
  }

 private:
  std::vector<std::string> nodes_;
  std::vector<Year> years_;
  std::vector<std::string> layers_;
  std::map<CellKey, std::vector<Flow>> cells_;
};

/// Entrywise sum of the directed flow matrices of `layers` in `year`.
/// An empty subset means every layer recorded for that year.
inline SquareMatrix<double> aggregate_layers(const MultiplexDataset& data, Year year,
                                             const std::vector<std::string>& layers) {
  if (data.layers().empty()) throw LookupError("dataset has no layers");
  if (!data.has_year(year)) throw LookupError("unknown year " + std::to_string(year));
  SquareMatrix<double> sum(data.node_count());
  if (layers.empty()) {
    for (const auto& [key, flows] : data.cells()) {
      if (key.first != year) continue;
      for (const auto& f : flows) sum(f.source, f.target) += f.value;
    }
    return sum;
  }
  const auto& selected = layers;
  std::set<std::string> seen;
  for (const auto& code : selected) {
    const auto canonical = data.resolve_layer(code);
    if (!seen.insert(canonical).second) continue;
    for (const auto& f : data.flows(year, canonical)) sum(f.source, f.target) += f.value;
  }
  return sum;
}

inline std::vector<std::string> top14_layers() { return {kTop14Layers.begin(), kTop14Layers.end()}; }

}  // namespace nullnet
