#pragma once

// Module dependency graphs (MDG), the Modularization Quality (MQ) fitness and
// an exhaustive optimum search for small graphs.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "modclust/detail/text.hpp"

namespace modclust {

/// Cluster label per module; labels live in [1, D] for a graph of D modules.
using ClusterLabels = std::vector<int>;

struct Edge {
  std::size_t source;
  std::size_t target;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct IntraInterWeights {
  double intra = 0.0;
  double inter = 0.0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Directed, weighted dependency graph over uniquely named modules.
///
/// Edges are strictly positive, never self-loops and never duplicated for the
/// same (source, target) pair. An undirected relationship is two edges.
class ModuleGraph {
 public:
  ModuleGraph() = default;

  /// Registers a module if unseen and returns its index.
  std::size_t add_module(std::string_view name) {
    if (name.empty()) throw std::invalid_argument("module name must be non-empty");
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    modules_.emplace_back(name);
    index_.emplace(modules_.back(), modules_.size() - 1);
    return modules_.size() - 1;
  }

  void add_edge(std::size_t source, std::size_t target, double weight) {
    if (source >= modules_.size() || target >= modules_.size())
      throw std::out_of_range("edge endpoint is not a registered module");
    if (source == target) throw std::invalid_argument("self-loop on module '" + modules_[source] + "'");
    if (!(weight > 0.0) || !std::isfinite(weight))
      throw std::invalid_argument("edge weight must be a positive finite number");
    if (!edge_keys_.emplace(source, target).second)
      throw std::invalid_argument("duplicate edge " + modules_[source] + " -> " + modules_[target]);
    edges_.push_back({source, target, weight});
  }

  void add_edge(std::string_view source, std::string_view target, double weight = 1.0) {
    const auto s = add_module(source);
    const auto t = add_module(target);
    add_edge(s, t, weight);
  }

  std::size_t size() const noexcept { return modules_.size(); }
  const std::vector<std::string>& modules() const noexcept { return modules_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw std::out_of_range("unknown module '" + std::string(name) + "'");
    return it->second;
  }

  double total_weight() const noexcept {
    double sum = 0.0;
    for (const auto& e : edges_) sum += e.weight;
    return sum;
  }

  friend bool operator==(const ModuleGraph& a, const ModuleGraph& b) {
    return a.modules_ == b.modules_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::string> modules_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Edge> edges_;
  std::set<std::pair<std::size_t, std::size_t>> edge_keys_;
};

/// Parses the MDG text format.
///
/// One record per line: `SOURCE TARGET [WEIGHT]` declares a directed edge
/// (weight defaults to 1), a lone `NAME` declares a module. Blank lines and
/// lines starting with `#` are skipped. Modules are indexed in order of first
/// appearance. LF and CRLF line endings are both accepted.
inline ModuleGraph parse_mdg(std::istream& in) {
  ModuleGraph graph;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = detail::split_ws(body);
    try {
      switch (tokens.size()) {
        case 1:
          graph.add_module(tokens[0]);
          break;
        case 2:
        case 3: {
          double weight = 1.0;
          if (tokens.size() == 3) {
            auto w = detail::parse_double(tokens[2]);
            if (!w) throw ParseError(line_no, "weight '" + std::string(tokens[2]) + "' is not a number");
            weight = *w;
          }
          if (tokens[0] == tokens[1]) throw ParseError(line_no, "self-loop on '" + std::string(tokens[0]) + "'");
          if (!(weight > 0.0) || !std::isfinite(weight))
            throw ParseError(line_no, "edge weight must be positive and finite");
          graph.add_edge(tokens[0], tokens[1], weight);
          break;
        }
        default:
          throw ParseError(line_no, "expected 'SOURCE TARGET [WEIGHT]' or 'NAME', got " +
                                        std::to_string(tokens.size()) + " tokens");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return graph;
}

inline ModuleGraph parse_mdg(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_mdg(in);
}

/// Writes every module as a declaration line followed by one line per edge,
/// so that parsing the output reproduces module order and edges exactly.
inline std::string serialize_mdg(const ModuleGraph& graph) {
  std::string out;
  for (const auto& name : graph.modules()) {
    out += name;
    out += '\n';
  }
  for (const auto& e : graph.edges()) {
    out += graph.modules()[e.source];
    out += ' ';
    out += graph.modules()[e.target];
    out += ' ';
    out += detail::format_shortest(e.weight);
    out += '\n';
  }
  return out;
}

/// Throws unless `labels` has one entry per module, each in [1, D].
inline void validate_labels(const ModuleGraph& graph, const ClusterLabels& labels) {
  if (labels.size() != graph.size())
    throw std::invalid_argument("label vector has " + std::to_string(labels.size()) + " entries, graph has " +
                                std::to_string(graph.size()) + " modules");
  const int max_label = static_cast<int>(graph.size());
  for (int l : labels)
    if (l < 1 || l > max_label)
      throw std::invalid_argument("cluster label " + std::to_string(l) + " outside [1, " +
                                  std::to_string(max_label) + "]");
}

inline IntraInterWeights cluster_weights(const ModuleGraph& graph, const ClusterLabels& labels, int cluster) {
  validate_labels(graph, labels);
  if (std::find(labels.begin(), labels.end(), cluster) == labels.end())
    throw std::invalid_argument("cluster " + std::to_string(cluster) + " has no modules");
  IntraInterWeights w;
  for (const auto& e : graph.edges()) {
    const bool in_source = labels[e.source] == cluster;
    const bool in_target = labels[e.target] == cluster;
    if (in_source && in_target)
      w.intra += e.weight;
    else if (in_source || in_target)
      w.inter += e.weight;
  }
  return w;
}

/// MF = i / (i + j/2), and 0 for a cluster without internal edges.
constexpr double modularization_factor(IntraInterWeights w) noexcept {
  if (w.intra == 0.0) return 0.0;
  return w.intra / (w.intra + 0.5 * w.inter);
}

/// Sum of modularization factors over the non-empty clusters.
inline double mq(const ModuleGraph& graph, const ClusterLabels& labels) {
  validate_labels(graph, labels);
  const std::size_t slots = graph.size() + 1;
  std::vector<IntraInterWeights> per_cluster(slots);
  for (const auto& e : graph.edges()) {
    const int ls = labels[e.source];
    const int lt = labels[e.target];
    if (ls == lt) {
      per_cluster[ls].intra += e.weight;
    } else {
      per_cluster[ls].inter += e.weight;
      per_cluster[lt].inter += e.weight;
    }
  }
  double total = 0.0;
  for (const auto& w : per_cluster) total += modularization_factor(w);
  return total;
}

/// Renumbers clusters by first appearance: the first module's cluster becomes 1,
/// the next unseen cluster 2, and so on.
inline ClusterLabels canonicalize(const ClusterLabels& labels) {
  std::unordered_map<int, int> remap;
  ClusterLabels out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()) + 1);
    out.push_back(it->second);
  }
  return out;
}

inline constexpr std::size_t kMaxOracleModules = 12;

struct OptimumResult {
  ClusterLabels labels;
  double mq = 0.0;
};

/// Exhaustive search over all set partitions of the modules.
///
/// Partitions are visited as restricted growth strings in lexicographic order,
/// which is exactly the set of canonical labelings; the first labeling reaching
/// the maximum (up to 1e-12) wins.
inline OptimumResult brute_force_optimum(const ModuleGraph& graph) {
  const std::size_t n = graph.size();
  if (n > kMaxOracleModules)
    throw std::length_error("brute-force oracle limited to " + std::to_string(kMaxOracleModules) +
                            " modules, graph has " + std::to_string(n));
  if (n == 0) return {};

  ClusterLabels current(n, 1);
  // prefix_max[k] = max label among current[0..k]
  std::vector<int> prefix_max(n, 1);
  OptimumResult best{current, mq(graph, current)};

  constexpr double kTieTolerance = 1e-12;
  while (true) {
    // Advance to the next restricted growth string.
    std::size_t k = n - 1;
    while (k > 0 && current[k] > prefix_max[k - 1]) --k;
    if (k == 0) break;
    ++current[k];
    prefix_max[k] = std::max(prefix_max[k - 1], current[k]);
    for (std::size_t m = k + 1; m < n; ++m) {
      current[m] = 1;
      prefix_max[m] = prefix_max[m - 1];
    }
    const double value = mq(graph, current);
    if (value > best.mq + kTieTolerance) best = {current, value};
  }
  return best;
}

}  // namespace modclust
