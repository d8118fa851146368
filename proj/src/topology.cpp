#include "psz/topology.hpp"

#include <algorithm>

#include "psz/error.hpp"

namespace psz {

const char* to_string(AlphaPolicy policy) {
  return policy == AlphaPolicy::normalized ? "normalized" : "paper-literal";
}

AlphaPolicy parse_alpha_policy(const std::string& text) {
  if (text == "normalized") return AlphaPolicy::normalized;
  if (text == "paper-literal") return AlphaPolicy::paper_literal;
  throw_error(ErrorCategory::config, "unknown alpha policy '" + text + "'");
}

Topology::Topology(std::vector<std::vector<std::size_t>> neighbors, AlphaPolicy policy)
    : neighbors_(std::move(neighbors)), policy_(policy) {
  alpha_.resize(neighbors_.size());
  for (std::size_t l = 0; l < neighbors_.size(); ++l) {
    const double weight = policy == AlphaPolicy::normalized
                              ? 1.0 / static_cast<double>(neighbors_[l].size())
                              : 1.0;
    alpha_[l].assign(neighbors_[l].size(), weight);
  }
}

Topology Topology::from_adjacency(const std::vector<std::vector<bool>>& adjacency,
                                  AlphaPolicy policy) {
  const std::size_t n = adjacency.size();
  require(n >= 1, ErrorCategory::config, "topology needs at least one node");
  for (const auto& row : adjacency) {
    require(row.size() == n, ErrorCategory::config, "adjacency matrix must be square");
  }
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t l = 0; l < n; ++l) {
      if (m == l) {
        neighbors[m].push_back(l);
        continue;
      }
      require(adjacency[m][l] == adjacency[l][m], ErrorCategory::config,
              "adjacency is not symmetric at (" + std::to_string(m) + ", " + std::to_string(l) +
                  ")");
      if (adjacency[m][l]) neighbors[m].push_back(l);
    }
  }
  return Topology(std::move(neighbors), policy);
}

Topology Topology::from_edges(std::size_t nodes,
                              const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                              AlphaPolicy policy) {
  std::vector<std::vector<bool>> adjacency(nodes, std::vector<bool>(nodes, false));
  for (auto [a, b] : edges) {
    require(a < nodes && b < nodes, ErrorCategory::config,
            "edge " + std::to_string(a) + "-" + std::to_string(b) + " references a missing node");
    adjacency[a][b] = true;
    adjacency[b][a] = true;
  }
  return from_adjacency(adjacency, policy);
}

bool Topology::linked(std::size_t m, std::size_t l) const {
  const auto& n = neighbors(m);
  return std::binary_search(n.begin(), n.end(), l);
}

std::size_t Topology::slot(std::size_t m, std::size_t l) const {
  const auto& n = neighbors(m);
  auto it = std::lower_bound(n.begin(), n.end(), l);
  if (it == n.end() || *it != l) {
    throw_error(ErrorCategory::protocol,
                "node " + std::to_string(l) + " is not in the neighbourhood of node " +
                    std::to_string(m));
  }
  return static_cast<std::size_t>(it - n.begin());
}

double Topology::alpha(std::size_t m, std::size_t l) const { return alpha_.at(l)[slot(l, m)]; }

std::size_t Topology::directed_links() const {
  std::size_t links = 0;
  for (const auto& n : neighbors_) links += n.size() - 1;
  return links;
}

std::vector<std::vector<bool>> Topology::adjacency() const {
  std::vector<std::vector<bool>> a(size(), std::vector<bool>(size(), false));
  for (std::size_t m = 0; m < size(); ++m) {
    for (std::size_t l : neighbors_[m]) a[m][l] = true;
  }
  return a;
}

Topology ring(std::size_t nodes, AlphaPolicy policy) {
  require(nodes >= 3, ErrorCategory::config, "ring topology needs at least 3 nodes");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t m = 0; m < nodes; ++m) edges.emplace_back(m, (m + 1) % nodes);
  return Topology::from_edges(nodes, edges, policy);
}

Topology full(std::size_t nodes, AlphaPolicy policy) {
  require(nodes >= 1, ErrorCategory::config, "full topology needs at least 1 node");
  return Topology::from_adjacency(
      std::vector<std::vector<bool>>(nodes, std::vector<bool>(nodes, true)), policy);
}

Topology line(std::size_t nodes, AlphaPolicy policy) {
  require(nodes >= 1, ErrorCategory::config, "line topology needs at least 1 node");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t m = 0; m + 1 < nodes; ++m) edges.emplace_back(m, m + 1);
  return Topology::from_edges(nodes, edges, policy);
}

}  // namespace psz
