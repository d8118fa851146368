#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace psz {

/// How the combination coefficients alpha_{ml} are assigned.
enum class AlphaPolicy {
  normalized,     // 1 / |N_l| for every m in N_l
  paper_literal,  // 1 for every defined link
};

const char* to_string(AlphaPolicy policy);
AlphaPolicy parse_alpha_policy(const std::string& text);

/// Undirected node graph with self-inclusive neighbourhoods, sorted in
/// ascending node order, and combination weights alpha_{ml} defined exactly
/// for m in N_l.
class Topology {
 public:
  /// Validates symmetry; the diagonal is forced true.
  static Topology from_adjacency(const std::vector<std::vector<bool>>& adjacency,
                                 AlphaPolicy policy = AlphaPolicy::normalized);
  static Topology from_edges(std::size_t nodes,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                             AlphaPolicy policy = AlphaPolicy::normalized);

  std::size_t size() const noexcept { return neighbors_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t m) const { return neighbors_.at(m); }
  bool linked(std::size_t m, std::size_t l) const;

  /// Position of `l` within N_m; throws a protocol error if l is not in N_m.
  std::size_t slot(std::size_t m, std::size_t l) const;

  /// alpha_{ml}: weight node l gives to node m's estimate of w_l.
  double alpha(std::size_t m, std::size_t l) const;

  /// sum over m of (|N_m| - 1), the number of directed neighbour links.
  std::size_t directed_links() const;

  AlphaPolicy policy() const noexcept { return policy_; }
  std::vector<std::vector<bool>> adjacency() const;

 private:
  Topology(std::vector<std::vector<std::size_t>> neighbors, AlphaPolicy policy);

  std::vector<std::vector<std::size_t>> neighbors_;
  // alpha_[l][i] is alpha_{ml} for m = neighbors_[l][i].
  std::vector<std::vector<double>> alpha_;
  AlphaPolicy policy_;
};

/// Cycle with N_m = {m-1, m, m+1} mod L. Needs L >= 3.
Topology ring(std::size_t nodes, AlphaPolicy policy = AlphaPolicy::normalized);
/// Every node neighbours every node.
Topology full(std::size_t nodes, AlphaPolicy policy = AlphaPolicy::normalized);
/// Path 0 - 1 - ... - (L-1).
Topology line(std::size_t nodes, AlphaPolicy policy = AlphaPolicy::normalized);

}  // namespace psz
