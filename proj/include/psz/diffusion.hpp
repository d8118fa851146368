#pragma once

// Adapt-then-combine diffusion over a node network. Each node owns one
// loudspeaker, one bright-zone and one dark-zone microphone (M = L).
//
// full:      every node adapts the whole stacked filter vector from its own
//            microphones with step mu1 = mu M, then all estimates are averaged.
//            Reproduces the centralized update exactly.
// efficient: node m adapts only the filters of its neighbourhood N_m with
//            step mu; each filter is then fused from its neighbours'
//            estimates with weights alpha_{ml} and pushed back to them.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "psz/dsp_core.hpp"
#include "psz/metrics.hpp"
#include "psz/topology.hpp"
#include "psz/wpm.hpp"

namespace psz {

/// Stacked gradient contribution of one node: `blocks` K-tap blocks.
struct LocalGradient {
  std::size_t blocks = 0;
  std::size_t taps = 0;
  std::vector<double> v;

  std::span<const double> block(std::size_t i) const {
    return std::span<const double>(v).subspan(i * taps, taps);
  }
};

/// Node m's adapted estimate of the whole filter bank.
struct FullNodeEstimate {
  ControlFilterBank phi;
};

/// v_m = kappa R~_{B,m} e_B + (1 - kappa) R~_{D,m} p_D, where the single
/// reference row holds r~_{B,ml} / r~_{D,ml} for every loudspeaker l.
LocalGradient local_gradient_full(const FilteredReferences& refs_bright,
                                  const FilteredReferences& refs_dark, double error_bright,
                                  double dark, double kappa);

/// phi_m = w - mu1 v_m.
FullNodeEstimate atc_adapt_full(const ControlFilterBank& w, const LocalGradient& gradient,
                                double mu1, std::size_t iteration = 0,
                                std::optional<std::size_t> node = std::nullopt);

/// Same result as atc_adapt_full(w, local_gradient_full(...), mu1) with the
/// step folded into the two scalar gains. Counts 2(KL + 1) multiplications;
/// the 2JKL spent forming the references are counted where they are formed.
FullNodeEstimate atc_adapt_full(const ControlFilterBank& w, const FilteredReferences& refs_bright,
                                const FilteredReferences& refs_dark, double error_bright,
                                double dark, double kappa, double mu1,
                                std::size_t iteration = 0,
                                std::optional<std::size_t> node = std::nullopt,
                                OpCounter* ops = nullptr);

/// Uniform average of all node estimates. Every node gathers the other
/// M - 1 estimates, adding M (M - 1) L K scalars to `comm`.
ControlFilterBank atc_combine_full(std::span<const FullNodeEstimate> estimates,
                                   OpCounter* comm = nullptr);

/// Node m's copies of the filters in its neighbourhood, one K-block per
/// neighbour in ascending node order.
class NodeState {
 public:
  NodeState(std::size_t node, std::vector<std::size_t> neighbors, std::size_t taps);

  std::size_t node() const noexcept { return node_; }
  const std::vector<std::size_t>& neighbors() const noexcept { return neighbors_; }
  std::size_t taps() const noexcept { return taps_; }
  std::span<const double> stacked() const noexcept { return w_hat_; }

  std::span<const double> block(std::size_t slot) const;
  std::span<double> block(std::size_t slot);
  /// Block holding this node's copy of w_l; protocol error if l is not a neighbour.
  std::span<const double> block_for(std::size_t l) const;
  std::span<double> block_for(std::size_t l);

 private:
  std::size_t slot_of(std::size_t l) const;

  std::size_t node_;
  std::vector<std::size_t> neighbors_;
  std::size_t taps_;
  std::vector<double> w_hat_;
};

/// Adaptation outcome of node m: its estimate of w_l for every l in N_m.
struct AugmentedEstimate {
  std::size_t node = 0;
  std::vector<std::size_t> neighbors;
  std::size_t taps = 0;
  std::vector<double> blocks;

  /// Null when this node produced no estimate for l.
  std::optional<std::span<const double>> block_for(std::size_t l) const;
};

std::vector<NodeState> initial_node_states(const Topology& topology, std::size_t taps);

/// phi^_m = w^_m - mu v^_m with v^_m restricted to the neighbourhood.
/// Reference column i must belong to neighbour i of the state.
/// Counts 2(K|N_m| + 1) multiplications, references excluded.
AugmentedEstimate atc_adapt_neighbor(const NodeState& state, const FilteredReferences& refs_bright,
                                     const FilteredReferences& refs_dark, double error_bright,
                                     double dark, double kappa, double mu,
                                     std::size_t iteration = 0, OpCounter* ops = nullptr);

/// Fuses every filter l from the estimates of its neighbours with weights
/// alpha_{ml} and writes the fused value back into every state holding w_l.
/// `estimates[m]` must come from node m. Each estimate sent to another node
/// counts K scalars in comm_scalars; each fused filter pushed back to another
/// node counts K in redistributed_scalars.
void atc_combine_neighbor(const Topology& topology, std::span<const AugmentedEstimate> estimates,
                          std::span<NodeState> states, OpCounter* comm = nullptr);

/// Filters actually driving the loudspeakers: node l's own copy of w_l.
ControlFilterBank assemble_bank(std::span<const NodeState> states);

/// Bulk-synchronous simulation: every node adapts from iteration-n state,
/// then the network combines. Requires M = L and a topology over L nodes
/// (the full variant does not use the topology's links).
SimulationResult run_distributed(DiffusionVariant variant, const Topology& topology,
                                 const SimulationSetup& setup);

}  // namespace psz
