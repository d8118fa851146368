#include "psz/diffusion.hpp"

#include <algorithm>

#include "node_executor.hpp"
#include "psz/error.hpp"
#include "scene.hpp"

namespace psz {

LocalGradient local_gradient_full(const FilteredReferences& refs_bright,
                                  const FilteredReferences& refs_dark, double error_bright,
                                  double dark, double kappa) {
  require(refs_bright.rows() == 1 && refs_dark.rows() == 1 &&
              refs_bright.cols() == refs_dark.cols() && refs_bright.taps() == refs_dark.taps(),
          ErrorCategory::dimension, "local gradient needs one L x K reference row per zone");
  LocalGradient g{refs_bright.cols(), refs_bright.taps(),
                  std::vector<double>(refs_bright.cols() * refs_bright.taps(), 0.0)};
  for (std::size_t l = 0; l < g.blocks; ++l) {
    auto rb = refs_bright.at(0, l);
    auto rd = refs_dark.at(0, l);
    for (std::size_t k = 0; k < g.taps; ++k) {
      g.v[l * g.taps + k] = kappa * rb[k] * error_bright + (1.0 - kappa) * rd[k] * dark;
    }
  }
  return g;
}

FullNodeEstimate atc_adapt_full(const ControlFilterBank& w, const LocalGradient& gradient,
                                double mu1, std::size_t iteration,
                                std::optional<std::size_t> node) {
  require(gradient.blocks == w.filters() && gradient.taps == w.taps(), ErrorCategory::dimension,
          "gradient shape does not match the filter bank");
  FullNodeEstimate est{w};
  auto phi = est.phi.stacked();
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= mu1 * gradient.v[i];
  check_divergence(phi, iteration, node);
  return est;
}

FullNodeEstimate atc_adapt_full(const ControlFilterBank& w, const FilteredReferences& refs_bright,
                                const FilteredReferences& refs_dark, double error_bright,
                                double dark, double kappa, double mu1, std::size_t iteration,
                                std::optional<std::size_t> node, OpCounter* ops) {
  require(refs_bright.rows() == 1 && refs_dark.rows() == 1 &&
              refs_bright.cols() == w.filters() && refs_dark.cols() == w.filters() &&
              refs_bright.taps() == w.taps() && refs_dark.taps() == w.taps(),
          ErrorCategory::dimension, "full adaptation needs one L x K reference row per zone");
  const double a = (mu1 * kappa) * error_bright;
  const double b = (mu1 * (1.0 - kappa)) * dark;
  FullNodeEstimate est{w};
  for (std::size_t l = 0; l < w.filters(); ++l) {
    auto phi = est.phi.filter(l);
    auto rb = refs_bright.at(0, l);
    auto rd = refs_dark.at(0, l);
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] -= a * rb[k] + b * rd[k];
  }
  if (ops) ops->add_mults(2 + 2 * w.filters() * w.taps());
  check_divergence(est.phi.stacked(), iteration, node);
  return est;
}

ControlFilterBank atc_combine_full(std::span<const FullNodeEstimate> estimates, OpCounter* comm) {
  require(!estimates.empty(), ErrorCategory::dimension, "nothing to combine");
  const std::size_t L = estimates.front().phi.filters();
  const std::size_t K = estimates.front().phi.taps();
  ControlFilterBank sum(L, K);
  auto acc = sum.stacked();
  for (const auto& e : estimates) {
    require(e.phi.filters() == L && e.phi.taps() == K, ErrorCategory::dimension,
            "node estimates differ in shape");
    auto phi = e.phi.stacked();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += phi[i];
  }
  const double count = static_cast<double>(estimates.size());
  for (double& v : acc) v /= count;
  if (comm) {
    const std::uint64_t M = estimates.size();
    comm->comm_scalars += M * (M - 1) * L * K;
  }
  return sum;
}

NodeState::NodeState(std::size_t node, std::vector<std::size_t> neighbors, std::size_t taps)
    : node_(node), neighbors_(std::move(neighbors)), taps_(taps),
      w_hat_(neighbors_.size() * taps, 0.0) {
  require(std::is_sorted(neighbors_.begin(), neighbors_.end()), ErrorCategory::protocol,
          "neighbour blocks must be in ascending node order");
  require(std::binary_search(neighbors_.begin(), neighbors_.end(), node),
          ErrorCategory::protocol, "a node's neighbourhood must contain the node itself");
}

std::size_t NodeState::slot_of(std::size_t l) const {
  auto it = std::lower_bound(neighbors_.begin(), neighbors_.end(), l);
  if (it == neighbors_.end() || *it != l) {
    throw_error(ErrorCategory::protocol, "node " + std::to_string(node_) +
                                             " holds no copy of filter " + std::to_string(l));
  }
  return static_cast<std::size_t>(it - neighbors_.begin());
}

std::span<const double> NodeState::block(std::size_t slot) const {
  require(slot < neighbors_.size(), ErrorCategory::dimension, "block slot out of range");
  return std::span<const double>(w_hat_).subspan(slot * taps_, taps_);
}

std::span<double> NodeState::block(std::size_t slot) {
  require(slot < neighbors_.size(), ErrorCategory::dimension, "block slot out of range");
  return std::span<double>(w_hat_).subspan(slot * taps_, taps_);
}

std::span<const double> NodeState::block_for(std::size_t l) const { return block(slot_of(l)); }
std::span<double> NodeState::block_for(std::size_t l) { return block(slot_of(l)); }

std::optional<std::span<const double>> AugmentedEstimate::block_for(std::size_t l) const {
  auto it = std::lower_bound(neighbors.begin(), neighbors.end(), l);
  if (it == neighbors.end() || *it != l) return std::nullopt;
  const auto slot = static_cast<std::size_t>(it - neighbors.begin());
  if ((slot + 1) * taps > blocks.size()) return std::nullopt;
  return std::span<const double>(blocks).subspan(slot * taps, taps);
}

std::vector<NodeState> initial_node_states(const Topology& topology, std::size_t taps) {
  std::vector<NodeState> states;
  states.reserve(topology.size());
  for (std::size_t m = 0; m < topology.size(); ++m) {
    states.emplace_back(m, topology.neighbors(m), taps);
  }
  return states;
}

AugmentedEstimate atc_adapt_neighbor(const NodeState& state, const FilteredReferences& refs_bright,
                                     const FilteredReferences& refs_dark, double error_bright,
                                     double dark, double kappa, double mu, std::size_t iteration,
                                     OpCounter* ops) {
  const std::size_t blocks = state.neighbors().size();
  const std::size_t K = state.taps();
  require(refs_bright.rows() == 1 && refs_dark.rows() == 1 && refs_bright.cols() == blocks &&
              refs_dark.cols() == blocks && refs_bright.taps() == K && refs_dark.taps() == K,
          ErrorCategory::protocol,
          "references for node " + std::to_string(state.node()) +
              " do not cover exactly its neighbourhood");
  const double a = (mu * kappa) * error_bright;
  const double b = (mu * (1.0 - kappa)) * dark;
  AugmentedEstimate est{state.node(), state.neighbors(), K,
                        std::vector<double>(state.stacked().begin(), state.stacked().end())};
  for (std::size_t i = 0; i < blocks; ++i) {
    auto rb = refs_bright.at(0, i);
    auto rd = refs_dark.at(0, i);
    double* phi = est.blocks.data() + i * K;
    for (std::size_t k = 0; k < K; ++k) phi[k] -= a * rb[k] + b * rd[k];
  }
  if (ops) ops->add_mults(2 + 2 * blocks * K);
  check_divergence(est.blocks, iteration, state.node());
  return est;
}

void atc_combine_neighbor(const Topology& topology, std::span<const AugmentedEstimate> estimates,
                          std::span<NodeState> states, OpCounter* comm) {
  const std::size_t L = topology.size();
  require(estimates.size() == L && states.size() == L, ErrorCategory::protocol,
          "combine needs one estimate and one state per node");
  const std::size_t K = states.front().taps();
  std::vector<double> fused(K);
  for (std::size_t l = 0; l < L; ++l) {
    std::fill(fused.begin(), fused.end(), 0.0);
    for (std::size_t m : topology.neighbors(l)) {
      require(estimates[m].node == m, ErrorCategory::protocol,
              "estimate slot " + std::to_string(m) + " holds node " +
                  std::to_string(estimates[m].node));
      const auto block = estimates[m].block_for(l);
      if (!block || block->size() != K) {
        throw_error(ErrorCategory::protocol, "missing estimate block (m=" + std::to_string(m) +
                                                 ", l=" + std::to_string(l) + ")");
      }
      const double alpha = topology.alpha(m, l);
      for (std::size_t k = 0; k < K; ++k) fused[k] += alpha * (*block)[k];
      if (comm && m != l) comm->comm_scalars += K;
    }
    for (std::size_t m : topology.neighbors(l)) {
      auto dst = states[m].block_for(l);
      std::copy(fused.begin(), fused.end(), dst.begin());
      if (comm && m != l) comm->redistributed_scalars += K;
    }
  }
}

ControlFilterBank assemble_bank(std::span<const NodeState> states) {
  require(!states.empty(), ErrorCategory::dimension, "no node states");
  ControlFilterBank bank(states.size(), states.front().taps());
  for (std::size_t l = 0; l < states.size(); ++l) {
    auto src = states[l].block_for(l);
    std::copy(src.begin(), src.end(), bank.filter(l).begin());
  }
  return bank;
}

namespace {

CurvePoint record(MetricMeter& meter, const detail::AcousticScene& scene, std::size_t n,
                  double fs) {
  meter.push(scene.bright(), scene.target(), scene.dark());
  const DbValue mse = meter.mse();
  const DbValue ac = meter.ac();
  return {n, static_cast<double>(n) / fs, mse.db, ac.db, mse.defined, ac.defined};
}

}  // namespace

SimulationResult run_distributed(DiffusionVariant variant, const Topology& topology,
                                 const SimulationSetup& setup) {
  setup.validate();
  const std::size_t L = setup.plants.loudspeakers();
  const std::size_t K = setup.control_taps;
  const std::size_t J = setup.plants.taps();
  require(setup.plants.microphones() == L, ErrorCategory::config,
          "distributed variants need one microphone per zone per node (M = L)");
  require(topology.size() == L, ErrorCategory::config,
          "topology has " + std::to_string(topology.size()) + " nodes but there are " +
              std::to_string(L) + " loudspeakers");
  const double fs = setup.plants.sample_rate() > 0.0 ? setup.plants.sample_rate() : 1.0;
  const bool full_variant = variant == DiffusionVariant::full;

  detail::AcousticScene scene(setup);
  std::vector<detail::LocalReferences> locals;
  std::vector<FilteredReferences> refs_bright;
  std::vector<FilteredReferences> refs_dark;
  locals.reserve(L);
  for (std::size_t m = 0; m < L; ++m) {
    std::vector<std::size_t> set;
    if (full_variant) {
      for (std::size_t l = 0; l < L; ++l) set.push_back(l);
    } else {
      set = topology.neighbors(m);
    }
    refs_bright.emplace_back(1, set.size(), K);
    refs_dark.emplace_back(1, set.size(), K);
    locals.emplace_back(setup.estimate, m, std::move(set), K, setup.reference_mode);
  }

  ControlFilterBank bank(L, K);
  std::vector<NodeState> states = initial_node_states(topology, K);
  std::vector<FullNodeEstimate> full_estimates(L, FullNodeEstimate{bank});
  std::vector<AugmentedEstimate> neighbor_estimates(L);
  std::vector<OpCounter> node_ops(L);
  OpCounter network;
  MetricMeter meter(L, setup.metric_window);
  detail::NodeExecutor executor(setup.threads, L);

  const double mu1 = setup.params.mu1(L);
  const double kappa = setup.params.kappa;
  std::size_t n = 0;

  const std::function<void(std::size_t)> adapt = [&](std::size_t m) {
    locals[m].update(scene, refs_bright[m], refs_dark[m], 0, &node_ops[m]);
    const double e = scene.error()[m];
    const double d = scene.dark()[m];
    if (full_variant) {
      full_estimates[m] = atc_adapt_full(bank, refs_bright[m], refs_dark[m], e, d, kappa, mu1, n,
                                         m, &node_ops[m]);
    } else {
      neighbor_estimates[m] = atc_adapt_neighbor(states[m], refs_bright[m], refs_dark[m], e, d,
                                                 kappa, setup.params.mu, n, &node_ops[m]);
    }
  };

  SimulationResult result{LearningCurve{setup.info, {}}, ComplexityReport{}, bank};
  result.curve.points.reserve(setup.input.size());

  for (n = 0; n < setup.input.size(); ++n) {
    scene.advance(setup.input[n], [&](std::size_t l) { return bank.filter(l); });
    result.curve.points.push_back(record(meter, scene, n, fs));

    executor.run(adapt);

    if (full_variant) {
      bank = atc_combine_full(full_estimates, &network);
    } else {
      atc_combine_neighbor(topology, neighbor_estimates, states, &network);
      bank = assemble_bank(states);
    }
    for (std::size_t l = 0; l < L; ++l) check_divergence(bank.filter(l), n, l);
    if (setup.observer) setup.observer(n, bank);
  }

  const std::uint64_t iterations = setup.input.size();
  ComplexityReport& report = result.complexity;
  report.variant = std::string("distributed-") + to_string(variant);
  report.reference_mode = to_string(setup.reference_mode);
  report.iterations = iterations;
  for (std::size_t m = 0; m < L; ++m) {
    report.mults_per_node_per_iter.push_back(
        predicted_mults(variant, J, K, L, topology.neighbors(m).size()));
    report.measured_mults.push_back(iterations ? node_ops[m].mults / iterations : 0);
  }
  report.comm_scalars_per_iter_network = predicted_comm(variant, K, L, topology);
  report.measured_comm = iterations ? network.comm_scalars / iterations : 0;
  report.redistributed_per_iter = iterations ? network.redistributed_scalars / iterations : 0;
  result.filters = bank;
  return result;
}

}  // namespace psz
