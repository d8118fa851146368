#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "psz/diffusion.hpp"
#include "psz/error.hpp"

using namespace psz;

namespace {

ControlFilterBank random_bank(std::mt19937_64& rng, std::size_t L, std::size_t K) {
  ControlFilterBank w(L, K);
  const auto v = oracle::random_vector(rng, L * K);
  std::copy(v.begin(), v.end(), w.stacked().begin());
  return w;
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

std::vector<std::vector<double>> record_banks(const SimulationSetup& base,
                                              const std::function<SimulationResult(const SimulationSetup&)>& runner) {
  std::vector<std::vector<double>> banks;
  SimulationSetup setup = base;
  setup.observer = [&](std::size_t, const ControlFilterBank& b) { banks.push_back(to_vector(b.stacked())); };
  runner(setup);
  return banks;
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("local gradient is kappa r_B e + (1 - kappa) r_D p") {
  std::mt19937_64 rng(1);
  const std::size_t L = 3, K = 4;
  const auto rb = fixture::random_references(rng, 1, L, K);
  const auto rd = fixture::random_references(rng, 1, L, K);
  const LocalGradient g = local_gradient_full(rb, rd, 0.7, -1.3, 0.25);
  REQUIRE(g.blocks == L);
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t k = 0; k < K; ++k) {
      const double expected = 0.25 * rb.at(0, l)[k] * 0.7 + 0.75 * rd.at(0, l)[k] * -1.3;
      CHECK(g.block(l)[k] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("fused adaptation matches gradient then step") {
  std::mt19937_64 rng(2);
  const std::size_t L = 3, K = 5;
  const auto rb = fixture::random_references(rng, 1, L, K);
  const auto rd = fixture::random_references(rng, 1, L, K);
  const ControlFilterBank w = random_bank(rng, L, K);
  const auto plain = atc_adapt_full(w, local_gradient_full(rb, rd, 0.4, 0.9, 0.6), 0.3);
  OpCounter ops;
  const auto fused = atc_adapt_full(w, rb, rd, 0.4, 0.9, 0.6, 0.3, 0, std::nullopt, &ops);
  for (std::size_t i = 0; i < L * K; ++i) {
    CHECK(fused.phi.stacked()[i] == doctest::Approx(plain.phi.stacked()[i]).epsilon(1e-14));
  }
  CHECK(ops.mults == 2 * (K * L + 1));
}

TEST_CASE("full combine is the uniform mean") {
  const std::size_t L = 4, K = 2;
  std::vector<FullNodeEstimate> est;
  for (std::size_t m = 0; m < L; ++m) {
    ControlFilterBank phi(L, K);
    for (double& v : phi.stacked()) v = static_cast<double>(m + 1);
    est.push_back({phi});
  }
  OpCounter comm;
  const ControlFilterBank w = atc_combine_full(est, &comm);
  for (double v : w.stacked()) CHECK(v == doctest::Approx(2.5));
  CHECK(comm.comm_scalars == K * L * L * (L - 1));
}

TEST_CASE("neighbour adaptation is the full adaptation restricted to N_m") {
  std::mt19937_64 rng(3);
  const std::size_t L = 6, K = 4;
  const Topology topo = ring(L);
  const ControlFilterBank w = random_bank(rng, L, K);
  const auto all_b = fixture::random_references(rng, 1, L, K);
  const auto all_d = fixture::random_references(rng, 1, L, K);
  const double e = 0.3, p = -0.8, kappa = 0.35, mu = 0.02;
  const auto full_est = atc_adapt_full(w, all_b, all_d, e, p, kappa, mu);

  for (std::size_t m = 0; m < L; ++m) {
    NodeState state(m, topo.neighbors(m), K);
    FilteredReferences rb(1, state.neighbors().size(), K), rd(1, state.neighbors().size(), K);
    for (std::size_t i = 0; i < state.neighbors().size(); ++i) {
      const std::size_t l = state.neighbors()[i];
      std::copy(w.filter(l).begin(), w.filter(l).end(), state.block(i).begin());
      std::copy(all_b.at(0, l).begin(), all_b.at(0, l).end(), rb.at(0, i).begin());
      std::copy(all_d.at(0, l).begin(), all_d.at(0, l).end(), rd.at(0, i).begin());
    }
    OpCounter ops;
    const AugmentedEstimate est = atc_adapt_neighbor(state, rb, rd, e, p, kappa, mu, 0, &ops);
    CHECK(ops.mults == 2 * (K * state.neighbors().size() + 1));
    for (std::size_t l = 0; l < L; ++l) {
      const auto block = est.block_for(l);
      CHECK(block.has_value() == topo.linked(m, l));
      if (!block) continue;
      for (std::size_t k = 0; k < K; ++k) {
        CHECK((*block)[k] == doctest::Approx(full_est.phi.filter(l)[k]).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("neighbour combine fuses with alpha and leaves every copy consistent") {
  std::mt19937_64 rng(4);
  const std::size_t L = 5, K = 3;
  const Topology topo = ring(L);
  auto states = initial_node_states(topo, K);
  std::vector<AugmentedEstimate> est;
  for (std::size_t m = 0; m < L; ++m) {
    const auto& nb = topo.neighbors(m);
    est.push_back({m, nb, K, oracle::random_vector(rng, nb.size() * K)});
  }
  OpCounter comm;
  atc_combine_neighbor(topo, est, states, &comm);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> expected(K, 0.0);
    for (std::size_t m : topo.neighbors(l))
      for (std::size_t k = 0; k < K; ++k) expected[k] += topo.alpha(m, l) * (*est[m].block_for(l))[k];
    for (std::size_t m : topo.neighbors(l)) {
      const auto copy = to_vector(states[m].block_for(l));
      for (std::size_t k = 0; k < K; ++k) CHECK(copy[k] == doctest::Approx(expected[k]).epsilon(1e-14));
      CHECK(copy == to_vector(states[l].block_for(l)));
    }
  }
  CHECK(comm.comm_scalars == K * topo.directed_links());
  CHECK(comm.redistributed_scalars == K * topo.directed_links());
  CHECK(to_vector(assemble_bank(states).filter(2)) == to_vector(states[2].block_for(2)));
}

TEST_CASE("combine reports a missing block") {
  const std::size_t L = 4, K = 2;
  const Topology topo = ring(L);
  auto states = initial_node_states(topo, K);
  std::vector<AugmentedEstimate> est;
  for (std::size_t m = 0; m < L; ++m) {
    est.push_back({m, topo.neighbors(m), K, std::vector<double>(topo.neighbors(m).size() * K)});
  }
  est[1].neighbors = {1, 2};  // node 1 no longer reports w_0
  est[1].blocks.resize(2 * K);
  try {
    atc_combine_neighbor(topo, est, states);
    FAIL("expected a protocol error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::protocol);
    CHECK(std::string(e.what()).find("m=1, l=0") != std::string::npos);
  }
  CHECK_THROWS_AS(NodeState(0, {1, 2}, K), Error);
  CHECK_THROWS_AS(NodeState(1, {2, 1}, K), Error);
}

TEST_CASE("single node: distributed full equals centralized") {
  fixture::Shape shape;
  shape.loudspeakers = shape.microphones = 1;
  shape.iterations = 300;
  const SimulationSetup setup = fixture::make_setup(shape);
  const auto central = record_banks(setup, run_centralized);
  const auto dist = record_banks(setup, [](const SimulationSetup& s) {
    return run_distributed(DiffusionVariant::full, full(1), s);
  });
  REQUIRE(central.size() == dist.size());
  for (std::size_t n = 0; n < central.size(); ++n) CHECK(oracle::relative_difference(dist[n], central[n]) <= 1e-12);
}

TEST_CASE("efficient variant on a complete graph reduces to the full variant") {
  // With alpha = 1/L the efficient update is w - (mu / L) sum_m v_m, the full
  // variant's w - mu sum_m v_m at an L-times smaller step.
  fixture::Shape shape;
  shape.iterations = 400;
  const SimulationSetup base = fixture::make_setup(shape);
  SimulationSetup scaled = base;
  scaled.params.mu = base.params.mu * static_cast<double>(shape.loudspeakers);
  const auto full_banks = record_banks(base, [](const SimulationSetup& s) {
    return run_distributed(DiffusionVariant::full, full(4), s);
  });
  const auto eff_banks = record_banks(scaled, [](const SimulationSetup& s) {
    return run_distributed(DiffusionVariant::efficient, full(4), s);
  });
  REQUIRE(full_banks.size() == eff_banks.size());
  double worst = 0.0;
  for (std::size_t n = 0; n < full_banks.size(); ++n) {
    worst = std::max(worst, oracle::relative_difference(eff_banks[n], full_banks[n]));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("parallel node adaptation is bit-identical to sequential") {
  fixture::Shape shape;
  shape.iterations = 300;
  for (DiffusionVariant variant : {DiffusionVariant::full, DiffusionVariant::efficient}) {
    SimulationSetup setup = fixture::make_setup(shape);
    const SimulationResult seq = run_distributed(variant, ring(4), setup);
    setup.threads = 3;
    const SimulationResult par = run_distributed(variant, ring(4), setup);
    CHECK(seq.filters == par.filters);
    for (std::size_t i = 0; i < seq.curve.points.size(); ++i) {
      CHECK(seq.curve.points[i].mse_db == par.curve.points[i].mse_db);
    }
  }
}

TEST_CASE("measured counters follow the closed forms in direct mode") {
  fixture::Shape shape;
  shape.loudspeakers = shape.microphones = 5;
  shape.control_taps = 6;
  shape.plant_taps = 7;
  shape.iterations = 20;
  const SimulationSetup setup = fixture::make_setup(shape);
  const Topology topo = line(5);
  const auto full_r = run_distributed(DiffusionVariant::full, topo, setup).complexity;
  const auto eff_r = run_distributed(DiffusionVariant::efficient, topo, setup).complexity;
  CHECK(full_r.variant == "distributed-full");
  CHECK(eff_r.variant == "distributed-efficient");
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(full_r.measured_mults[m] == predicted_mults(DiffusionVariant::full, 7, 6, 5, 0));
    CHECK(eff_r.measured_mults[m] ==
          predicted_mults(DiffusionVariant::efficient, 7, 6, 5, topo.neighbors(m).size()));
    CHECK(eff_r.measured_mults[m] == eff_r.mults_per_node_per_iter[m]);
  }
  CHECK(full_r.measured_comm == 6u * 25u * 4u);
  CHECK(eff_r.measured_comm == 6u * topo.directed_links());
  CHECK(eff_r.redistributed_per_iter == 6u * topo.directed_links());
}

TEST_CASE("distributed runs need one microphone per loudspeaker and a matching topology") {
  fixture::Shape shape;
  shape.microphones = 3;
  CHECK_THROWS_AS(run_distributed(DiffusionVariant::efficient, ring(4), fixture::make_setup(shape)), Error);
  CHECK_THROWS_AS(run_distributed(DiffusionVariant::efficient, ring(5), fixture::make_setup(fixture::Shape{})),
                  Error);
}

TEST_CASE("an oversized step raises a numeric error naming the node") {
  fixture::Shape shape;
  shape.mu = 500.0;
  shape.iterations = 3000;
  try {
    run_distributed(DiffusionVariant::efficient, ring(4), fixture::make_setup(shape));
    FAIL("expected divergence");
  } catch (const NumericError& e) {
    CHECK(e.node().has_value());
    CHECK(e.iteration() < shape.iterations);
  }
}

}  // TEST_SUITE
