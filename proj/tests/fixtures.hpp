#pragma once

// Small simulation instances shared by the unit and acceptance tests.

#include <cstdint>
#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "psz/dsp_core.hpp"
#include "psz/plants.hpp"
#include "psz/wpm.hpp"

namespace fixture {

struct Shape {
  std::size_t loudspeakers = 4;
  std::size_t microphones = 4;
  std::size_t control_taps = 16;
  std::size_t plant_taps = 16;
  std::size_t iterations = 500;
  double kappa = 0.5;
  double mu = 0.05;
  std::uint64_t seed = 1;
  psz::ReferenceMode mode = psz::ReferenceMode::direct;
};

inline psz::SimulationSetup make_setup(const Shape& s) {
  psz::SynthRirSpec synth;
  synth.taps = s.plant_taps;
  synth.delay_min = 0;
  synth.delay_max = s.plant_taps / 4;
  synth.seed = s.seed;
  const psz::PlantSet plants = psz::synth_plant_set(synth, s.loudspeakers, s.microphones, 4000.0);

  psz::NoiseSpec noise;
  noise.seed = s.seed + 100;
  noise.filter_order = 63;

  return psz::SimulationSetup{plants,
                              plants,
                              psz::bandlimited_noise(noise, s.iterations),
                              s.control_taps,
                              psz::AlgoParams{s.kappa, s.mu},
                              psz::TargetSpec{0, s.plant_taps / 2},
                              50,
                              s.mode,
                              1,
                              psz::RunInfo{"test", s.kappa, s.mu, s.seed},
                              {}};
}

/// Random filtered references for `rows` microphones and `cols` loudspeakers.
inline psz::FilteredReferences random_references(std::mt19937_64& rng, std::size_t rows,
                                                 std::size_t cols, std::size_t taps) {
  psz::FilteredReferences r(rows, cols, taps);
  for (std::size_t m = 0; m < rows; ++m)
    for (std::size_t l = 0; l < cols; ++l) {
      const auto v = oracle::random_vector(rng, taps);
      std::copy(v.begin(), v.end(), r.at(m, l).begin());
    }
  return r;
}

/// r_{ml}[k] = sum_j h_{ml}[j] x(n - j - k) for random plants of `plant_taps`
/// taps and a random input history, summed directly.
inline psz::FilteredReferences plant_references(std::mt19937_64& rng, std::size_t rows,
                                                std::size_t cols, std::size_t taps,
                                                std::size_t plant_taps) {
  const auto x = oracle::random_vector(rng, taps + plant_taps + 8);
  const std::size_t n = x.size() - 1;
  psz::FilteredReferences r(rows, cols, taps);
  for (std::size_t m = 0; m < rows; ++m)
    for (std::size_t l = 0; l < cols; ++l) {
      const auto h = oracle::random_vector(rng, plant_taps);
      auto out = r.at(m, l);
      for (std::size_t k = 0; k < taps; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < plant_taps; ++j) acc += h[j] * x[n - j - k];
        out[k] = acc;
      }
    }
  return r;
}

/// p_m = sum_l r_{ml}^T w_l (the filtered-reference form of the pressure).
inline std::vector<double> pressures(const psz::FilteredReferences& r,
                                     const std::vector<double>& stacked, std::size_t taps) {
  std::vector<double> p(r.rows(), 0.0);
  for (std::size_t m = 0; m < r.rows(); ++m)
    for (std::size_t l = 0; l < r.cols(); ++l) {
      const auto ref = r.at(m, l);
      for (std::size_t k = 0; k < taps; ++k) p[m] += ref[k] * stacked[l * taps + k];
    }
  return p;
}

/// kappa ||p_B - p_T||^2 + (1 - kappa) ||p_D||^2, evaluated from scratch.
inline double cost(const psz::FilteredReferences& rb, const psz::FilteredReferences& rd,
                   const std::vector<double>& target, const std::vector<double>& stacked,
                   std::size_t taps, double kappa) {
  const auto pb = pressures(rb, stacked, taps);
  const auto pd = pressures(rd, stacked, taps);
  double eb = 0.0, ed = 0.0;
  for (std::size_t m = 0; m < pb.size(); ++m) {
    eb += (pb[m] - target[m]) * (pb[m] - target[m]);
    ed += pd[m] * pd[m];
  }
  return kappa * eb + (1.0 - kappa) * ed;
}

/// Largest per-component relative deviation between the analytic update
/// direction and central finite differences of the cost, on a random
/// L = M = 2, K = J = 4 instance.
inline double gradient_check(std::mt19937_64& rng) {
  const std::size_t L = 2, M = 2, K = 4, J = 4;
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  const double kappa = unit(rng);
  const double mu = 0.01;
  const auto rb = plant_references(rng, M, L, K, J);
  const auto rd = plant_references(rng, M, L, K, J);
  const auto target = oracle::random_vector(rng, M);
  const auto w0 = oracle::random_vector(rng, L * K, 0.5);

  psz::ControlFilterBank bank(L, K);
  std::copy(w0.begin(), w0.end(), bank.stacked().begin());
  const auto pb = pressures(rb, w0, K);
  const auto pd = pressures(rd, w0, K);
  std::vector<double> eb(M);
  for (std::size_t m = 0; m < M; ++m) eb[m] = pb[m] - target[m];

  const psz::ControlFilterBank next =
      psz::centralized_step(bank, rb, rd, eb, pd, psz::AlgoParams{kappa, mu});

  double worst = 0.0;
  const double h = 1e-4;  // the cost is quadratic: no truncation error
  for (std::size_t i = 0; i < L * K; ++i) {
    auto plus = w0, minus = w0;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (cost(rb, rd, target, plus, K, kappa) - cost(rb, rd, target, minus, K, kappa)) /
                      (2.0 * h);
    // w_next = w - (mu / 2) grad J
    const double analytic = -2.0 * (next.stacked()[i] - w0[i]) / mu;
    const double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-4);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace fixture
