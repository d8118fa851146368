// Acceptance checks, one PASS/FAIL line each. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "psz/diffusion.hpp"
#include "psz/error.hpp"
#include "psz/scenario.hpp"

namespace fs = std::filesystem;
using namespace psz;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("unexpected exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome centralized_equivalence() {
  fixture::Shape shape;  // L = M = 4, K = J = 16
  shape.iterations = 5000;
  shape.mu = 0.05;
  SimulationSetup setup = fixture::make_setup(shape);

  std::vector<std::vector<double>> central;
  setup.observer = [&](std::size_t, const ControlFilterBank& b) {
    central.emplace_back(b.stacked().begin(), b.stacked().end());
  };
  run_centralized(setup);

  double worst = 0.0;
  std::size_t count = 0;
  setup.observer = [&](std::size_t n, const ControlFilterBank& b) {
    const std::vector<double> v(b.stacked().begin(), b.stacked().end());
    worst = std::max(worst, oracle::relative_difference(v, central.at(n)));
    ++count;
  };
  run_distributed(DiffusionVariant::full, ring(4), setup);
  return {count == central.size() && worst <= 1e-10,
          "max per-iteration relative difference " + fmt(worst) + " over " +
              std::to_string(count) + " iterations"};
}

Outcome gradient_correctness() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) worst = std::max(worst, fixture::gradient_check(rng));
  return {worst <= 1e-5, "worst relative component error " + fmt(worst) + " over 20 instances"};
}

Topology random_topology(std::mt19937_64& rng, std::size_t L) {
  switch (rng() % 4) {
    case 0: return ring(L);
    case 1: return line(L);
    case 2: return full(L);
    default: {
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (std::size_t a = 0; a < L; ++a)
        for (std::size_t b = a + 1; b < L; ++b)
          if (rng() % 2) edges.emplace_back(a, b);
      return Topology::from_edges(L, edges);
    }
  }
}

Outcome complexity_formulas() {
  std::mt19937_64 rng(31);
  int cases = 0;
  for (int trial = 0; trial < 30; ++trial) {
    fixture::Shape shape;
    shape.loudspeakers = shape.microphones = 3 + rng() % 5;
    shape.control_taps = 1 + rng() % 12;
    shape.plant_taps = 1 + rng() % 12;
    shape.iterations = 8;
    shape.seed = trial + 1;
    const std::size_t L = shape.loudspeakers, K = shape.control_taps, J = shape.plant_taps;
    const Topology topo = random_topology(rng, L);
    const SimulationSetup setup = fixture::make_setup(shape);

    const auto f = run_distributed(DiffusionVariant::full, topo, setup).complexity;
    const auto e = run_distributed(DiffusionVariant::efficient, topo, setup).complexity;
    for (std::size_t m = 0; m < L; ++m) {
      const std::uint64_t nm = topo.neighbors(m).size();
      if (f.measured_mults[m] != 2 * ((J + 1) * K * L + 1) ||
          e.measured_mults[m] != 2 * ((J + 1) * K * nm + 1)) {
        return {false, "multiply count mismatch at L=" + std::to_string(L) + " K=" +
                           std::to_string(K) + " J=" + std::to_string(J) + " node " +
                           std::to_string(m)};
      }
    }
    std::uint64_t links = 0;
    for (std::size_t m = 0; m < L; ++m) links += topo.neighbors(m).size() - 1;
    if (f.measured_comm != K * L * L * (L - 1) || e.measured_comm != K * links) {
      return {false, "communication count mismatch at L=" + std::to_string(L)};
    }
    ++cases;
  }

  const Topology preset = paper_preset().scenario.topology.build(8);
  const double mult_ratio = double(predicted_mults(DiffusionVariant::efficient, 128, 128, 8, 3)) /
                            double(predicted_mults(DiffusionVariant::full, 128, 128, 8, 3));
  const double comm_ratio = double(predicted_comm(DiffusionVariant::efficient, 128, 8, preset)) /
                            double(predicted_comm(DiffusionVariant::full, 128, 8, preset));
  // 0.375 to three significant figures; 3.57% is the stated 3.6% at its own precision
  const bool ratios = std::lround(mult_ratio * 1000) == 375 && std::lround(comm_ratio * 1000) == 36 &&
                      std::lround(comm_ratio * 10000) == 357;
  return {ratios, std::to_string(cases) + " randomized cases exact; preset ratios " +
                      fmt(100 * mult_ratio) + "% multiplies, " + fmt(100 * comm_ratio) +
                      "% communication"};
}

double mean_mse(const LearningCurve& c, double from, double to) {
  const std::size_t n = c.points.size();
  const auto a = static_cast<std::size_t>(from * n), b = static_cast<std::size_t>(to * n);
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += c.points[i].mse_db;
  return s / double(b - a);
}

Outcome kappa_ordering() {
  const PaperPreset preset = paper_preset();
  std::vector<SteadyState> steady;
  std::string detail;
  bool converged = true;
  for (double kappa : {0.2, 0.5, 0.8}) {
    const RunResult r = run(preset.for_variant(Variant::distributed_efficient, kappa));
    const LearningCurve& c = r.simulation.curve;
    steady.push_back(steady_state(c, 0.2));
    const double start = initial_mse_db(c, 0.002);
    // converged: well below the starting level and flat over the last 40%
    const bool settled = std::abs(mean_mse(c, 0.6, 0.8) - mean_mse(c, 0.8, 1.0)) <= 2.0;
    converged = converged && steady.back().mse_db <= start - 3.0 && settled;
    detail += "k=" + fmt(kappa) + " MSE " + fmt(steady.back().mse_db) + " dB (start " +
              fmt(start) + ") AC " + fmt(steady.back().ac_db) + " dB; ";
  }
  const bool mse = steady[2].mse_db + 1.0 <= steady[1].mse_db &&
                   steady[1].mse_db + 1.0 <= steady[0].mse_db;
  const bool ac = steady[0].ac_db >= steady[1].ac_db + 1.0 &&
                  steady[1].ac_db >= steady[2].ac_db + 1.0;
  return {mse && ac && converged, detail + (converged ? "converged" : "not converged")};
}

Outcome propagation_oracle() {
  std::mt19937_64 rng(55);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t L = 1 + rng() % 4, M = 1 + rng() % 4, J = 1 + rng() % 10, N = 30;
    PlantSet plants(L, M, J, 4000.0);
    for (Zone z : {Zone::bright, Zone::dark})
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t l = 0; l < L; ++l) {
          const auto h = oracle::random_vector(rng, J);
          std::copy(h.begin(), h.end(), plants.response(z, m, l).begin());
        }
    std::vector<std::vector<double>> u(L);
    for (auto& s : u) s = oracle::random_vector(rng, N);
    std::vector<SignalHistory> drive(L, SignalHistory(J));
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t l = 0; l < L; ++l) drive[l].push(u[l][n]);
      for (Zone z : {Zone::bright, Zone::dark})
        for (std::size_t m = 0; m < M; ++m) {
          double expected = 0.0;
          for (std::size_t l = 0; l < L; ++l) {
            const auto h = plants.response(z, m, l);
            const std::vector<double> y = oracle::convolve(u[l], {h.begin(), h.end()});
            expected += y[n];
          }
          worst = std::max(worst, std::abs(propagate(drive, plants, z, m) - expected));
        }
    }
  }
  return {worst <= 1e-12, "max abs deviation " + fmt(worst) + " over 100 instances"};
}

Outcome reference_identity() {
  std::mt19937_64 rng(66);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t L = 1 + rng() % 4, M = 1 + rng() % 3, J = 1 + rng() % 16,
                      K = 1 + rng() % 16;
    PlantSet plants(L, M, J, 4000.0);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t l = 0; l < L; ++l) {
        const auto h = oracle::random_vector(rng, J);
        std::copy(h.begin(), h.end(), plants.response(Zone::bright, m, l).begin());
      }
    ControlFilterBank w(L, K);
    const auto wv = oracle::random_vector(rng, L * K);
    std::copy(wv.begin(), wv.end(), w.stacked().begin());

    SignalHistory x(history_capacity(K, J));
    std::vector<SignalHistory> drive(L, SignalHistory(J));
    const auto input = oracle::random_vector(rng, J + K + 40);
    for (std::size_t n = 0; n < input.size(); ++n) {
      x.push(input[n]);
      for (std::size_t l = 0; l < L; ++l) drive[l].push(fir_dot(x.window(K), w.filter(l)));
      if (n < J + K) continue;
      const HistoryMatrix X = history_matrix(x, J, K);
      for (std::size_t m = 0; m < M; ++m) {
        const double eq2 = propagate(drive, plants, Zone::bright, m);
        double eq3 = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
          eq3 += fir_dot(filtered_reference(X, plants.response(Zone::bright, m, l)), w.filter(l));
        }
        worst = std::max(worst, std::abs(eq2 - eq3) / std::max(1.0, std::abs(eq3)));
      }
    }
  }
  return {worst <= 1e-10, "max relative deviation " + fmt(worst) + " once warm"};
}

Outcome determinism(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "psz_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Scenario s = paper_preset().scenario;
  s.duration = 1.0;
  std::string detail;
  std::string reference_curve, reference_filters;
  for (std::size_t threads : {1, 4}) {
    s.threads = threads;
    const fs::path cfg = dir / ("t" + std::to_string(threads) + ".cfg");
    std::ofstream(cfg) << normalize(s);
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / ("t" + std::to_string(threads) + "_" + std::to_string(rep));
      const std::string cmd =
          "\"" + cli + "\" run --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
      const std::string curve = slurp(out / "curve.csv");
      const std::string filters = slurp(out / "filters.f64");
      if (reference_curve.empty()) {
        reference_curve = curve;
        reference_filters = filters;
      } else if (curve != reference_curve || filters != reference_filters) {
        return {false, "outputs differ at threads=" + std::to_string(threads) + " run " +
                           std::to_string(rep)};
      }
    }
  }
  return {true, "4 invocations (threads 1 and 4) byte-identical, " +
                    std::to_string(reference_filters.size()) + " filter bytes"};
}

Outcome divergence() {
  Scenario s = paper_preset().scenario;
  s.mu *= 100.0;
  try {
    run(s);
  } catch (const NumericError& e) {
    return {true, std::string("numeric error at iteration ") + std::to_string(e.iteration()) +
                      (e.node() ? " node " + std::to_string(*e.node()) : std::string())};
  }
  return {false, "run completed without a divergence error"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to psz_sim>\n";
    return 2;
  }
  const std::string cli = argv[1];
  report(1, "centralized vs distributed-full equivalence", centralized_equivalence);
  report(2, "gradient vs finite differences", gradient_correctness);
  report(3, "complexity and communication counters", complexity_formulas);
  report(4, "kappa trade-off ordering on the preset", kappa_ordering);
  report(5, "propagation vs convolution oracle", propagation_oracle);
  report(6, "pressure via outputs vs filtered references", reference_identity);
  report(7, "determinism across invocations and threads", [&] { return determinism(cli); });
  report(8, "divergence raises a numeric error", divergence);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
