#pragma once

// Scenario configuration (flat key=value text), the eight-node preset,
// run dispatch and result files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psz/diffusion.hpp"
#include "psz/dsp_core.hpp"
#include "psz/plants.hpp"
#include "psz/topology.hpp"
#include "psz/wpm.hpp"

namespace psz {

enum class Variant { centralized, distributed_full, distributed_efficient };

const char* to_string(Variant variant);
Variant parse_variant(const std::string& text);

struct TopologySpec {
  /// ring | full | line | edges
  std::string kind = "ring";
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  AlphaPolicy alpha = AlphaPolicy::normalized;

  Topology build(std::size_t nodes) const;
};

struct PlantSource {
  /// synth | files
  std::string kind = "synth";
  std::filesystem::path path;
  SynthRirSpec synth;
  /// When set, the controller uses plants perturbed this many dB below
  /// each response's level instead of exact copies.
  std::optional<double> estimate_error_db;
};

struct Scenario {
  Variant variant = Variant::distributed_efficient;
  std::size_t loudspeakers = 8;
  std::size_t microphones = 8;
  std::size_t control_taps = 128;
  std::size_t plant_taps = 128;
  double sample_rate = 4000.0;
  double duration = 60.0;
  std::uint64_t seed = 1;
  double kappa = 0.5;
  double mu = 0.016;
  TargetSpec target;
  TopologySpec topology;
  PlantSource plants;
  NoiseSpec noise;
  std::size_t metric_window = kDefaultMetricWindow;
  ReferenceMode reference_mode = ReferenceMode::direct;
  std::size_t threads = 1;

  /// Config errors for anything a run would reject.
  void validate() const;
  std::size_t iterations() const;
};

/// Applies `key=value` lines on top of the defaults (or `base`). Blank lines
/// and `#` comments are ignored; unknown or repeated keys are config errors.
Scenario parse_scenario(std::string_view text);
Scenario parse_scenario(std::string_view text, Scenario base);
Scenario load_scenario(const std::filesystem::path& path);

/// Sets a single key. `kappa` and `mu` are accepted as aliases of
/// `algo.kappa` and `algo.mu`.
void apply_setting(Scenario& scenario, const std::string& key, const std::string& value);

/// Canonical text: every key, sorted, shortest round-trip numbers.
/// parse_scenario(normalize(s)) reproduces s and normalises to the same text.
std::string normalize(const Scenario& scenario);

struct PaperPreset {
  Scenario scenario;
  double mu_centralized = 0.06;
  double mu_efficient = 0.016;
  std::vector<double> kappas{0.2, 0.5, 0.8};

  /// The preset scenario switched to `variant` at weight `kappa`, with the
  /// step size that variant uses.
  Scenario for_variant(Variant variant, double kappa) const;
};

/// Eight nodes on a ring, 128-tap filters and plants at 4 kHz, 100-1000 Hz
/// noise, 60 s, efficient variant at kappa 0.5, synthetic plants.
PaperPreset paper_preset();

struct RunResult {
  SimulationResult simulation;
  std::string scenario_echo;
  std::vector<std::string> warnings;
};

/// Validates, builds plants and input, and dispatches to the runner.
/// `observer` is forwarded to the simulation.
RunResult run(const Scenario& scenario,
              std::function<void(std::size_t, const ControlFilterBank&)> observer = {});

/// Writes curve.csv, complexity.txt, filters.f64 and scenario.norm.
void emit(const RunResult& result, const std::filesystem::path& out_dir);

std::string curve_csv(const LearningCurve& curve);

}  // namespace psz
