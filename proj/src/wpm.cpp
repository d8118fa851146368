#include "psz/wpm.hpp"

#include <cmath>

#include "psz/error.hpp"
#include "scene.hpp"

namespace psz {

ControlFilterBank::ControlFilterBank(std::size_t filters, std::size_t taps)
    : filters_(filters), taps_(taps), data_(filters * taps, 0.0) {
  require(filters >= 1 && taps >= 1, ErrorCategory::dimension,
          "filter bank needs at least one filter of one tap");
}

std::span<const double> ControlFilterBank::filter(std::size_t l) const {
  require(l < filters_, ErrorCategory::dimension, "filter index out of range");
  return std::span<const double>(data_).subspan(l * taps_, taps_);
}

std::span<double> ControlFilterBank::filter(std::size_t l) {
  require(l < filters_, ErrorCategory::dimension, "filter index out of range");
  return std::span<double>(data_).subspan(l * taps_, taps_);
}

double norm(const ControlFilterBank& bank) {
  double s = 0.0;
  for (double v : bank.stacked()) s += v * v;
  return std::sqrt(s);
}

void AlgoParams::validate() const {
  require(kappa > 0.0 && kappa < 1.0, ErrorCategory::config,
          "kappa must lie strictly between 0 and 1");
  require(std::isfinite(mu) && mu >= 0.0, ErrorCategory::config, "step size must be >= 0");
}

FilteredReferences::FilteredReferences(std::size_t rows, std::size_t cols, std::size_t taps)
    : rows_(rows), cols_(cols), taps_(taps), data_(rows * cols * taps, 0.0) {}

std::span<const double> FilteredReferences::at(std::size_t row, std::size_t col) const {
  require(row < rows_ && col < cols_, ErrorCategory::dimension, "reference index out of range");
  return std::span<const double>(data_).subspan((row * cols_ + col) * taps_, taps_);
}

std::span<double> FilteredReferences::at(std::size_t row, std::size_t col) {
  require(row < rows_ && col < cols_, ErrorCategory::dimension, "reference index out of range");
  return std::span<double>(data_).subspan((row * cols_ + col) * taps_, taps_);
}

double target_pressure(const SignalHistory& x, const PlantEstimate& plants,
                       const TargetSpec& spec, std::size_t m) {
  require(spec.source < plants.loudspeakers(), ErrorCategory::dimension,
          "target source loudspeaker out of range");
  const auto window = x.window(spec.delay + plants.taps()).subspan(spec.delay);
  return fir_dot(window, plants.response(Zone::bright, m, spec.source));
}

double instantaneous_cost(std::span<const double> bright, std::span<const double> target,
                          std::span<const double> dark, double kappa) {
  require(kappa > 0.0 && kappa < 1.0, ErrorCategory::config,
          "kappa must lie strictly between 0 and 1");
  require(bright.size() == target.size() && bright.size() == dark.size(),
          ErrorCategory::dimension, "cost inputs must all be M-vectors");
  double e = 0.0;
  double d = 0.0;
  for (std::size_t m = 0; m < bright.size(); ++m) {
    e += (bright[m] - target[m]) * (bright[m] - target[m]);
    d += dark[m] * dark[m];
  }
  return kappa * e + (1.0 - kappa) * d;
}

void check_divergence(std::span<const double> taps, std::size_t iteration,
                      std::optional<std::size_t> node) {
  for (double v : taps) {
    if (!std::isfinite(v) || std::abs(v) > kDivergenceThreshold) {
      throw NumericError("adaptation diverged (tap " + std::to_string(v) + ")", iteration, node);
    }
  }
}

ControlFilterBank centralized_step(const ControlFilterBank& w, const FilteredReferences& refs_bright,
                                   const FilteredReferences& refs_dark,
                                   std::span<const double> errors_bright,
                                   std::span<const double> dark, const AlgoParams& params,
                                   std::size_t iteration, OpCounter* ops) {
  const std::size_t mics = errors_bright.size();
  require(dark.size() == mics && refs_bright.rows() == mics && refs_dark.rows() == mics,
          ErrorCategory::dimension, "centralized step: microphone counts disagree");
  require(refs_bright.cols() == w.filters() && refs_dark.cols() == w.filters() &&
              refs_bright.taps() == w.taps() && refs_dark.taps() == w.taps(),
          ErrorCategory::dimension, "centralized step: reference shape does not match filters");

  // mu kappa and mu (1 - kappa) are run constants; per microphone only the
  // two scalar gains and the 2 K L scaled accumulations are counted.
  const double gain_bright = params.mu * params.kappa;
  const double gain_dark = params.mu * (1.0 - params.kappa);
  ControlFilterBank next = w;
  for (std::size_t m = 0; m < mics; ++m) {
    const double a = gain_bright * errors_bright[m];
    const double b = gain_dark * dark[m];
    for (std::size_t l = 0; l < w.filters(); ++l) {
      auto wl = next.filter(l);
      auto rb = refs_bright.at(m, l);
      auto rd = refs_dark.at(m, l);
      for (std::size_t k = 0; k < wl.size(); ++k) wl[k] -= a * rb[k] + b * rd[k];
    }
    if (ops) ops->add_mults(2 + 2 * w.taps() * w.filters());
  }
  check_divergence(next.stacked(), iteration);
  return next;
}

const char* to_string(ReferenceMode mode) {
  return mode == ReferenceMode::direct ? "direct" : "recursive";
}

ReferenceMode parse_reference_mode(const std::string& text) {
  if (text == "direct") return ReferenceMode::direct;
  if (text == "recursive") return ReferenceMode::recursive;
  throw_error(ErrorCategory::config, "unknown reference mode '" + text + "'");
}

void SimulationSetup::validate() const {
  params.validate();
  require(control_taps >= 1, ErrorCategory::config, "control filters need K >= 1");
  require(estimate.loudspeakers() == plants.loudspeakers() &&
              estimate.microphones() == plants.microphones() && estimate.taps() == plants.taps(),
          ErrorCategory::dimension, "plant estimate shape differs from the plants");
  require(target.source < plants.loudspeakers(), ErrorCategory::config,
          "target source loudspeaker out of range");
  require(metric_window >= 1, ErrorCategory::config, "metric window must be >= 1");
  require(threads >= 1, ErrorCategory::config, "need at least one worker thread");
}

SimulationResult run_centralized(const SimulationSetup& setup) {
  setup.validate();
  const std::size_t L = setup.plants.loudspeakers();
  const std::size_t M = setup.plants.microphones();
  const std::size_t K = setup.control_taps;
  const std::size_t J = setup.plants.taps();
  const double fs = setup.plants.sample_rate() > 0.0 ? setup.plants.sample_rate() : 1.0;

  detail::AcousticScene scene(setup);
  std::vector<std::size_t> all(L);
  for (std::size_t l = 0; l < L; ++l) all[l] = l;
  std::vector<detail::LocalReferences> locals;
  locals.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    locals.emplace_back(setup.estimate, m, all, K, setup.reference_mode);
  }

  ControlFilterBank bank(L, K);
  FilteredReferences refs_bright(M, L, K);
  FilteredReferences refs_dark(M, L, K);
  MetricMeter meter(M, setup.metric_window);
  OpCounter ops;

  SimulationResult result{LearningCurve{setup.info, {}}, ComplexityReport{}, bank};
  result.curve.points.reserve(setup.input.size());

  for (std::size_t n = 0; n < setup.input.size(); ++n) {
    scene.advance(setup.input[n], [&](std::size_t l) { return bank.filter(l); });
    meter.push(scene.bright(), scene.target(), scene.dark());
    const DbValue mse = meter.mse();
    const DbValue ac = meter.ac();
    result.curve.points.push_back({n, static_cast<double>(n) / fs, mse.db, ac.db, mse.defined,
                                   ac.defined});

    for (std::size_t m = 0; m < M; ++m) locals[m].update(scene, refs_bright, refs_dark, m, &ops);
    bank = centralized_step(bank, refs_bright, refs_dark, scene.error(), scene.dark(),
                            setup.params, n, &ops);
    if (setup.observer) setup.observer(n, bank);
  }

  const std::uint64_t iterations = setup.input.size();
  ComplexityReport& report = result.complexity;
  report.variant = "centralized";
  report.reference_mode = to_string(setup.reference_mode);
  report.iterations = iterations;
  report.mults_per_node_per_iter = {M * predicted_mults(DiffusionVariant::full, J, K, L, L)};
  report.measured_mults = {iterations ? ops.mults / iterations : 0};
  result.filters = bank;
  return result;
}

}  // namespace psz
