#pragma once

// Centralized weighted pressure matching: the control filter bank, the
// instantaneous wPM cost and its stochastic-gradient (LMS) update, and the
// per-sample simulation loop shared with the distributed runners.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psz/dsp_core.hpp"
#include "psz/metrics.hpp"
#include "psz/plants.hpp"

namespace psz {

/// Any tap beyond this magnitude is treated as divergence.
inline constexpr double kDivergenceThreshold = 1e6;

/// L control filters of K taps, stored as the stacked vector [w_1; ...; w_L].
class ControlFilterBank {
 public:
  ControlFilterBank(std::size_t filters, std::size_t taps);

  std::size_t filters() const noexcept { return filters_; }
  std::size_t taps() const noexcept { return taps_; }

  std::span<const double> filter(std::size_t l) const;
  std::span<double> filter(std::size_t l);
  std::span<const double> stacked() const noexcept { return data_; }
  std::span<double> stacked() noexcept { return data_; }

  bool operator==(const ControlFilterBank&) const = default;

 private:
  std::size_t filters_;
  std::size_t taps_;
  std::vector<double> data_;
};

/// Euclidean norm of the stacked taps.
double norm(const ControlFilterBank& bank);

struct AlgoParams {
  double kappa = 0.5;
  /// Step size of the centralized update; also the per-node step of the
  /// efficient distributed variant.
  double mu = 0.06;

  /// Step size of the distributed form of the centralized update, mu * M.
  double mu1(std::size_t microphones) const { return mu * static_cast<double>(microphones); }

  void validate() const;
};

struct TargetSpec {
  std::size_t source = 0;
  std::size_t delay = 64;
};

/// Filtered references r~_{ml} for a set of microphones (rows) and
/// loudspeakers (columns), K values each.
class FilteredReferences {
 public:
  FilteredReferences(std::size_t rows, std::size_t cols, std::size_t taps);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t taps() const noexcept { return taps_; }
  std::span<const double> at(std::size_t row, std::size_t col) const;
  std::span<double> at(std::size_t row, std::size_t col);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t taps_;
  std::vector<double> data_;
};

/// p_T,m(n) = sum_j h~_{B,m,source}[j] x(n - delay - j).
double target_pressure(const SignalHistory& x, const PlantEstimate& plants,
                       const TargetSpec& spec, std::size_t m);

/// kappa ||p_B - p_T||^2 + (1 - kappa) ||p_D||^2.
double instantaneous_cost(std::span<const double> bright, std::span<const double> target,
                          std::span<const double> dark, double kappa);

/// Throws NumericError if any tap is non-finite or exceeds the threshold.
void check_divergence(std::span<const double> taps, std::size_t iteration,
                      std::optional<std::size_t> node = std::nullopt);

/// w_l <- w_l - mu sum_m [kappa r~_{B,ml} e_m + (1 - kappa) r~_{D,ml} p_{D,m}].
/// `errors_bright` holds p_B - p_T per microphone.
ControlFilterBank centralized_step(const ControlFilterBank& w, const FilteredReferences& refs_bright,
                                   const FilteredReferences& refs_dark,
                                   std::span<const double> errors_bright,
                                   std::span<const double> dark, const AlgoParams& params,
                                   std::size_t iteration = 0, OpCounter* ops = nullptr);

/// How filtered references are produced each sample.
enum class ReferenceMode {
  /// h~^T X(n) from the J x K history matrix: J K multiplies per reference.
  direct,
  /// Filter x through h~ once per sample and read a K-window of the result:
  /// J multiplies per reference, bit-identical values.
  recursive,
};

const char* to_string(ReferenceMode mode);
ReferenceMode parse_reference_mode(const std::string& text);

struct SimulationSetup {
  PlantSet plants;
  PlantEstimate estimate;
  /// Input signal x(n); one adaptation iteration per sample.
  std::vector<double> input;
  std::size_t control_taps = 128;
  AlgoParams params;
  TargetSpec target;
  std::size_t metric_window = kDefaultMetricWindow;
  ReferenceMode reference_mode = ReferenceMode::direct;
  /// Worker threads for node adaptation (distributed runners only).
  std::size_t threads = 1;
  RunInfo info;
  /// Called after every update with the iteration index and the filters
  /// that will drive the loudspeakers at the next sample.
  std::function<void(std::size_t, const ControlFilterBank&)> observer;

  void validate() const;
};

struct SimulationResult {
  LearningCurve curve;
  ComplexityReport complexity;
  ControlFilterBank filters;
};

SimulationResult run_centralized(const SimulationSetup& setup);

}  // namespace psz
