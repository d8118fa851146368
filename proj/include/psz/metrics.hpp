#pragma once

// Reproduction error, acoustic contrast, learning curves, and the
// multiplication / communication accounting of the distributed variants.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psz/topology.hpp"

namespace psz {

inline constexpr double kDbFloor = -200.0;
inline constexpr double kDbCeiling = 200.0;
inline constexpr std::size_t kDefaultMetricWindow = 400;

struct DbValue {
  double db = 0.0;
  /// False when the reference power (denominator) was zero and `db` is the
  /// clamp value.
  bool defined = true;
};

/// 10 log10(numerator / denominator), clamped to [-200, 200] dB.
/// A zero denominator yields `on_zero_denominator` with defined = false.
DbValue ratio_db(double numerator, double denominator, double on_zero_denominator);

/// Bright-zone reproduction error over a block of samples. Each argument
/// holds `samples * M` values, sample-major. Normalised by target power.
DbValue mse_db(std::span<const double> bright, std::span<const double> target,
               std::size_t microphones);

/// Bright-to-dark energy ratio over a block of samples (same layout).
DbValue ac_db(std::span<const double> bright, std::span<const double> dark,
              std::size_t microphones);

/// Streaming version of mse_db / ac_db over a sliding window of the most
/// recent `window` samples.
class MetricMeter {
 public:
  MetricMeter(std::size_t microphones, std::size_t window);

  void push(std::span<const double> bright, std::span<const double> target,
            std::span<const double> dark);

  DbValue mse() const;
  DbValue ac() const;

 private:
  double sum(const std::vector<double>& ring) const;

  std::size_t microphones_;
  std::size_t window_;
  std::size_t filled_ = 0;
  std::size_t next_ = 0;
  std::vector<double> error_energy_;
  std::vector<double> target_energy_;
  std::vector<double> bright_energy_;
  std::vector<double> dark_energy_;
};

struct CurvePoint {
  std::size_t iteration = 0;
  double time_s = 0.0;
  double mse_db = 0.0;
  double ac_db = 0.0;
  bool mse_defined = true;
  bool ac_defined = true;
};

struct RunInfo {
  std::string variant;
  double kappa = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;
};

struct LearningCurve {
  RunInfo info;
  std::vector<CurvePoint> points;
};

struct SteadyState {
  double mse_db = 0.0;
  double ac_db = 0.0;
};

/// Mean of the last ceil(fraction * N) points of each series.
SteadyState steady_state(const LearningCurve& curve, double fraction);

/// Mean MSE over the first ceil(fraction * N) points, skipping points whose
/// MSE was undefined (zero target power before the target delay elapses).
double initial_mse_db(const LearningCurve& curve, double fraction);

enum class DiffusionVariant { full, efficient };

const char* to_string(DiffusionVariant variant);

/// Per-node multiplications per iteration of the adaptation step:
/// 2[(J+1)K L + 1] for the full variant, 2[(J+1)K |N_m| + 1] for the
/// efficient one (`neighborhood` is ignored for the full variant).
std::uint64_t predicted_mults(DiffusionVariant variant, std::size_t plant_taps,
                              std::size_t control_taps, std::size_t nodes,
                              std::size_t neighborhood);

/// Network-wide scalars exchanged per combine step: K L^2 (L-1) for the full
/// variant, K sum_m (|N_m| - 1) for the efficient one.
std::uint64_t predicted_comm(DiffusionVariant variant, std::size_t control_taps,
                             std::size_t nodes, const Topology& topology);

struct ComplexityReport {
  std::string variant;
  std::string reference_mode;
  std::uint64_t iterations = 0;
  /// Closed-form prediction, one entry per processing node.
  std::vector<std::uint64_t> mults_per_node_per_iter;
  /// Instrumented totals divided by the iteration count.
  std::vector<std::uint64_t> measured_mults;
  std::uint64_t comm_scalars_per_iter_network = 0;
  std::uint64_t measured_comm = 0;
  /// Scalars pushed back to neighbours after fusion (efficient variant).
  /// Tracked apart from measured_comm, which follows the closed form.
  std::uint64_t redistributed_per_iter = 0;
};

/// key=value lines, one per field; per-node entries use `key.<node>`.
std::string to_text(const ComplexityReport& report);

}  // namespace psz
