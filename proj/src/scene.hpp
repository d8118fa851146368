#pragma once

// Per-sample acoustic world shared by the centralized and distributed
// runners: input history, loudspeaker drive signals, zone pressures and the
// node-local filtered references.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "psz/dsp_core.hpp"
#include "psz/plants.hpp"
#include "psz/wpm.hpp"

namespace psz::detail {

class AcousticScene {
 public:
  explicit AcousticScene(const SimulationSetup& setup);

  /// Pushes x(n), drives loudspeaker l with x(n)^T filter_of(l), and
  /// evaluates every zone pressure and target at time n.
  template <typename FilterOf>
  void advance(double x, FilterOf&& filter_of) {
    input_.push(x);
    const auto window = input_.window(control_taps_);
    for (std::size_t l = 0; l < drive_.size(); ++l) drive_[l].push(fir_dot(window, filter_of(l)));
    if (matrix_) matrix_->assign(input_);
    evaluate();
  }

  const SignalHistory& input() const noexcept { return input_; }
  /// Refreshed every sample in direct reference mode; null otherwise.
  const HistoryMatrix* matrix() const noexcept { return matrix_ ? &*matrix_ : nullptr; }

  std::span<const double> bright() const noexcept { return bright_; }
  std::span<const double> dark() const noexcept { return dark_; }
  std::span<const double> target() const noexcept { return target_; }
  /// p_B - p_T per microphone.
  std::span<const double> error() const noexcept { return error_; }

 private:
  void evaluate();

  const SimulationSetup& setup_;
  std::size_t control_taps_;
  SignalHistory input_;
  std::vector<SignalHistory> drive_;
  std::optional<HistoryMatrix> matrix_;
  std::vector<double> bright_;
  std::vector<double> dark_;
  std::vector<double> target_;
  std::vector<double> error_;
};

/// Filtered references one microphone needs for a set of loudspeakers, built
/// through the plant estimate.
class LocalReferences {
 public:
  LocalReferences(const PlantEstimate& estimate, std::size_t microphone,
                  std::vector<std::size_t> loudspeakers, std::size_t control_taps,
                  ReferenceMode mode);

  /// Writes r~_{B,m l_i} and r~_{D,m l_i} into column i of `row` of the
  /// outputs for every loudspeaker l_i in the set.
  void update(const AcousticScene& scene, FilteredReferences& bright, FilteredReferences& dark,
              std::size_t row, OpCounter* ops);

  const std::vector<std::size_t>& loudspeakers() const noexcept { return loudspeakers_; }

 private:
  const PlantEstimate& estimate_;
  std::size_t microphone_;
  std::vector<std::size_t> loudspeakers_;
  std::size_t control_taps_;
  ReferenceMode mode_;
  // Recursive mode: filtered input per (loudspeaker, zone).
  std::vector<SignalHistory> filtered_bright_;
  std::vector<SignalHistory> filtered_dark_;
};

}  // namespace psz::detail
