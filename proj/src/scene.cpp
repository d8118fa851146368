#include "scene.hpp"

#include <algorithm>

#include "psz/error.hpp"

namespace psz::detail {

AcousticScene::AcousticScene(const SimulationSetup& setup)
    : setup_(setup),
      control_taps_(setup.control_taps),
      input_(std::max(history_capacity(setup.control_taps, setup.plants.taps()),
                      setup.target.delay + setup.estimate.taps())),
      drive_(setup.plants.loudspeakers(), SignalHistory(setup.plants.taps())),
      bright_(setup.plants.microphones(), 0.0),
      dark_(setup.plants.microphones(), 0.0),
      target_(setup.plants.microphones(), 0.0),
      error_(setup.plants.microphones(), 0.0) {
  if (setup.reference_mode == ReferenceMode::direct) {
    matrix_.emplace(setup.estimate.taps(), setup.control_taps);
  }
}

void AcousticScene::evaluate() {
  for (std::size_t m = 0; m < bright_.size(); ++m) {
    bright_[m] = propagate(drive_, setup_.plants, Zone::bright, m);
    dark_[m] = propagate(drive_, setup_.plants, Zone::dark, m);
    target_[m] = target_pressure(input_, setup_.estimate, setup_.target, m);
    error_[m] = bright_[m] - target_[m];
  }
}

LocalReferences::LocalReferences(const PlantEstimate& estimate, std::size_t microphone,
                                 std::vector<std::size_t> loudspeakers,
                                 std::size_t control_taps, ReferenceMode mode)
    : estimate_(estimate),
      microphone_(microphone),
      loudspeakers_(std::move(loudspeakers)),
      control_taps_(control_taps),
      mode_(mode) {
  if (mode_ == ReferenceMode::recursive) {
    filtered_bright_.assign(loudspeakers_.size(), SignalHistory(control_taps));
    filtered_dark_.assign(loudspeakers_.size(), SignalHistory(control_taps));
  }
}

void LocalReferences::update(const AcousticScene& scene, FilteredReferences& bright,
                             FilteredReferences& dark, std::size_t row, OpCounter* ops) {
  require(bright.cols() == loudspeakers_.size() && dark.cols() == loudspeakers_.size(),
          ErrorCategory::dimension, "reference block does not match the loudspeaker set");
  for (std::size_t i = 0; i < loudspeakers_.size(); ++i) {
    const std::size_t l = loudspeakers_[i];
    const auto h_bright = estimate_.response(Zone::bright, microphone_, l);
    const auto h_dark = estimate_.response(Zone::dark, microphone_, l);
    if (mode_ == ReferenceMode::direct) {
      const HistoryMatrix* X = scene.matrix();
      require(X != nullptr, ErrorCategory::protocol, "direct references need the history matrix");
      filtered_reference_into(*X, h_bright, bright.at(row, i), ops);
      filtered_reference_into(*X, h_dark, dark.at(row, i), ops);
    } else {
      const auto x = scene.input().window(estimate_.taps());
      filtered_bright_[i].push(fir_dot(x, h_bright, ops));
      filtered_dark_[i].push(fir_dot(x, h_dark, ops));
      const auto wb = filtered_bright_[i].window(control_taps_);
      const auto wd = filtered_dark_[i].window(control_taps_);
      std::copy(wb.begin(), wb.end(), bright.at(row, i).begin());
      std::copy(wd.begin(), wd.end(), dark.at(row, i).begin());
    }
  }
}

}  // namespace psz::detail
