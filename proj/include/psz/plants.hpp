#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "psz/dsp_core.hpp"

namespace psz {

enum class Zone { bright, dark };

const char* to_string(Zone zone);

/// FIR models of every loudspeaker -> microphone path, per zone.
/// Indexed as (zone, m, l): microphone m, loudspeaker l, J taps each.
class PlantSet {
 public:
  PlantSet(std::size_t loudspeakers, std::size_t microphones, std::size_t taps,
           double sample_rate);

  std::size_t loudspeakers() const noexcept { return loudspeakers_; }
  std::size_t microphones() const noexcept { return microphones_; }
  std::size_t taps() const noexcept { return taps_; }
  double sample_rate() const noexcept { return sample_rate_; }

  std::span<const double> response(Zone zone, std::size_t m, std::size_t l) const;
  std::span<double> response(Zone zone, std::size_t m, std::size_t l);

  /// Throws a data error on any non-finite coefficient.
  void validate() const;

  bool operator==(const PlantSet&) const = default;

 private:
  std::size_t offset(Zone zone, std::size_t m, std::size_t l) const;

  std::size_t loudspeakers_;
  std::size_t microphones_;
  std::size_t taps_;
  double sample_rate_;
  std::vector<double> coeffs_;
};

/// Models the controller filters its references through. Defaults to an
/// exact copy of the true plants.
using PlantEstimate = PlantSet;

/// Desk-scale stand-in for measured room responses: a direct path of
/// amplitude `gain` at a random delay, followed by an exponentially decaying
/// Gaussian tail. Tap j of the tail is gain * tail_scale * decay_rate^j * g.
/// Every path is further scaled by coupling^d, d being the circular distance
/// between loudspeaker l and microphone m on a ring of max(L, M) positions.
struct SynthRirSpec {
  std::size_t taps = 128;
  std::size_t delay_min = 2;
  std::size_t delay_max = 24;
  double decay_rate = 0.95;
  double tail_scale = 0.5;
  double gain = 0.1;
  double dark_attenuation = 1.0;
  double coupling = 0.3;
  std::uint64_t seed = 1;

  void validate() const;
};

PlantSet synth_plant_set(const SynthRirSpec& spec, std::size_t loudspeakers,
                         std::size_t microphones, double sample_rate);

/// Adds Gaussian error to every response, `db_below` dB under that
/// response's RMS level.
PlantEstimate perturb_estimate(const PlantSet& truth, double db_below, std::uint64_t seed);

/// Directory layout: `{zone}_{l}_{m}.f64` raw little-endian doubles plus a
/// `plantset.meta` key=value sidecar. Indices are zero-based.
std::string plant_file_name(Zone zone, std::size_t l, std::size_t m);

void save_plant_set(const PlantSet& plants, const std::filesystem::path& dir);

/// Responses longer than `taps` are truncated (a warning is appended to
/// `warnings` when given); shorter ones are zero-padded. The sample rate is
/// read from plantset.meta when present, otherwise left at 0.
PlantSet load_plant_set(const std::filesystem::path& dir, std::size_t loudspeakers,
                        std::size_t microphones, std::size_t taps,
                        std::vector<std::string>* warnings = nullptr);

/// Pressure at microphone m: sum over loudspeakers of h_{zone,ml}^T u_l(n).
/// `drive` holds one history per loudspeaker.
double propagate(std::span<const SignalHistory> drive, const PlantSet& plants, Zone zone,
                 std::size_t m);

}  // namespace psz
