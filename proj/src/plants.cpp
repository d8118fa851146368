#include "psz/plants.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "psz/error.hpp"
#include "raw_io.hpp"

namespace psz {

const char* to_string(Zone zone) { return zone == Zone::bright ? "bright" : "dark"; }

PlantSet::PlantSet(std::size_t loudspeakers, std::size_t microphones, std::size_t taps,
                   double sample_rate)
    : loudspeakers_(loudspeakers),
      microphones_(microphones),
      taps_(taps),
      sample_rate_(sample_rate),
      coeffs_(2 * loudspeakers * microphones * taps, 0.0) {
  require(loudspeakers >= 1 && microphones >= 1 && taps >= 1, ErrorCategory::dimension,
          "plant set needs L, M, J >= 1");
}

std::size_t PlantSet::offset(Zone zone, std::size_t m, std::size_t l) const {
  require(m < microphones_ && l < loudspeakers_, ErrorCategory::dimension,
          "plant index (m=" + std::to_string(m) + ", l=" + std::to_string(l) +
              ") out of range");
  const std::size_t z = zone == Zone::bright ? 0 : 1;
  return ((z * microphones_ + m) * loudspeakers_ + l) * taps_;
}

std::span<const double> PlantSet::response(Zone zone, std::size_t m, std::size_t l) const {
  return std::span<const double>(coeffs_).subspan(offset(zone, m, l), taps_);
}

std::span<double> PlantSet::response(Zone zone, std::size_t m, std::size_t l) {
  return std::span<double>(coeffs_).subspan(offset(zone, m, l), taps_);
}

void PlantSet::validate() const {
  for (Zone zone : {Zone::bright, Zone::dark}) {
    for (std::size_t m = 0; m < microphones_; ++m) {
      for (std::size_t l = 0; l < loudspeakers_; ++l) {
        for (double c : response(zone, m, l)) {
          require(std::isfinite(c), ErrorCategory::data,
                  std::string("non-finite plant coefficient in ") + to_string(zone) + " l=" +
                      std::to_string(l) + " m=" + std::to_string(m));
        }
      }
    }
  }
}

void SynthRirSpec::validate() const {
  require(taps >= 1, ErrorCategory::config, "synthetic plants need J >= 1");
  require(delay_min <= delay_max, ErrorCategory::config, "synth delay range is empty");
  require(delay_max < taps, ErrorCategory::config,
          "synth direct delay must stay below J (delay_max=" + std::to_string(delay_max) + ")");
  require(decay_rate > 0.0 && decay_rate < 1.0, ErrorCategory::config,
          "synth decay_rate must lie in (0, 1)");
  require(std::isfinite(tail_scale) && tail_scale >= 0.0, ErrorCategory::config,
          "synth tail_scale must be finite and >= 0");
  require(std::isfinite(gain) && gain > 0.0, ErrorCategory::config, "synth gain must be > 0");
  require(std::isfinite(dark_attenuation) && dark_attenuation >= 0.0, ErrorCategory::config,
          "synth dark_attenuation must be >= 0");
  require(std::isfinite(coupling) && coupling > 0.0 && coupling <= 1.0, ErrorCategory::config,
          "synth coupling must lie in (0, 1]");
}

PlantSet synth_plant_set(const SynthRirSpec& spec, std::size_t loudspeakers,
                         std::size_t microphones, double sample_rate) {
  spec.validate();
  PlantSet plants(loudspeakers, microphones, spec.taps, sample_rate);
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> delay(spec.delay_min, spec.delay_max);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t positions = std::max(loudspeakers, microphones);
  for (Zone zone : {Zone::bright, Zone::dark}) {
    for (std::size_t m = 0; m < microphones; ++m) {
      for (std::size_t l = 0; l < loudspeakers; ++l) {
        const std::size_t gap = m > l ? m - l : l - m;
        const double distance = static_cast<double>(std::min(gap, positions - gap));
        const double zone_gain = spec.gain * std::pow(spec.coupling, distance) *
                                 (zone == Zone::dark ? spec.dark_attenuation : 1.0);
        auto h = plants.response(zone, m, l);
        const std::size_t d = delay(rng);
        h[d] = zone_gain;
        double envelope = spec.tail_scale * std::pow(spec.decay_rate, static_cast<double>(d));
        for (std::size_t j = d + 1; j < spec.taps; ++j) {
          envelope *= spec.decay_rate;
          h[j] = zone_gain * envelope * gauss(rng);
        }
      }
    }
  }
  return plants;
}

PlantEstimate perturb_estimate(const PlantSet& truth, double db_below, std::uint64_t seed) {
  require(std::isfinite(db_below), ErrorCategory::config, "perturbation level must be finite");
  PlantEstimate estimate = truth;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double rel = std::pow(10.0, -db_below / 20.0);
  for (Zone zone : {Zone::bright, Zone::dark}) {
    for (std::size_t m = 0; m < truth.microphones(); ++m) {
      for (std::size_t l = 0; l < truth.loudspeakers(); ++l) {
        auto h = estimate.response(zone, m, l);
        double energy = 0.0;
        for (double c : h) energy += c * c;
        const double sigma = rel * std::sqrt(energy / static_cast<double>(h.size()));
        for (double& c : h) c += sigma * gauss(rng);
      }
    }
  }
  return estimate;
}

std::string plant_file_name(Zone zone, std::size_t l, std::size_t m) {
  return std::string(to_string(zone)) + "_" + std::to_string(l) + "_" + std::to_string(m) +
         ".f64";
}

void save_plant_set(const PlantSet& plants, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCategory::io, "cannot create " + dir.string() + ": " + ec.message());
  for (Zone zone : {Zone::bright, Zone::dark}) {
    for (std::size_t m = 0; m < plants.microphones(); ++m) {
      for (std::size_t l = 0; l < plants.loudspeakers(); ++l) {
        write_f64_file(dir / plant_file_name(zone, l, m), plants.response(zone, m, l));
      }
    }
  }
  std::ofstream meta(dir / "plantset.meta");
  meta << "L=" << plants.loudspeakers() << "\n"
       << "M=" << plants.microphones() << "\n"
       << "J=" << plants.taps() << "\n"
       << "sample_rate=" << format_double(plants.sample_rate()) << "\n";
  require(static_cast<bool>(meta), ErrorCategory::io,
          "cannot write " + (dir / "plantset.meta").string());
}

namespace {

double read_meta_sample_rate(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "plantset.meta");
  if (!meta) return 0.0;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (line.substr(0, eq) == "sample_rate") return parse_double(line.substr(eq + 1), "sample_rate");
  }
  return 0.0;
}

}  // namespace

PlantSet load_plant_set(const std::filesystem::path& dir, std::size_t loudspeakers,
                        std::size_t microphones, std::size_t taps,
                        std::vector<std::string>* warnings) {
  PlantSet plants(loudspeakers, microphones, taps, read_meta_sample_rate(dir));
  for (Zone zone : {Zone::bright, Zone::dark}) {
    for (std::size_t m = 0; m < microphones; ++m) {
      for (std::size_t l = 0; l < loudspeakers; ++l) {
        const auto path = dir / plant_file_name(zone, l, m);
        if (!std::filesystem::exists(path)) {
          throw_error(ErrorCategory::not_found,
                      std::string("missing plant file for (zone=") + to_string(zone) +
                          ", l=" + std::to_string(l) + ", m=" + std::to_string(m) + "): " +
                          path.string());
        }
        const std::vector<double> coeffs = read_f64_file(path);
        if (coeffs.size() > taps && warnings) {
          warnings->push_back(path.filename().string() + ": " + std::to_string(coeffs.size()) +
                              " taps truncated to " + std::to_string(taps));
        }
        auto h = plants.response(zone, m, l);
        const std::size_t n = std::min(coeffs.size(), taps);
        for (std::size_t j = 0; j < n; ++j) {
          require(std::isfinite(coeffs[j]), ErrorCategory::data,
                  "non-finite coefficient at tap " + std::to_string(j) + " of " +
                      path.string());
          h[j] = coeffs[j];
        }
      }
    }
  }
  return plants;
}

double propagate(std::span<const SignalHistory> drive, const PlantSet& plants, Zone zone,
                 std::size_t m) {
  require(drive.size() == plants.loudspeakers(), ErrorCategory::dimension,
          "propagate needs one drive history per loudspeaker");
  require(m < plants.microphones(), ErrorCategory::dimension,
          "microphone index " + std::to_string(m) + " out of range");
  double p = 0.0;
  for (std::size_t l = 0; l < drive.size(); ++l) {
    p += fir_dot(drive[l].window(plants.taps()), plants.response(zone, m, l));
  }
  return p;
}

}  // namespace psz
