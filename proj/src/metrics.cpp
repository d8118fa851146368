#include "psz/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psz/error.hpp"

namespace psz {

DbValue ratio_db(double numerator, double denominator, double on_zero_denominator) {
  if (!(denominator > 0.0)) return {on_zero_denominator, false};
  if (!(numerator > 0.0)) return {kDbFloor, true};
  const double db = 10.0 * std::log10(numerator / denominator);
  return {std::clamp(db, kDbFloor, kDbCeiling), true};
}

namespace {

void check_block(std::span<const double> a, std::span<const double> b, std::size_t microphones) {
  require(microphones > 0, ErrorCategory::dimension, "metric needs at least one microphone");
  require(a.size() == b.size() && a.size() % microphones == 0, ErrorCategory::dimension,
          "metric inputs must be equal-length blocks of M-vectors");
}

}  // namespace

DbValue mse_db(std::span<const double> bright, std::span<const double> target,
               std::size_t microphones) {
  check_block(bright, target, microphones);
  double error = 0.0;
  double reference = 0.0;
  for (std::size_t i = 0; i < bright.size(); ++i) {
    const double e = bright[i] - target[i];
    error += e * e;
    reference += target[i] * target[i];
  }
  return ratio_db(error, reference, kDbFloor);
}

DbValue ac_db(std::span<const double> bright, std::span<const double> dark,
              std::size_t microphones) {
  check_block(bright, dark, microphones);
  double b = 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < bright.size(); ++i) {
    b += bright[i] * bright[i];
    d += dark[i] * dark[i];
  }
  return ratio_db(b, d, kDbCeiling);
}

MetricMeter::MetricMeter(std::size_t microphones, std::size_t window)
    : microphones_(microphones),
      window_(window),
      error_energy_(window, 0.0),
      target_energy_(window, 0.0),
      bright_energy_(window, 0.0),
      dark_energy_(window, 0.0) {
  require(window >= 1, ErrorCategory::config, "metric window must be at least one sample");
  require(microphones >= 1, ErrorCategory::dimension, "metric needs at least one microphone");
}

void MetricMeter::push(std::span<const double> bright, std::span<const double> target,
                       std::span<const double> dark) {
  require(bright.size() == microphones_ && target.size() == microphones_ &&
              dark.size() == microphones_,
          ErrorCategory::dimension, "metric sample must be an M-vector per zone");
  double e = 0.0, t = 0.0, b = 0.0, d = 0.0;
  for (std::size_t m = 0; m < microphones_; ++m) {
    const double diff = bright[m] - target[m];
    e += diff * diff;
    t += target[m] * target[m];
    b += bright[m] * bright[m];
    d += dark[m] * dark[m];
  }
  error_energy_[next_] = e;
  target_energy_[next_] = t;
  bright_energy_[next_] = b;
  dark_energy_[next_] = d;
  next_ = (next_ + 1) % window_;
  filled_ = std::min(filled_ + 1, window_);
}

// Summed afresh each time so exact zeros stay exact (no running-sum drift).
double MetricMeter::sum(const std::vector<double>& ring) const {
  double s = 0.0;
  for (std::size_t i = 0; i < filled_; ++i) s += ring[i];
  return s;
}

DbValue MetricMeter::mse() const {
  return ratio_db(sum(error_energy_), sum(target_energy_), kDbFloor);
}

DbValue MetricMeter::ac() const {
  return ratio_db(sum(bright_energy_), sum(dark_energy_), kDbCeiling);
}

namespace {

std::size_t portion(std::size_t n, double fraction) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCategory::config,
          "fraction must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(count, 1, n);
}

}  // namespace

SteadyState steady_state(const LearningCurve& curve, double fraction) {
  require(!curve.points.empty(), ErrorCategory::data, "steady state of an empty curve");
  const std::size_t n = curve.points.size();
  const std::size_t tail = portion(n, fraction);
  SteadyState s;
  for (std::size_t i = n - tail; i < n; ++i) {
    s.mse_db += curve.points[i].mse_db;
    s.ac_db += curve.points[i].ac_db;
  }
  s.mse_db /= static_cast<double>(tail);
  s.ac_db /= static_cast<double>(tail);
  return s;
}

double initial_mse_db(const LearningCurve& curve, double fraction) {
  require(!curve.points.empty(), ErrorCategory::data, "initial level of an empty curve");
  const std::size_t head = portion(curve.points.size(), fraction);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < head; ++i) {
    if (!curve.points[i].mse_defined) continue;
    sum += curve.points[i].mse_db;
    ++used;
  }
  require(used > 0, ErrorCategory::data, "no defined MSE values in the leading portion");
  return sum / static_cast<double>(used);
}

const char* to_string(DiffusionVariant variant) {
  return variant == DiffusionVariant::full ? "full" : "efficient";
}

std::uint64_t predicted_mults(DiffusionVariant variant, std::size_t plant_taps,
                              std::size_t control_taps, std::size_t nodes,
                              std::size_t neighborhood) {
  const std::uint64_t blocks = variant == DiffusionVariant::full ? nodes : neighborhood;
  return 2 * ((static_cast<std::uint64_t>(plant_taps) + 1) * control_taps * blocks + 1);
}

std::uint64_t predicted_comm(DiffusionVariant variant, std::size_t control_taps,
                             std::size_t nodes, const Topology& topology) {
  const std::uint64_t k = control_taps;
  const std::uint64_t l = nodes;
  if (variant == DiffusionVariant::full) return k * l * l * (l - (l > 0 ? 1 : 0));
  return k * topology.directed_links();
}

std::string to_text(const ComplexityReport& report) {
  std::ostringstream out;
  out << "variant=" << report.variant << "\n";
  out << "reference_mode=" << report.reference_mode << "\n";
  out << "iterations=" << report.iterations << "\n";
  for (std::size_t m = 0; m < report.mults_per_node_per_iter.size(); ++m) {
    out << "mults_per_node_per_iter." << m << "=" << report.mults_per_node_per_iter[m] << "\n";
  }
  for (std::size_t m = 0; m < report.measured_mults.size(); ++m) {
    out << "measured_mults." << m << "=" << report.measured_mults[m] << "\n";
  }
  out << "comm_scalars_per_iter_network=" << report.comm_scalars_per_iter_network << "\n";
  out << "measured_comm=" << report.measured_comm << "\n";
  out << "redistributed_per_iter=" << report.redistributed_per_iter << "\n";
  return out.str();
}

}  // namespace psz
