#include "psz/dsp_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "psz/error.hpp"

namespace psz {

OpCounter& OpCounter::operator+=(const OpCounter& other) noexcept {
  mults += other.mults;
  comm_scalars += other.comm_scalars;
  redistributed_scalars += other.redistributed_scalars;
  return *this;
}

FirTaps::FirTaps(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  require(!coeffs_.empty(), ErrorCategory::dimension, "FIR filter must have at least one tap");
  for (double c : coeffs_) {
    require(std::isfinite(c), ErrorCategory::data, "FIR tap is not finite");
  }
}

FirTaps FirTaps::zeros(std::size_t length) { return FirTaps(std::vector<double>(length, 0.0)); }

FirTaps FirTaps::impulse(std::size_t length, std::size_t at) {
  require(at < length, ErrorCategory::dimension, "impulse position outside the filter");
  std::vector<double> c(length, 0.0);
  c[at] = 1.0;
  return FirTaps(std::move(c));
}

SignalHistory::SignalHistory(std::size_t capacity)
    : capacity_(capacity), buffer_(2 * capacity, 0.0) {
  require(capacity > 0, ErrorCategory::dimension, "signal history needs a positive capacity");
}

void SignalHistory::push(double sample) noexcept {
  head_ = head_ == 0 ? capacity_ - 1 : head_ - 1;
  buffer_[head_] = sample;
  buffer_[head_ + capacity_] = sample;
}

void SignalHistory::reset() noexcept {
  std::fill(buffer_.begin(), buffer_.end(), 0.0);
  head_ = 0;
}

std::span<const double> SignalHistory::window(std::size_t n) const {
  require(n <= capacity_, ErrorCategory::dimension,
          "window of " + std::to_string(n) + " exceeds history capacity " +
              std::to_string(capacity_));
  return std::span<const double>(buffer_).subspan(head_, n);
}

HistoryMatrix::HistoryMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  require(rows > 0 && cols > 0, ErrorCategory::dimension, "history matrix needs J, K > 0");
}

void HistoryMatrix::assign(const SignalHistory& history) {
  require(history.capacity() >= rows_ + cols_ - 1, ErrorCategory::dimension,
          "history capacity " + std::to_string(history.capacity()) + " is below J + K - 1 = " +
              std::to_string(rows_ + cols_ - 1));
  auto x = history.window(rows_ + cols_ - 1);
  for (std::size_t j = 0; j < rows_; ++j) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(j), cols_,
                data_.begin() + static_cast<std::ptrdiff_t>(j * cols_));
  }
}

double fir_dot(std::span<const double> window, std::span<const double> taps, OpCounter* ops) {
  require(window.size() == taps.size(), ErrorCategory::dimension,
          "fir_dot length mismatch: window " + std::to_string(window.size()) + " vs taps " +
              std::to_string(taps.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) acc += window[i] * taps[i];
  if (ops) ops->add_mults(taps.size());
  return acc;
}

HistoryMatrix history_matrix(const SignalHistory& history, std::size_t plant_taps,
                             std::size_t control_taps) {
  HistoryMatrix X(plant_taps, control_taps);
  X.assign(history);
  return X;
}

void filtered_reference_into(const HistoryMatrix& X, std::span<const double> h,
                             std::span<double> out, OpCounter* ops) {
  require(h.size() == X.rows(), ErrorCategory::dimension,
          "filtered reference: plant length " + std::to_string(h.size()) +
              " does not match history rows " + std::to_string(X.rows()));
  require(out.size() == X.cols(), ErrorCategory::dimension,
          "filtered reference: output length does not match K");
  std::fill(out.begin(), out.end(), 0.0);
  // Accumulates over j in ascending order for every k, the same order a
  // J-tap fir_dot uses, so the recursive reference path is bit-identical.
  for (std::size_t j = 0; j < X.rows(); ++j) {
    const double hj = h[j];
    auto row = X.row(j);
    for (std::size_t k = 0; k < X.cols(); ++k) out[k] += hj * row[k];
  }
  if (ops) ops->add_mults(X.rows() * X.cols());
}

std::vector<double> filtered_reference(const HistoryMatrix& X, std::span<const double> h) {
  std::vector<double> out(X.cols());
  filtered_reference_into(X, h, out);
  return out;
}

void NoiseSpec::validate() const {
  require(sample_rate > 0.0, ErrorCategory::config, "noise sample rate must be positive");
  require(band_low > 0.0 && band_low < band_high && band_high < sample_rate / 2.0,
          ErrorCategory::config,
          "noise band must satisfy 0 < low < high < fs/2 (got " + std::to_string(band_low) +
              ".." + std::to_string(band_high) + " at fs " + std::to_string(sample_rate) + ")");
  require(filter_order >= 1, ErrorCategory::config, "band-pass filter needs at least one tap");
}

FirTaps design_bandpass(const NoiseSpec& spec) {
  spec.validate();
  const std::size_t n = spec.filter_order;
  const double centre = (static_cast<double>(n) - 1.0) / 2.0;
  const double lo = spec.band_low / spec.sample_rate;
  const double hi = spec.band_high / spec.sample_rate;
  auto lowpass = [](double fc, double t) {
    if (t == 0.0) return 2.0 * fc;
    return std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
  };
  std::vector<double> taps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - centre;
    const double window =
        n == 1 ? 1.0
               : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(n - 1));
    taps[i] = window * (lowpass(hi, t) - lowpass(lo, t));
  }
  return FirTaps(std::move(taps));
}

std::vector<double> bandlimited_noise(const NoiseSpec& spec, std::size_t count) {
  const FirTaps filter = design_bandpass(spec);
  if (count == 0) return {};

  const std::size_t taps = filter.size();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> white(count + taps - 1);
  for (double& v : white) v = gauss(rng);

  // out[n] = sum_i taps[i] * white[n + taps - 1 - i]
  std::vector<double> out(count);
  auto h = filter.coeffs();
  for (std::size_t n = 0; n < count; ++n) {
    double acc = 0.0;
    const double* newest = white.data() + n + taps - 1;
    for (std::size_t i = 0; i < taps; ++i) acc += h[i] * *(newest - i);
    out[n] = acc;
  }

  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  var /= static_cast<double>(count);
  if (var > 0.0) {
    const double scale = 1.0 / std::sqrt(var);
    for (double& v : out) v *= scale;
  }
  return out;
}

}  // namespace psz
