#pragma once

// Sample-level signal plumbing: delay lines, FIR inner products, shifted
// history matrices, filtered references and the band-limited noise source.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psz {

/// Instrumentation counters. Kernels add the number of scalar products they
/// perform; the diffusion combine step adds the scalars moved between nodes.
struct OpCounter {
  std::uint64_t mults = 0;
  std::uint64_t comm_scalars = 0;
  std::uint64_t redistributed_scalars = 0;

  void add_mults(std::uint64_t n) noexcept { mults += n; }
  OpCounter& operator+=(const OpCounter& other) noexcept;
};

/// Tap weights of an FIR filter. Never empty, always finite.
class FirTaps {
 public:
  explicit FirTaps(std::vector<double> coeffs);

  static FirTaps zeros(std::size_t length);
  static FirTaps impulse(std::size_t length, std::size_t at = 0);

  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_[i]; }

 private:
  std::vector<double> coeffs_;
};

/// Delay line that exposes its contents newest-first as a contiguous window.
/// Unwritten history reads as zero.
class SignalHistory {
 public:
  explicit SignalHistory(std::size_t capacity);

  void push(double sample) noexcept;
  void reset() noexcept;

  /// x(t), x(t-1), ..., x(t-n+1) for n <= capacity().
  std::span<const double> window(std::size_t n) const;
  double at(std::size_t delay) const { return window(delay + 1)[delay]; }

  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  // Each sample is stored twice, at head_ and head_ + capacity_, so any
  // window up to capacity_ is contiguous.
  std::vector<double> buffer_;
};

/// Capacity a history needs to serve K-windows and J x K history matrices.
inline std::size_t history_capacity(std::size_t control_taps, std::size_t plant_taps) {
  return (control_taps > plant_taps ? control_taps : plant_taps) + plant_taps - 1;
}

/// J x K matrix whose row j is the K-window delayed by j samples:
/// entry (j, k) = x(n - j - k).
class HistoryMatrix {
 public:
  HistoryMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t j, std::size_t k) const { return data_[j * cols_ + k]; }
  double& operator()(std::size_t j, std::size_t k) { return data_[j * cols_ + k]; }
  std::span<const double> row(std::size_t j) const {
    return std::span<const double>(data_).subspan(j * cols_, cols_);
  }

  /// Refill in place from the history (avoids reallocating every sample).
  void assign(const SignalHistory& history);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

double fir_dot(std::span<const double> window, std::span<const double> taps,
               OpCounter* ops = nullptr);

HistoryMatrix history_matrix(const SignalHistory& history, std::size_t plant_taps,
                             std::size_t control_taps);

/// h^T X: component k is sum_j h[j] * X(j, k).
std::vector<double> filtered_reference(const HistoryMatrix& X, std::span<const double> h);
void filtered_reference_into(const HistoryMatrix& X, std::span<const double> h,
                             std::span<double> out, OpCounter* ops = nullptr);

struct NoiseSpec {
  double sample_rate = 4000.0;
  double band_low = 100.0;
  double band_high = 1000.0;
  std::uint64_t seed = 1;
  std::size_t filter_order = 255;

  void validate() const;
};

/// Linear-phase band-pass FIR (Hamming-windowed sinc difference) with
/// unity passband gain and filter_order taps.
FirTaps design_bandpass(const NoiseSpec& spec);

/// Seeded white Gaussian noise through design_bandpass(spec), normalised to
/// unit sample variance. The filter is fully primed before the first output.
std::vector<double> bandlimited_noise(const NoiseSpec& spec, std::size_t count);

}  // namespace psz
