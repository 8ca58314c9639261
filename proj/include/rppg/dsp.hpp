#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rppg {

struct PipelineConfig {
  double fs = 20.0;
  double detrend_span_s = 2.0;
  int ma_size = 3;
  double band_lo = 0.7;
  double band_hi = 3.0;
  // 0 selects the smallest power of two >= max(2048, 16 * window length).
  std::size_t fft_pad = 0;

  void validate() const;
  std::size_t fft_length(std::size_t window_len) const;
  // Detrend span in samples, rounded to the nearest odd integer (>= 1).
  std::size_t detrend_span_samples() const;
};

// Band-restricted one-sided periodogram.
struct PowerSpectrum {
  std::vector<double> freqs;
  std::vector<double> power;
  double df = 0.0;
  double total_power = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  double window_s = 0.0;  // analysed window length

  std::size_t size() const noexcept { return power.size(); }
};

namespace dsp {

void fft_inplace(std::vector<std::complex<double>>& data);

// Symmetric Hann taper: 0.5 - 0.5 cos(2 pi n / (N - 1)).
std::vector<double> hann(std::size_t n);

std::size_t next_pow2(std::size_t n);

/// Centered moving mean of `size` neighbours; shrinks to the available
/// samples at the edges.
std::vector<double> centered_mean(std::span<const double> x, std::size_t size);

}  // namespace dsp

std::vector<double> detrend(std::span<const double> window,
                            const PipelineConfig& cfg);

std::vector<double> moving_average(std::span<const double> window, int size);

/// Hann taper, zero padding and an ideal band mask on |X|^2.
PowerSpectrum power_spectrum(std::span<const double> window,
                             const PipelineConfig& cfg);

/// Index of the maximum-power bin; ties go to the lowest frequency.
std::size_t peak_bin(const PowerSpectrum& spectrum);

/// 60 x frequency of the strongest bin. Throws EmptySpectrum when the
/// spectrum carries no power.
double peak_hr(const PowerSpectrum& spectrum);

/// detrend -> moving_average -> power_spectrum.
PowerSpectrum process_window(std::span<const double> window,
                             const PipelineConfig& cfg);

}  // namespace rppg
