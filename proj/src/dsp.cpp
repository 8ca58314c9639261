#include "rppg/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rppg/error.hpp"

namespace rppg {

void PipelineConfig::validate() const {
  if (!(fs > 0.0)) fail(ErrorKind::BadPipelineConfig, "fs must be > 0");
  if (!(detrend_span_s > 0.0))
    fail(ErrorKind::BadPipelineConfig, "detrend span must be > 0");
  if (ma_size < 1 || ma_size % 2 == 0)
    fail(ErrorKind::BadPipelineConfig, "moving-average size must be odd and >= 1");
  if (!(band_lo >= 0.0 && band_lo < band_hi && band_hi < fs / 2.0))
    fail(ErrorKind::BadPipelineConfig, "band must satisfy 0 <= lo < hi < fs/2");
}

std::size_t PipelineConfig::fft_length(std::size_t window_len) const {
  if (fft_pad != 0) {
    if (fft_pad < window_len)
      fail(ErrorKind::BadPipelineConfig, "fft_pad shorter than the window");
    if ((fft_pad & (fft_pad - 1)) != 0)
      fail(ErrorKind::BadPipelineConfig, "fft_pad must be a power of two");
    return fft_pad;
  }
  return dsp::next_pow2(std::max<std::size_t>(2048, 16 * window_len));
}

std::size_t PipelineConfig::detrend_span_samples() const {
  const double span = detrend_span_s * fs;
  const double half = std::round((span - 1.0) / 2.0);
  return half <= 0.0 ? 1 : static_cast<std::size_t>(2.0 * half + 1.0);
}

namespace dsp {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if ((n & (n - 1)) != 0)
    fail(ErrorKind::BadPipelineConfig, "fft length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  // Twiddles evaluated directly rather than by recurrence to keep the error
  // at a few ulps for long transforms.
  std::vector<std::complex<double>> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + half] * twiddle[j * step];
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  return w;
}

std::vector<double> centered_mean(std::span<const double> x, std::size_t size) {
  const std::size_t n = x.size();
  const std::size_t half = size / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += x[k];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace dsp

std::vector<double> detrend(std::span<const double> window,
                            const PipelineConfig& cfg) {
  if (window.size() < 2)
    fail(ErrorKind::WindowTooShort, "detrend needs at least 2 samples");
  // Work relative to the first sample so a constant input cancels exactly.
  const double ref = window.front();
  std::vector<double> shifted(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) shifted[i] = window[i] - ref;
  const auto trend = dsp::centered_mean(shifted, cfg.detrend_span_samples());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] -= trend[i];
  return shifted;
}

std::vector<double> moving_average(std::span<const double> window, int size) {
  if (size < 1 || size % 2 == 0 || static_cast<std::size_t>(size) > window.size())
    fail(ErrorKind::BadSize, "moving-average size " + std::to_string(size) +
                                 " invalid for window of " +
                                 std::to_string(window.size()));
  return dsp::centered_mean(window, static_cast<std::size_t>(size));
}

PowerSpectrum power_spectrum(std::span<const double> window,
                             const PipelineConfig& cfg) {
  cfg.validate();
  const std::size_t n = window.size();
  if (n < 3 || static_cast<double>(n) + 1e-9 < 2.0 * cfg.fs)
    fail(ErrorKind::WindowTooShort,
         "spectrum needs at least 2 s of samples, got " + std::to_string(n));

  const std::size_t nfft = cfg.fft_length(n);
  const auto taper = dsp::hann(n);
  double taper_energy = 0.0;
  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i] = {window[i] * taper[i], 0.0};
    taper_energy += taper[i] * taper[i];
  }
  dsp::fft_inplace(buf);

  PowerSpectrum out;
  out.df = cfg.fs / static_cast<double>(nfft);
  out.band_lo = cfg.band_lo;
  out.band_hi = cfg.band_hi;
  out.window_s = static_cast<double>(n) / cfg.fs;
  const double scale = 2.0 / (cfg.fs * taper_energy);
  const auto k_lo = static_cast<std::size_t>(std::ceil(cfg.band_lo / out.df - 1e-9));
  const auto k_hi = static_cast<std::size_t>(std::floor(cfg.band_hi / out.df + 1e-9));
  for (std::size_t k = k_lo; k <= k_hi && k <= nfft / 2; ++k) {
    out.freqs.push_back(static_cast<double>(k) * out.df);
    out.power.push_back(std::norm(buf[k]) * scale);
    out.total_power += out.power.back();
  }
  return out;
}

std::size_t peak_bin(const PowerSpectrum& spectrum) {
  if (spectrum.power.empty()) fail(ErrorKind::EmptySpectrum, "spectrum has no bins");
  std::size_t best = 0;
  for (std::size_t k = 1; k < spectrum.power.size(); ++k)
    if (spectrum.power[k] > spectrum.power[best]) best = k;
  return best;
}

double peak_hr(const PowerSpectrum& spectrum) {
  if (!(spectrum.total_power > 0.0))
    fail(ErrorKind::EmptySpectrum, "spectrum carries no power");
  return 60.0 * spectrum.freqs[peak_bin(spectrum)];
}

PowerSpectrum process_window(std::span<const double> window,
                             const PipelineConfig& cfg) {
  const auto detrended = detrend(window, cfg);
  const auto smoothed = moving_average(detrended, cfg.ma_size);
  return power_spectrum(smoothed, cfg);
}

}  // namespace rppg
