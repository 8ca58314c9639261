#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include "rppg/dsp.hpp"

namespace rppg {

struct QualityFeatures {
  double snr = 0.0;  // harmonic power over residual power
  double bw = 0.0;   // Hz holding 99% of the in-band power around the peak
  double rp = 1.0;   // highest peak over second highest peak
};

enum class Orientation { HigherBetter, LowerBetter };

std::string_view to_string(Orientation o);

struct FeatureStats {
  double mu = 0.0;
  double sigma = 1.0;
  Orientation orientation = Orientation::HigherBetter;
};

// Normalization statistics. The rp entry describes log(rp).
struct CalibrationParams {
  FeatureStats snr{0.0, 1.0, Orientation::HigherBetter};
  FeatureStats bw{0.0, 1.0, Orientation::LowerBetter};
  FeatureStats rp{0.0, 1.0, Orientation::HigherBetter};

  void validate() const;
};

struct QualityScore {
  double q = 0.0;
  std::array<double, 3> normalized{};  // snr, bw, rp
};

inline constexpr double kHarmonicHalfWidthHz = 0.1;
// Harmonic half-width in units of the window's frequency resolution (1/T):
// 0.1 Hz for a 7 s window, wider for shorter ones.
inline constexpr double kHarmonicHalfWidthCycles = 0.7;
inline constexpr double kSnrFloor = 1e-12;
inline constexpr double kBandwidthFraction = 0.99;
inline constexpr double kMinPeakSeparationHz = 0.2;
inline constexpr double kRatioPeaksCap = 1e6;
inline constexpr double kTanhSlope = 0.5;
inline constexpr double kSigmaFloor = 1e-6;

/// Power within +-half_width of the peak and its 2nd and 3rd harmonics,
/// divided by the remaining in-band power. Harmonics above the band add
/// nothing.
double snr_feature(const PowerSpectrum& spectrum, double half_width);

/// kHarmonicHalfWidthCycles / window_s, or kHarmonicHalfWidthHz when the
/// spectrum does not record its window length.
double harmonic_half_width(const PowerSpectrum& spectrum);

/// snr_feature at harmonic_half_width(spectrum).
double snr_feature(const PowerSpectrum& spectrum);

/// Width of the bin interval grown symmetrically from the peak until it
/// holds `fraction` of the total power.
double bw99_feature(const PowerSpectrum& spectrum,
                    double fraction = kBandwidthFraction);

/// Ratio of the two highest strict local maxima at least `min_separation`
/// apart. kRatioPeaksCap when there is no second peak, 1 when the spectrum
/// has no local maximum at all.
double ratio_peaks_feature(const PowerSpectrum& spectrum,
                           double min_separation = kMinPeakSeparationHz);

QualityFeatures extract_features(const PowerSpectrum& spectrum);

/// 0.5 * (tanh(slope * z) + 1) with z oriented so larger means better.
double tanh_normalize(double x, double mu, double sigma, Orientation orientation,
                      double slope = kTanhSlope);

QualityScore quality_score(const QualityFeatures& features,
                           const CalibrationParams& cal);

// Calibration file: rows "feature,mu,sigma,orientation" for snr, bw, rp.
CalibrationParams parse_calibration(std::string_view text);
std::string format_calibration(const CalibrationParams& cal);
CalibrationParams read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path,
                       const CalibrationParams& cal);

/// Statistics produced by `calibrate` over the seeded reference corpus
/// (see simulator.hpp: default_reference_manifest).
CalibrationParams default_calibration();

}  // namespace rppg
