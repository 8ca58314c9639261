#include "rppg/quality.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "rppg/error.hpp"
#include "rppg/io_util.hpp"

namespace rppg {

namespace {

void require_power(const PowerSpectrum& spectrum) {
  if (spectrum.power.empty() || !(spectrum.total_power > 0.0))
    fail(ErrorKind::EmptySpectrum, "spectrum carries no power");
}

std::optional<Orientation> parse_orientation(std::string_view text) {
  if (text == "higher-better") return Orientation::HigherBetter;
  if (text == "lower-better") return Orientation::LowerBetter;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Orientation o) {
  return o == Orientation::HigherBetter ? "higher-better" : "lower-better";
}

void CalibrationParams::validate() const {
  const FeatureStats* all[] = {&snr, &bw, &rp};
  for (const auto* s : all) {
    if (!std::isfinite(s->mu) || !std::isfinite(s->sigma) || !(s->sigma > 0.0))
      fail(ErrorKind::BadCalibration, "calibration needs finite mu and sigma > 0");
  }
  if (snr.orientation != Orientation::HigherBetter ||
      bw.orientation != Orientation::LowerBetter ||
      rp.orientation != Orientation::HigherBetter)
    fail(ErrorKind::BadCalibration,
         "orientations are fixed: snr higher-better, bw lower-better, rp higher-better");
}

double snr_feature(const PowerSpectrum& spectrum, double half_width) {
  require_power(spectrum);
  const double f_peak = spectrum.freqs[peak_bin(spectrum)];
  const double tol = half_width + 1e-9 * spectrum.df;
  double signal = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = spectrum.freqs[k];
    for (int h = 1; h <= 3; ++h) {
      if (std::abs(f - h * f_peak) <= tol) {
        signal += spectrum.power[k];
        break;
      }
    }
  }
  const double rest = spectrum.total_power - signal;
  return signal / std::max(rest, kSnrFloor);
}

double harmonic_half_width(const PowerSpectrum& spectrum) {
  return spectrum.window_s > 0.0 ? kHarmonicHalfWidthCycles / spectrum.window_s
                                 : kHarmonicHalfWidthHz;
}

double snr_feature(const PowerSpectrum& spectrum) {
  return snr_feature(spectrum, harmonic_half_width(spectrum));
}

double bw99_feature(const PowerSpectrum& spectrum, double fraction) {
  require_power(spectrum);
  const std::size_t n = spectrum.size();
  const double target = fraction * spectrum.total_power;
  std::size_t lo = peak_bin(spectrum);
  std::size_t hi = lo;
  double held = spectrum.power[lo];
  while (held < target && (lo > 0 || hi + 1 < n)) {
    if (lo > 0) held += spectrum.power[--lo];
    if (hi + 1 < n) held += spectrum.power[++hi];
  }
  const double width = static_cast<double>(hi - lo + 1) * spectrum.df;
  return std::min(width, spectrum.band_hi - spectrum.band_lo);
}

double ratio_peaks_feature(const PowerSpectrum& spectrum, double min_separation) {
  require_power(spectrum);
  const auto& p = spectrum.power;
  const std::size_t n = p.size();
  std::vector<std::size_t> peaks;
  for (std::size_t k = 0; k < n; ++k) {
    const bool above_left = k == 0 || p[k] > p[k - 1];
    const bool above_right = k + 1 == n || p[k] > p[k + 1];
    if (n > 1 && above_left && above_right) peaks.push_back(k);
  }
  if (peaks.empty()) return 1.0;

  std::size_t first = peaks.front();
  for (auto k : peaks)
    if (p[k] > p[first]) first = k;

  std::optional<std::size_t> second;
  const double tol = 1e-9 * spectrum.df;
  for (auto k : peaks) {
    if (std::abs(spectrum.freqs[k] - spectrum.freqs[first]) + tol < min_separation)
      continue;
    if (!second || p[k] > p[*second]) second = k;
  }
  if (!second || !(p[*second] > 0.0)) return kRatioPeaksCap;
  return std::min(p[first] / p[*second], kRatioPeaksCap);
}

QualityFeatures extract_features(const PowerSpectrum& spectrum) {
  return {snr_feature(spectrum), bw99_feature(spectrum),
          ratio_peaks_feature(spectrum)};
}

double tanh_normalize(double x, double mu, double sigma, Orientation orientation,
                      double slope) {
  const double z = orientation == Orientation::HigherBetter ? (x - mu) / sigma
                                                             : (mu - x) / sigma;
  return 0.5 * (std::tanh(slope * z) + 1.0);
}

QualityScore quality_score(const QualityFeatures& f, const CalibrationParams& cal) {
  QualityScore score;
  score.normalized[0] = tanh_normalize(f.snr, cal.snr.mu, cal.snr.sigma, cal.snr.orientation);
  score.normalized[1] = tanh_normalize(f.bw, cal.bw.mu, cal.bw.sigma, cal.bw.orientation);
  score.normalized[2] =
      tanh_normalize(std::log(f.rp), cal.rp.mu, cal.rp.sigma, cal.rp.orientation);
  score.q = (score.normalized[0] + score.normalized[1] + score.normalized[2]) / 3.0;
  return score;
}

CalibrationParams parse_calibration(std::string_view text) {
  CalibrationParams cal;
  bool seen[3] = {false, false, false};
  for (auto raw : io::split_lines(text)) {
    const auto line = io::trim(raw);
    if (line.empty() || line.front() == '#' || line == "feature,mu,sigma,orientation")
      continue;
    const auto fields = io::split(line, ',');
    if (fields.size() != 4)
      fail(ErrorKind::BadCalibration, "calibration row needs 4 fields: " + std::string(line));
    const auto name = io::trim(fields[0]);
    int slot = name == "snr" ? 0 : name == "bw" ? 1 : name == "rp" ? 2 : -1;
    if (slot < 0) fail(ErrorKind::BadCalibration, "unknown feature " + std::string(name));
    if (seen[slot]) fail(ErrorKind::BadCalibration, "duplicate feature " + std::string(name));
    seen[slot] = true;
    const auto mu = io::parse_double(fields[1]);
    const auto sigma = io::parse_double(fields[2]);
    const auto orientation = parse_orientation(io::trim(fields[3]));
    if (!mu || !sigma || !orientation)
      fail(ErrorKind::BadCalibration, "bad calibration row: " + std::string(line));
    FeatureStats& stats = slot == 0 ? cal.snr : slot == 1 ? cal.bw : cal.rp;
    stats = {*mu, *sigma, *orientation};
  }
  if (!seen[0] || !seen[1] || !seen[2])
    fail(ErrorKind::BadCalibration, "calibration needs snr, bw and rp rows");
  cal.validate();
  return cal;
}

std::string format_calibration(const CalibrationParams& cal) {
  std::string out;
  auto row = [&](std::string_view name, const FeatureStats& s) {
    out += name;
    out += ',' + io::format_double(s.mu) + ',' + io::format_double(s.sigma) + ',';
    out += to_string(s.orientation);
    out += '\n';
  };
  row("snr", cal.snr);
  row("bw", cal.bw);
  row("rp", cal.rp);
  return out;
}

CalibrationParams read_calibration(const std::filesystem::path& path) {
  return parse_calibration(io::read_file(path));
}

void write_calibration(const std::filesystem::path& path,
                       const CalibrationParams& cal) {
  cal.validate();
  io::write_file_atomic(path, format_calibration(cal));
}

CalibrationParams default_calibration() {
  // Output of `rppg calibrate` on the reference manifest; see
  // data/calibration_default.csv.
  return {
      {3.0154590629963107, 1.130139361195683, Orientation::HigherBetter},
      {1.5671462342797258, 0.6574795449533497, Orientation::LowerBetter},
      {2.9673963790808746, 2.0885260528601295, Orientation::HigherBetter},
  };
}

}  // namespace rppg
