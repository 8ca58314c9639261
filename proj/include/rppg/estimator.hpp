#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rppg/dsp.hpp"
#include "rppg/quality.hpp"
#include "rppg/trace.hpp"

namespace rppg {

struct WindowSpec {
  double window_s = 7.0;
  double stride_s = 1.0;
  std::vector<double> subwindow_s{5.0, 6.0, 7.0};
  double substride_s = 2.0;

  void validate() const;
};

// A T-second slice of a trace, addressed in samples.
struct Window {
  double start_s = 0.0;
  std::size_t first = 0;
  std::span<const double> samples;
  double gap_fraction = 0.0;
};

// Candidate segment inside a window; offsets are relative to the window.
struct Subwindow {
  double length_s = 0.0;
  double offset_s = 0.0;
  std::size_t first = 0;
  std::size_t size = 0;
};

enum class Method { Baseline, Quality };
enum class MethodSelection { Baseline, Quality, Both };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view text);
std::optional<MethodSelection> parse_method_selection(std::string_view text);
std::string_view to_string(MethodSelection m);

struct HrEstimate {
  double window_start = 0.0;
  Method method = Method::Baseline;
  std::optional<double> hr_bpm;  // empty for an unusable window
  std::optional<double> q;
  std::optional<double> sub_start;  // absolute seconds
  std::optional<double> sub_len;

  bool usable() const noexcept { return hr_bpm.has_value(); }
  friend bool operator==(const HrEstimate&, const HrEstimate&) = default;
};

struct SubwindowScore {
  Subwindow sub;
  std::optional<QualityScore> score;  // empty when the PSD carries no power
  PowerSpectrum spectrum;
};

inline constexpr double kMaxWindowGapFraction = 0.2;

std::size_t seconds_to_samples(double seconds, double fs);

/// Windows start at 0, d, 2d, ... while start + T fits in the trace.
std::vector<Window> enumerate_windows(const SampleTrace& trace,
                                      const WindowSpec& spec);

/// Ascending T', then ascending offset.
std::vector<Subwindow> enumerate_subwindows(std::size_t window_len, double fs,
                                            const WindowSpec& spec);
std::vector<Subwindow> enumerate_subwindows(const Window& window, double fs,
                                            const WindowSpec& spec);

HrEstimate estimate_baseline(std::span<const double> window,
                             const PipelineConfig& cfg, double window_start = 0.0);

std::vector<SubwindowScore> score_subwindows(std::span<const double> window,
                                             const WindowSpec& spec,
                                             const PipelineConfig& cfg,
                                             const CalibrationParams& cal);

/// Runs the pipeline on every subwindow, keeps the one with the highest Q
/// (earliest on ties) and reads HR from it.
HrEstimate estimate_quality_based(std::span<const double> window,
                                  const WindowSpec& spec,
                                  const PipelineConfig& cfg,
                                  const CalibrationParams& cal,
                                  double window_start = 0.0);

/// Whole-trace driver. Gaps are repaired first; windows whose gap density
/// exceeds kMaxWindowGapFraction, or whose spectrum is empty, are emitted
/// without an HR. Rows are ordered by window start, baseline before quality.
std::vector<HrEstimate> estimate_trace(const SampleTrace& trace,
                                       const WindowSpec& spec,
                                       const PipelineConfig& cfg,
                                       const CalibrationParams& cal,
                                       MethodSelection methods = MethodSelection::Both);

// Estimates CSV: window_start_s,method,hr_bpm,q,sub_start_s,sub_len_s
std::string format_estimates_csv(std::span<const HrEstimate> estimates);
std::vector<HrEstimate> parse_estimates_csv(std::string_view text);
void write_estimates_csv(const std::filesystem::path& path,
                         std::span<const HrEstimate> estimates);
std::vector<HrEstimate> read_estimates_csv(const std::filesystem::path& path);

}  // namespace rppg
