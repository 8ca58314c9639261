#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rppg/dsp.hpp"
#include "rppg/estimator.hpp"
#include "rppg/trace.hpp"

namespace rppg {

struct VideoResult {
  std::string video_id;
  double mae_baseline = 0.0;
  double mae_quality = 0.0;

  friend bool operator==(const VideoResult&, const VideoResult&) = default;
};

struct EvaluationReport {
  std::vector<VideoResult> per_video;
  double mean_baseline = 0.0;
  double std_baseline = 0.0;
  double mean_quality = 0.0;
  double std_quality = 0.0;
  double rel_improvement_mean = 0.0;  // percent
  double rel_improvement_std = 0.0;   // percent

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Reference HR per window: the baseline spectral estimator applied to the
/// reference PPG over the same windows. ppg must already be at cfg.fs.
std::vector<HrEstimate> groundtruth_hr(const SampleTrace& ppg,
                                       const WindowSpec& spec,
                                       const PipelineConfig& cfg);

/// Mean |est - gt| over pairs where both sides hold a value.
double mae(std::span<const std::optional<double>> estimates,
           std::span<const std::optional<double>> groundtruth);

/// Picks the rows of `method` from an estimate stream and scores them
/// against the reference windows, matched by window start.
double mae_for_method(std::span<const HrEstimate> estimates,
                      std::span<const HrEstimate> groundtruth, Method method);

/// Population mean/std across videos and relative improvements in percent.
EvaluationReport corpus_report(std::span<const VideoResult> per_video);

std::string format_report_text(const EvaluationReport& report);
std::string format_report_json(const EvaluationReport& report);
EvaluationReport parse_report_json(std::string_view text);

}  // namespace rppg
