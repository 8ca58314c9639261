#include "rppg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "rppg/error.hpp"
#include "rppg/io_util.hpp"

namespace rppg {

namespace {

// Sums in sorted order so the result does not depend on corpus order.
double ordered_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_std(const std::vector<double>& values, double mean) {
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - mean) * (v - mean));
  return std::sqrt(ordered_mean(std::move(sq)));
}

double relative_improvement(double baseline, double quality) {
  return baseline > 0.0 ? 100.0 * (baseline - quality) / baseline : 0.0;
}

}  // namespace

std::vector<HrEstimate> groundtruth_hr(const SampleTrace& ppg,
                                       const WindowSpec& spec,
                                       const PipelineConfig& cfg) {
  cfg.validate();
  if (std::abs(ppg.fs - cfg.fs) > 1e-9 * cfg.fs)
    fail(ErrorKind::BadPipelineConfig,
         "reference PPG at " + io::format_double(ppg.fs) +
             " Hz must be downsampled to the analysis rate first");
  const SampleTrace repaired = interpolate_gaps(ppg);
  std::vector<HrEstimate> out;
  for (const auto& w : enumerate_windows(repaired, spec)) {
    const double start = ppg.t0 + w.start_s;
    HrEstimate est;
    est.window_start = start;
    if (w.gap_fraction <= kMaxWindowGapFraction) {
      try {
        est = estimate_baseline(w.samples, cfg, start);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::UnusableWindow) throw;
      }
    }
    out.push_back(est);
  }
  return out;
}

double mae(std::span<const std::optional<double>> estimates,
           std::span<const std::optional<double>> groundtruth) {
  if (estimates.size() != groundtruth.size())
    fail(ErrorKind::LengthMismatch,
         std::to_string(estimates.size()) + " estimates vs " +
             std::to_string(groundtruth.size()) + " reference values");
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!estimates[i] || !groundtruth[i]) continue;
    sum += std::abs(*estimates[i] - *groundtruth[i]);
    ++used;
  }
  if (used == 0) fail(ErrorKind::NoComparableWindows, "no window has both values");
  return sum / static_cast<double>(used);
}

double mae_for_method(std::span<const HrEstimate> estimates,
                      std::span<const HrEstimate> groundtruth, Method method) {
  std::vector<std::optional<double>> est;
  std::vector<std::optional<double>> ref;
  for (const auto& e : estimates) {
    if (e.method != method) continue;
    if (est.size() >= groundtruth.size() ||
        std::abs(groundtruth[est.size()].window_start - e.window_start) > 1e-6)
      fail(ErrorKind::LengthMismatch,
           "estimate windows do not line up with the reference at t=" +
               io::format_double(e.window_start));
    ref.push_back(groundtruth[est.size()].hr_bpm);
    est.push_back(e.hr_bpm);
  }
  if (est.size() != groundtruth.size())
    fail(ErrorKind::LengthMismatch,
         std::to_string(est.size()) + " " + std::string(to_string(method)) +
             " estimates vs " + std::to_string(groundtruth.size()) + " reference windows");
  return mae(est, ref);
}

EvaluationReport corpus_report(std::span<const VideoResult> per_video) {
  if (per_video.empty()) fail(ErrorKind::EmptyCorpus, "no videos to report");
  EvaluationReport r;
  r.per_video.assign(per_video.begin(), per_video.end());
  std::vector<double> base;
  std::vector<double> qual;
  for (const auto& v : per_video) {
    if (!(v.mae_baseline >= 0.0) || !(v.mae_quality >= 0.0))
      fail(ErrorKind::BadArguments, "MAE values must be >= 0 (video " + v.video_id + ")");
    base.push_back(v.mae_baseline);
    qual.push_back(v.mae_quality);
  }
  r.mean_baseline = ordered_mean(base);
  r.mean_quality = ordered_mean(qual);
  r.std_baseline = population_std(base, r.mean_baseline);
  r.std_quality = population_std(qual, r.mean_quality);
  r.rel_improvement_mean = relative_improvement(r.mean_baseline, r.mean_quality);
  r.rel_improvement_std = relative_improvement(r.std_baseline, r.std_quality);
  return r;
}

std::string format_report_text(const EvaluationReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %14s %14s\n", "video", "baseline [bpm]",
                "quality [bpm]");
  out += line;
  for (const auto& v : report.per_video) {
    std::snprintf(line, sizeof line, "%-24s %14.2f %14.2f\n", v.video_id.c_str(),
                  v.mae_baseline, v.mae_quality);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-24s %14.2f %14.2f   (%.1f%%)\n", "mean",
                report.mean_baseline, report.mean_quality, report.rel_improvement_mean);
  out += line;
  std::snprintf(line, sizeof line, "%-24s %14.2f %14.2f   (%.1f%%)\n", "std",
                report.std_baseline, report.std_quality, report.rel_improvement_std);
  out += line;
  return out;
}

std::string format_report_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  auto videos = nlohmann::ordered_json::array();
  for (const auto& v : report.per_video)
    videos.push_back({{"video_id", v.video_id},
                      {"mae_baseline", v.mae_baseline},
                      {"mae_quality", v.mae_quality}});
  j["per_video"] = videos;
  j["mean_baseline"] = report.mean_baseline;
  j["std_baseline"] = report.std_baseline;
  j["mean_quality"] = report.mean_quality;
  j["std_quality"] = report.std_quality;
  j["rel_improvement_mean"] = report.rel_improvement_mean;
  j["rel_improvement_std"] = report.rel_improvement_std;
  return j.dump(2) + "\n";
}

EvaluationReport parse_report_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvaluationReport r;
    for (const auto& v : j.at("per_video"))
      r.per_video.push_back({v.at("video_id").get<std::string>(),
                             v.at("mae_baseline").get<double>(),
                             v.at("mae_quality").get<double>()});
    r.mean_baseline = j.at("mean_baseline").get<double>();
    r.std_baseline = j.at("std_baseline").get<double>();
    r.mean_quality = j.at("mean_quality").get<double>();
    r.std_quality = j.at("std_quality").get<double>();
    r.rel_improvement_mean = j.at("rel_improvement_mean").get<double>();
    r.rel_improvement_std = j.at("rel_improvement_std").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::BadArguments, std::string("malformed report: ") + e.what());
  }
}

}  // namespace rppg
