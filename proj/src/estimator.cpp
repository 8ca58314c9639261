#include "rppg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rppg/error.hpp"
#include "rppg/io_util.hpp"

namespace rppg {

namespace {

constexpr std::string_view kEstimatesHeader =
    "window_start_s,method,hr_bpm,q,sub_start_s,sub_len_s";

std::string optional_field(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string();
}

std::optional<double> parse_optional(std::string_view field, std::size_t line_no) {
  field = io::trim(field);
  if (field.empty()) return std::nullopt;
  auto v = io::parse_double(field);
  if (!v)
    fail(ErrorKind::MalformedEstimates,
         "non-numeric field on line " + std::to_string(line_no));
  return v;
}

}  // namespace

void WindowSpec::validate() const {
  if (!(window_s > 0.0) || !(stride_s > 0.0) || !(substride_s > 0.0))
    fail(ErrorKind::BadWindowSpec, "window, stride and substride must be > 0");
  if (subwindow_s.empty())
    fail(ErrorKind::BadWindowSpec, "at least one subwindow length is required");
  for (double t : subwindow_s)
    if (!(t > 0.0) || t > window_s + 1e-9)
      fail(ErrorKind::BadWindowSpec, "subwindow lengths must lie in (0, T]");
}

std::string_view to_string(Method m) {
  return m == Method::Baseline ? "baseline" : "quality";
}

std::optional<Method> parse_method(std::string_view text) {
  if (text == "baseline") return Method::Baseline;
  if (text == "quality") return Method::Quality;
  return std::nullopt;
}

std::optional<MethodSelection> parse_method_selection(std::string_view text) {
  if (text == "baseline") return MethodSelection::Baseline;
  if (text == "quality") return MethodSelection::Quality;
  if (text == "both") return MethodSelection::Both;
  return std::nullopt;
}

std::string_view to_string(MethodSelection m) {
  switch (m) {
    case MethodSelection::Baseline: return "baseline";
    case MethodSelection::Quality: return "quality";
    case MethodSelection::Both: return "both";
  }
  return "both";
}

std::size_t seconds_to_samples(double seconds, double fs) {
  return static_cast<std::size_t>(std::llround(seconds * fs));
}

std::vector<Window> enumerate_windows(const SampleTrace& trace,
                                      const WindowSpec& spec) {
  spec.validate();
  const std::size_t len = seconds_to_samples(spec.window_s, trace.fs);
  if (len == 0 || trace.size() < len)
    fail(ErrorKind::TraceTooShort,
         "trace too short: " + io::format_double(trace.duration()) +
             " s available, window needs " + io::format_double(spec.window_s) + " s");
  std::vector<Window> windows;
  for (std::size_t k = 0;; ++k) {
    const double start_s = static_cast<double>(k) * spec.stride_s;
    const std::size_t first = seconds_to_samples(start_s, trace.fs);
    if (first + len > trace.size()) break;
    Window w;
    w.start_s = start_s;
    w.first = first;
    w.samples = std::span<const double>(trace.samples).subspan(first, len);
    std::size_t gaps = 0;
    for (std::size_t i = first; i < first + len; ++i) gaps += trace.gap_mask[i];
    w.gap_fraction = static_cast<double>(gaps) / static_cast<double>(len);
    windows.push_back(w);
  }
  return windows;
}

std::vector<Subwindow> enumerate_subwindows(std::size_t window_len, double fs,
                                            const WindowSpec& spec) {
  spec.validate();
  std::vector<double> lengths = spec.subwindow_s;
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  std::vector<Subwindow> subs;
  for (double t_prime : lengths) {
    const std::size_t size = seconds_to_samples(t_prime, fs);
    if (size == 0) continue;
    for (std::size_t k = 0;; ++k) {
      const double offset_s = static_cast<double>(k) * spec.substride_s;
      const std::size_t first = seconds_to_samples(offset_s, fs);
      if (first + size > window_len) break;
      subs.push_back({t_prime, offset_s, first, size});
    }
  }
  return subs;
}

std::vector<Subwindow> enumerate_subwindows(const Window& window, double fs,
                                            const WindowSpec& spec) {
  return enumerate_subwindows(window.samples.size(), fs, spec);
}

HrEstimate estimate_baseline(std::span<const double> window,
                             const PipelineConfig& cfg, double window_start) {
  HrEstimate est;
  est.window_start = window_start;
  est.method = Method::Baseline;
  const auto spectrum = process_window(window, cfg);
  if (!(spectrum.total_power > 0.0))
    fail(ErrorKind::UnusableWindow,
         "window at " + io::format_double(window_start) + " s has an empty spectrum");
  est.hr_bpm = peak_hr(spectrum);
  return est;
}

std::vector<SubwindowScore> score_subwindows(std::span<const double> window,
                                             const WindowSpec& spec,
                                             const PipelineConfig& cfg,
                                             const CalibrationParams& cal) {
  std::vector<SubwindowScore> scored;
  for (const auto& sub : enumerate_subwindows(window.size(), cfg.fs, spec)) {
    SubwindowScore s{sub, std::nullopt,
                     process_window(window.subspan(sub.first, sub.size), cfg)};
    if (s.spectrum.total_power > 0.0)
      s.score = quality_score(extract_features(s.spectrum), cal);
    scored.push_back(std::move(s));
  }
  return scored;
}

HrEstimate estimate_quality_based(std::span<const double> window,
                                  const WindowSpec& spec,
                                  const PipelineConfig& cfg,
                                  const CalibrationParams& cal,
                                  double window_start) {
  const auto scored = score_subwindows(window, spec, cfg, cal);
  const SubwindowScore* best = nullptr;
  for (const auto& s : scored) {
    if (!s.score) continue;
    if (best == nullptr || s.score->q > best->score->q) best = &s;
  }
  if (best == nullptr)
    fail(ErrorKind::UnusableWindow,
         "every subwindow of the window at " + io::format_double(window_start) +
             " s has an empty spectrum");
  HrEstimate est;
  est.window_start = window_start;
  est.method = Method::Quality;
  est.hr_bpm = peak_hr(best->spectrum);
  est.q = best->score->q;
  est.sub_start = window_start + best->sub.offset_s;
  est.sub_len = best->sub.length_s;
  return est;
}

std::vector<HrEstimate> estimate_trace(const SampleTrace& trace,
                                       const WindowSpec& spec,
                                       const PipelineConfig& cfg,
                                       const CalibrationParams& cal,
                                       MethodSelection methods) {
  cfg.validate();
  cal.validate();
  if (std::abs(cfg.fs - trace.fs) > 1e-9 * trace.fs)
    fail(ErrorKind::BadPipelineConfig, "pipeline fs does not match the trace");
  const SampleTrace repaired = interpolate_gaps(trace);
  const bool want_baseline = methods != MethodSelection::Quality;
  const bool want_quality = methods != MethodSelection::Baseline;

  std::vector<HrEstimate> out;
  for (const auto& w : enumerate_windows(repaired, spec)) {
    const double start = trace.t0 + w.start_s;
    const bool gappy = w.gap_fraction > kMaxWindowGapFraction;
    auto run = [&](Method m) {
      HrEstimate est;
      est.window_start = start;
      est.method = m;
      if (gappy) return est;
      try {
        return m == Method::Baseline
                   ? estimate_baseline(w.samples, cfg, start)
                   : estimate_quality_based(w.samples, spec, cfg, cal, start);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::UnusableWindow) throw;
        return est;
      }
    };
    if (want_baseline) out.push_back(run(Method::Baseline));
    if (want_quality) out.push_back(run(Method::Quality));
  }
  return out;
}

std::string format_estimates_csv(std::span<const HrEstimate> estimates) {
  std::string out(kEstimatesHeader);
  out += '\n';
  for (const auto& e : estimates) {
    out += io::format_double(e.window_start);
    out += ',';
    out += to_string(e.method);
    out += ',' + optional_field(e.hr_bpm) + ',' + optional_field(e.q) + ',' +
           optional_field(e.sub_start) + ',' + optional_field(e.sub_len) + '\n';
  }
  return out;
}

std::vector<HrEstimate> parse_estimates_csv(std::string_view text) {
  const auto lines = io::split_lines(text);
  if (lines.empty() || io::trim(lines[0]) != kEstimatesHeader)
    fail(ErrorKind::MalformedEstimates, "missing estimates header");
  std::vector<HrEstimate> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto fields = io::split(lines[i], ',');
    if (fields.size() != 6)
      fail(ErrorKind::MalformedEstimates,
           "expected 6 fields on line " + std::to_string(i + 1));
    HrEstimate e;
    const auto start = io::parse_double(fields[0]);
    const auto method = parse_method(io::trim(fields[1]));
    if (!start || !method)
      fail(ErrorKind::MalformedEstimates, "bad row on line " + std::to_string(i + 1));
    e.window_start = *start;
    e.method = *method;
    e.hr_bpm = parse_optional(fields[2], i + 1);
    e.q = parse_optional(fields[3], i + 1);
    e.sub_start = parse_optional(fields[4], i + 1);
    e.sub_len = parse_optional(fields[5], i + 1);
    out.push_back(e);
  }
  return out;
}

void write_estimates_csv(const std::filesystem::path& path,
                         std::span<const HrEstimate> estimates) {
  io::write_file_atomic(path, format_estimates_csv(estimates));
}

std::vector<HrEstimate> read_estimates_csv(const std::filesystem::path& path) {
  return parse_estimates_csv(io::read_file(path));
}

}  // namespace rppg
