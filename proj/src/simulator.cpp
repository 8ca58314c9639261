#include "rppg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <nlohmann/json.hpp>
#include <utility>

#include "rppg/error.hpp"
#include "rppg/io_util.hpp"

namespace rppg {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kArtifactSeedMix = 0x9E3779B97F4A7C15ull;

std::size_t sample_index(double t, double fs) {
  return static_cast<std::size_t>(std::llround(t * fs));
}

// Brownian bridge scaled to a peak of `peak`: a random-walk displacement that
// leaves and returns to rest. Its spectrum falls as 1/f^2, so the slowest
// mode (period = twice the burst length) dominates.
void add_motion_burst(SampleTrace& out, std::size_t first, std::size_t last,
                      double peak, Rng& rng) {
  const std::size_t n = last - first;
  if (n < 2) return;
  std::vector<double> walk(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) walk[i] = walk[i - 1] + rng.normal();
  const double end = walk.back();
  double largest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    walk[i] -= end * static_cast<double>(i) / static_cast<double>(n - 1);
    largest = std::max(largest, std::abs(walk[i]));
  }
  if (largest == 0.0) return;
  for (std::size_t i = 0; i < n; ++i) out.samples[first + i] += peak * walk[i] / largest;
}

json config_to_json(const CorpusRecord& r) {
  json trajectory = json::array();
  for (const auto& k : r.config.hr_trajectory) trajectory.push_back({k.t, k.bpm});
  return {
      {"fs", r.config.fs},
      {"duration", r.config.duration},
      {"hr_trajectory", trajectory},
      {"pulse_harmonics", r.config.pulse_harmonics},
      {"drift_amplitude", r.config.drift_amplitude},
      {"drift_period", r.config.drift_period},
      {"noise_sigma", r.config.noise_sigma},
  };
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorKind::MalformedManifest, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::MalformedManifest, std::string("bad field '") + key + "'");
  }
}

CorpusRecord record_from_json(const json& j) {
  CorpusRecord r;
  r.id = field<std::string>(j, "id");
  r.config.seed = field<std::uint64_t>(j, "seed");
  const auto& c = j.contains("config") ? j.at("config") : json::object();
  r.config.fs = field<double>(c, "fs");
  r.config.duration = field<double>(c, "duration");
  r.config.hr_trajectory.clear();
  for (const auto& knot : field<std::vector<std::vector<double>>>(c, "hr_trajectory")) {
    if (knot.size() != 2) fail(ErrorKind::MalformedManifest, "hr_trajectory knots are [t, bpm]");
    r.config.hr_trajectory.push_back({knot[0], knot[1]});
  }
  r.config.pulse_harmonics = field<std::vector<double>>(c, "pulse_harmonics");
  r.config.drift_amplitude = field<double>(c, "drift_amplitude");
  r.config.drift_period = field<double>(c, "drift_period");
  r.config.noise_sigma = field<double>(c, "noise_sigma");
  if (j.contains("artifacts")) {
    for (const auto& a : j.at("artifacts")) {
      ArtifactSpec spec;
      spec.kind = parse_artifact_kind(field<std::string>(a, "kind"));
      spec.start = field<double>(a, "start");
      spec.length = field<double>(a, "length");
      spec.magnitude = field<double>(a, "magnitude");
      r.artifacts.push_back(spec);
    }
  }
  r.groundtruth_fs = field<double>(j, "groundtruth_fs");
  r.trace_path = field<std::string>(j, "trace_path");
  r.groundtruth_path = field<std::string>(j, "groundtruth_path");
  r.hr_path = field<std::string>(j, "hr_path");
  return r;
}

json record_to_json(const CorpusRecord& r) {
  json artifacts = json::array();
  for (const auto& a : r.artifacts)
    artifacts.push_back({{"kind", std::string(to_string(a.kind))},
                         {"start", a.start},
                         {"length", a.length},
                         {"magnitude", a.magnitude}});
  return {
      {"id", r.id},
      {"seed", r.config.seed},
      {"config", config_to_json(r)},
      {"artifacts", artifacts},
      {"groundtruth_fs", r.groundtruth_fs},
      {"trace_path", r.trace_path},
      {"groundtruth_path", r.groundtruth_path},
      {"hr_path", r.hr_path},
  };
}

CorpusRecord make_record(std::string id, SimulationConfig cfg) {
  CorpusRecord r;
  r.trace_path = id + ".trace.csv";
  r.groundtruth_path = id + ".ppg.csv";
  r.hr_path = id + ".hr.csv";
  r.id = std::move(id);
  r.config = std::move(cfg);
  return r;
}

std::string numbered(std::string_view prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  while (digits.size() < 3) digits.insert(digits.begin(), '0');
  return std::string(prefix) + "-" + digits;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

void SimulationConfig::validate() const {
  if (!(fs > 0.0) || !(duration > 0.0))
    fail(ErrorKind::BadConfig, "fs and duration must be > 0");
  if (hr_trajectory.empty()) fail(ErrorKind::BadConfig, "hr_trajectory is empty");
  double max_bpm = 0.0;
  for (std::size_t i = 0; i < hr_trajectory.size(); ++i) {
    const auto& k = hr_trajectory[i];
    if (!(k.bpm >= 42.0 && k.bpm <= 180.0))
      fail(ErrorKind::BadConfig, "hr_trajectory values must lie in [42, 180] bpm");
    if (i > 0 && !(k.t > hr_trajectory[i - 1].t))
      fail(ErrorKind::BadConfig, "hr_trajectory times must be strictly increasing");
    max_bpm = std::max(max_bpm, k.bpm);
  }
  for (double a : pulse_harmonics)
    if (!(a >= 0.0)) fail(ErrorKind::BadConfig, "harmonic amplitudes must be >= 0");
  if (!(drift_amplitude >= 0.0) || !(drift_period > 0.0))
    fail(ErrorKind::BadConfig, "drift needs amplitude >= 0 and period > 0");
  if (!(noise_sigma >= 0.0)) fail(ErrorKind::BadConfig, "noise_sigma must be >= 0");
  if (!(fs > 2.0 * max_bpm / 60.0))
    fail(ErrorKind::BadConfig, "fs must exceed twice the highest pulse frequency");
}

double SimulationConfig::hr_at(double t) const {
  const auto& k = hr_trajectory;
  if (t <= k.front().t) return k.front().bpm;
  if (t >= k.back().t) return k.back().bpm;
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (t <= k[i].t) {
      const double u = (t - k[i - 1].t) / (k[i].t - k[i - 1].t);
      return k[i - 1].bpm + u * (k[i].bpm - k[i - 1].bpm);
    }
  }
  return k.back().bpm;
}

double SimulationConfig::phase_at(double t) const {
  // Exact integral of the piecewise-linear trajectory, constant outside the
  // knot range.
  double area = 0.0;  // bpm * s
  double from = 0.0;
  auto integrate_to = [&](double to) {
    if (to <= from) return;
    area += 0.5 * (hr_at(from) + hr_at(to)) * (to - from);
    from = to;
  };
  for (const auto& k : hr_trajectory) {
    if (k.t >= t) break;
    integrate_to(k.t);
  }
  integrate_to(t);
  return area / 60.0;
}

SynthResult synth_pulse(const SimulationConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * cfg.fs));
  auto values = synth_reference_ppg(cfg, cfg.fs).samples;
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.fs;
    values[i] += cfg.drift_amplitude * std::sin(kTwoPi * t / cfg.drift_period);
    if (cfg.noise_sigma > 0.0) values[i] += cfg.noise_sigma * rng.normal();
  }
  SynthResult out{SampleTrace(std::move(values), cfg.fs), {}};
  for (std::size_t s = 0; static_cast<double>(s) < cfg.duration; ++s)
    out.hr_per_second.push_back(cfg.hr_at(static_cast<double>(s)));
  return out;
}

SampleTrace synth_reference_ppg(const SimulationConfig& cfg, double fs) {
  cfg.validate();
  if (!(fs > 0.0)) fail(ErrorKind::BadConfig, "reference fs must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * fs));
  std::vector<double> values(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double cycles = cfg.phase_at(static_cast<double>(i) / fs);
    for (std::size_t h = 0; h < cfg.pulse_harmonics.size(); ++h) {
      const double a = cfg.pulse_harmonics[h];
      if (a != 0.0) values[i] += a * std::sin(kTwoPi * static_cast<double>(h + 1) * cycles);
    }
  }
  return SampleTrace(std::move(values), fs);
}

std::string_view to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::MotionBurst: return "motion-burst";
    case ArtifactKind::IlluminationStep: return "illumination-step";
    case ArtifactKind::Vibration: return "vibration";
    case ArtifactKind::Dropout: return "dropout";
  }
  return "motion-burst";
}

ArtifactKind parse_artifact_kind(std::string_view text) {
  if (text == "motion-burst") return ArtifactKind::MotionBurst;
  if (text == "illumination-step") return ArtifactKind::IlluminationStep;
  if (text == "vibration") return ArtifactKind::Vibration;
  if (text == "dropout") return ArtifactKind::Dropout;
  fail(ErrorKind::MalformedManifest, "unknown artifact kind '" + std::string(text) + "'");
}

SampleTrace inject_artifacts(const SampleTrace& trace,
                             std::span<const ArtifactSpec> artifacts,
                             std::uint64_t seed, double clean_amplitude) {
  SampleTrace out = trace;
  Rng rng(seed);
  const double duration = trace.duration();
  for (const auto& a : artifacts) {
    if (!(a.start >= 0.0) || !(a.length > 0.0) ||
        a.start + a.length > duration + 1e-9 || !(a.magnitude >= 0.0))
      fail(ErrorKind::ArtifactOutOfRange,
           std::string(to_string(a.kind)) + " at " + io::format_double(a.start) +
               " s does not fit a " + io::format_double(duration) + " s trace");
    const std::size_t first = sample_index(a.start, trace.fs);
    const std::size_t last = std::min(trace.size(), sample_index(a.start + a.length, trace.fs));
    const double m = a.magnitude * clean_amplitude;
    switch (a.kind) {
      case ArtifactKind::MotionBurst:
        add_motion_burst(out, first, last, m, rng);
        break;
      case ArtifactKind::IlluminationStep:
        for (std::size_t i = first; i < last; ++i) out.samples[i] += m;
        break;
      case ArtifactKind::Vibration: {
        const double freq = rng.uniform(4.0, 8.0);
        const double phase = rng.uniform(0.0, kTwoPi);
        for (std::size_t i = first; i < last; ++i) {
          const double t = static_cast<double>(i) / trace.fs;
          out.samples[i] += m * std::sin(kTwoPi * freq * t + phase);
        }
        break;
      }
      case ArtifactKind::Dropout:
        for (std::size_t i = first; i < last; ++i) {
          out.samples[i] = std::numeric_limits<double>::quiet_NaN();
          out.gap_mask[i] = true;
        }
        break;
    }
  }
  return out;
}

SimulatedTrace simulate(const CorpusRecord& record) {
  auto synth = synth_pulse(record.config);
  const double a1 = record.config.pulse_harmonics.empty() ? 1.0 : record.config.pulse_harmonics.front();
  SimulatedTrace out{
      inject_artifacts(synth.trace, record.artifacts, record.config.seed ^ kArtifactSeedMix, a1),
      synth_reference_ppg(record.config, record.groundtruth_fs),
      std::move(synth.hr_per_second)};
  return out;
}

void write_corpus(std::span<const CorpusRecord> records,
                  const std::filesystem::path& dir) {
  for (const auto& r : records) {
    const auto sim = simulate(r);
    write_csv_trace(dir / r.trace_path, sim.trace);
    write_csv_trace(dir / r.groundtruth_path, sim.groundtruth);
    write_csv_trace(dir / r.hr_path, SampleTrace(sim.hr_per_second, 1.0));
  }
}

std::vector<CorpusRecord> parse_manifest(std::string_view text) {
  std::vector<CorpusRecord> records;
  const auto lines = io::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = io::trim(lines[i]);
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::MalformedManifest,
           "line " + std::to_string(i + 1) + ": " + e.what());
    }
    records.push_back(record_from_json(j));
  }
  return records;
}

std::string format_manifest(std::span<const CorpusRecord> records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + '\n';
  return out;
}

std::vector<CorpusRecord> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(io::read_file(path));
}

void write_manifest(const std::filesystem::path& path,
                    std::span<const CorpusRecord> records) {
  io::write_file_atomic(path, format_manifest(records));
}

std::vector<CorpusRecord> clean_corpus(std::size_t count, std::uint64_t seed,
                                       double duration) {
  Rng rng(seed);
  std::vector<CorpusRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    SimulationConfig cfg;
    cfg.duration = duration;
    cfg.hr_trajectory = {{0.0, rng.uniform(45.0, 175.0)}};
    cfg.pulse_harmonics = {1.0, 0.4, 0.2};
    cfg.noise_sigma = 0.05;
    cfg.seed = rng.next_u64();
    records.push_back(make_record(numbered("clean", i), cfg));
  }
  return records;
}

std::vector<CorpusRecord> burst_corpus(std::size_t count, std::uint64_t seed,
                                       double duration) {
  // Three 2 s bursts 8 s apart plus the illumination step need room to move.
  if (!(duration >= 30.0))
    fail(ErrorKind::BadConfig, "burst corpus traces must be at least 30 s long");
  Rng rng(seed);
  std::vector<CorpusRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    SimulationConfig cfg;
    cfg.duration = duration;
    const double hr0 = rng.uniform(55.0, 110.0);
    const double hr1 = std::clamp(hr0 + rng.uniform(-8.0, 8.0), 42.0, 180.0);
    cfg.hr_trajectory = {{0.0, hr0}, {duration, hr1}};
    cfg.pulse_harmonics = {1.0, 0.4, 0.2};
    cfg.drift_amplitude = 0.5;
    cfg.drift_period = rng.uniform(15.0, 30.0);
    cfg.noise_sigma = 0.1;
    cfg.seed = rng.next_u64();
    auto record = make_record(numbered("burst", i), cfg);

    constexpr double kBurstLength = 2.0;
    constexpr double kMinStartSeparation = 8.0;
    std::vector<double> starts;
    while (starts.size() < 3) {
      const double s = std::floor(rng.uniform(0.0, duration - kBurstLength) * 10.0) / 10.0;
      const bool clear = std::all_of(starts.begin(), starts.end(), [&](double o) {
        return std::abs(o - s) >= kMinStartSeparation;
      });
      if (clear) starts.push_back(s);
    }
    std::sort(starts.begin(), starts.end());
    for (double s : starts)
      record.artifacts.push_back({ArtifactKind::MotionBurst, s, kBurstLength, 10.0});
    const double step_at = std::floor(rng.uniform(5.0, duration - 10.0) * 10.0) / 10.0;
    record.artifacts.push_back(
        {ArtifactKind::IlluminationStep, step_at, duration - step_at, 5.0});
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<CorpusRecord> default_reference_manifest() {
  auto records = clean_corpus(10, 0x5EED0001ull);
  auto bursts = burst_corpus(10, 0x5EED0002ull);
  for (auto& r : records) r.id = "ref-" + r.id;
  for (auto& r : bursts) r.id = "ref-" + r.id;
  records.insert(records.end(), bursts.begin(), bursts.end());
  for (auto& r : records) {
    r.trace_path = r.id + ".trace.csv";
    r.groundtruth_path = r.id + ".ppg.csv";
    r.hr_path = r.id + ".hr.csv";
  }
  return records;
}

std::vector<ReferenceSpectrum> reference_spectra(
    std::span<const CorpusRecord> records, std::span<const SampleTrace> traces,
    const WindowSpec& spec, const PipelineConfig& cfg) {
  if (records.size() != traces.size())
    fail(ErrorKind::LengthMismatch, "one trace per corpus record is required");
  std::vector<ReferenceSpectrum> out;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const SampleTrace repaired = interpolate_gaps(traces[r]);
    std::map<std::pair<std::size_t, std::size_t>, bool> seen;
    for (const auto& w : enumerate_windows(repaired, spec)) {
      for (const auto& sub : enumerate_subwindows(w, repaired.fs, spec)) {
        const auto key = std::make_pair(w.first + sub.first, sub.size);
        if (!seen.emplace(key, true).second) continue;
        const double from = static_cast<double>(key.first) / repaired.fs;
        const double to = from + static_cast<double>(sub.size) / repaired.fs;
        const bool corrupted = std::any_of(
            records[r].artifacts.begin(), records[r].artifacts.end(),
            [&](const ArtifactSpec& a) { return a.overlaps(from, to); });
        out.push_back({process_window(w.samples.subspan(sub.first, sub.size), cfg), corrupted});
      }
    }
  }
  return out;
}

CalibrationParams calibrate(std::span<const ReferenceSpectrum> reference) {
  std::vector<QualityFeatures> features;
  bool any_clean = false;
  bool any_corrupted = false;
  for (const auto& r : reference) {
    if (!(r.spectrum.total_power > 0.0)) continue;
    features.push_back(extract_features(r.spectrum));
    (r.corrupted ? any_corrupted : any_clean) = true;
  }
  if (features.empty())
    fail(ErrorKind::EmptyReference, "reference set holds no usable spectra");
  if (!any_clean || !any_corrupted)
    fail(ErrorKind::EmptyReference, "reference set needs clean and corrupted spectra");

  auto stats = [&](auto get, Orientation orientation) {
    double mean = 0.0;
    for (const auto& f : features) mean += get(f);
    mean /= static_cast<double>(features.size());
    double var = 0.0;
    for (const auto& f : features) var += (get(f) - mean) * (get(f) - mean);
    var /= static_cast<double>(features.size());
    return FeatureStats{mean, std::max(std::sqrt(var), kSigmaFloor), orientation};
  };
  CalibrationParams cal;
  cal.snr = stats([](const QualityFeatures& f) { return f.snr; }, Orientation::HigherBetter);
  cal.bw = stats([](const QualityFeatures& f) { return f.bw; }, Orientation::LowerBetter);
  cal.rp = stats([](const QualityFeatures& f) { return std::log(f.rp); }, Orientation::HigherBetter);
  return cal;
}

}  // namespace rppg
