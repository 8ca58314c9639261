// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "rppg/cli.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/io_util.hpp"
#include "rppg/simulator.hpp"

using namespace rppg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::uint64_t kCleanSeed = 0xC1EA2;
constexpr std::uint64_t kBurstSeed = 0xACCE55;

// 1. power_spectrum vs naive DFT.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> n;
  double worst = 0.0;
  bool grids_match = true;
  for (std::size_t len : {16u, 64u, 141u, 256u}) {
    PipelineConfig cfg;
    if (len < 40) cfg.fs = 8.0;  // 16 samples must still span 2 s
    std::vector<double> x(len);
    for (auto& v : x) v = n(gen);
    const auto s = power_spectrum(x, cfg);
    const auto o = oracle::periodogram(x, cfg.fs, cfg.fft_length(len), cfg.band_lo, cfg.band_hi);
    if (s.size() != o.size()) {
      grids_match = false;
      continue;
    }
    double peak = 0.0, err = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) {
      peak = std::max(peak, o[k].power);
      err = std::max(err, std::abs(s.power[k] - o[k].power));
      grids_match = grids_match && std::abs(s.freqs[k] - o[k].freq) <= 1e-12;
    }
    worst = std::max(worst, err / peak);
  }
  const double elapsed = seconds_since(t0);
  return {grids_match && worst <= 1e-9 && elapsed < 1.0,
          fmt("max relative error %.3g (tol 1e-9), %.3f s (limit 1 s)", worst, elapsed)};
}

// 2. Baseline accuracy on clean traces against the generator's HR.
Outcome clean_accuracy() {
  const WindowSpec spec;
  std::size_t ok = 0, total = 0;
  double worst = 0.0;
  for (const auto& r : clean_corpus(20, kCleanSeed)) {
    const auto sim = simulate(r);
    const double truth = r.config.hr_trajectory.front().bpm;
    PipelineConfig cfg;
    cfg.fs = r.config.fs;
    for (const auto& e : estimate_trace(sim.trace, spec, cfg, default_calibration(),
                                        MethodSelection::Baseline)) {
      ++total;
      const double err = e.hr_bpm ? std::abs(*e.hr_bpm - truth) : INFINITY;
      worst = std::max(worst, err);
      ok += err <= 1.5;
    }
  }
  const double frac = static_cast<double>(ok) / static_cast<double>(total);
  return {frac >= 0.95, fmt("%zu/%zu windows within 1.5 bpm (%.1f%%, need 95%%), worst %.2f bpm", ok,
                            total, 100.0 * frac, worst)};
}

struct BurstRun {
  EvaluationReport report;
  double seconds = 0.0;
  double q_clean = 0.0;
  double q_burst = 0.0;
  std::size_t n_clean = 0;
  std::size_t n_burst = 0;
};

BurstRun burst_run() {
  BurstRun out;
  const WindowSpec spec;
  const auto cal = default_calibration();
  const auto corpus = burst_corpus(20, kBurstSeed);
  const auto t0 = Clock::now();
  std::vector<VideoResult> videos;
  std::vector<SimulatedTrace> sims;
  for (const auto& r : corpus) {
    PipelineConfig cfg;
    cfg.fs = r.config.fs;
    auto sim = simulate(r);
    const auto gt = groundtruth_hr(downsample_groundtruth(sim.groundtruth, cfg.fs), spec, cfg);
    const auto est = estimate_trace(sim.trace, spec, cfg, cal);
    videos.push_back({r.id, mae_for_method(est, gt, Method::Baseline),
                      mae_for_method(est, gt, Method::Quality)});
    sims.push_back(std::move(sim));
  }
  out.report = corpus_report(videos);
  out.seconds = seconds_since(t0);

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    PipelineConfig cfg;
    cfg.fs = corpus[i].config.fs;
    for (const auto& w : enumerate_windows(sims[i].trace, spec)) {
      for (const auto& s : score_subwindows(w.samples, spec, cfg, cal)) {
        if (!s.score) continue;
        const double from = w.start_s + s.sub.offset_s, to = from + s.sub.length_s;
        bool any = false, burst = false;
        for (const auto& a : corpus[i].artifacts) {
          if (!a.overlaps(from, to)) continue;
          any = true;
          burst = burst || a.kind == ArtifactKind::MotionBurst;
        }
        if (!any) {
          out.q_clean += s.score->q;
          ++out.n_clean;
        }
        if (burst) {
          out.q_burst += s.score->q;
          ++out.n_burst;
        }
      }
    }
  }
  out.q_clean /= static_cast<double>(out.n_clean);
  out.q_burst /= static_cast<double>(out.n_burst);
  return out;
}

// 3. Quality selection beats the baseline on the burst corpus.
Outcome selection_benefit(const BurstRun& run) {
  const auto& r = run.report;
  const bool pass = r.rel_improvement_mean >= 15.0 && r.std_quality <= r.std_baseline && run.seconds < 30.0;
  return {pass, fmt("MAE %.2f -> %.2f bpm (%.1f%% lower, need 15%%), std %.2f -> %.2f, %.1f s (limit 30 s)",
                    r.mean_baseline, r.mean_quality, r.rel_improvement_mean, r.std_baseline,
                    r.std_quality, run.seconds)};
}

// 4. Clean subwindows score higher Q than burst-overlapping ones.
Outcome q_separation(const BurstRun& run) {
  const double gap = run.q_clean - run.q_burst;
  return {gap >= 0.1, fmt("mean Q %.4f (%zu artifact-free) vs %.4f (%zu burst), gap %.4f (need 0.1)",
                          run.q_clean, run.n_clean, run.q_burst, run.n_burst, gap)};
}

// 5. x -> 3.7 x + 120 changes nothing.
Outcome affine_invariance() {
  const WindowSpec spec;
  const PipelineConfig cfg;
  const auto cal = default_calibration();
  const auto corpus = burst_corpus(2, 0xAFF1);
  double hr_dev = 0.0, q_dev = 0.0;
  std::size_t sub_changes = 0, windows = 0;
  for (const auto& r : corpus) {
    const auto trace = simulate(r).trace;
    for (const auto& w : enumerate_windows(trace, spec)) {
      if (windows == 100) break;
      ++windows;
      std::vector<double> y(w.samples.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = 3.7 * w.samples[i] + 120.0;
      const auto bx = estimate_baseline(w.samples, cfg), by = estimate_baseline(y, cfg);
      const auto qx = estimate_quality_based(w.samples, spec, cfg, cal);
      const auto qy = estimate_quality_based(y, spec, cfg, cal);
      hr_dev = std::max({hr_dev, std::abs(*bx.hr_bpm - *by.hr_bpm), std::abs(*qx.hr_bpm - *qy.hr_bpm)});
      q_dev = std::max(q_dev, std::abs(*qx.q - *qy.q));
      sub_changes += qx.sub_start != qy.sub_start || qx.sub_len != qy.sub_len;
    }
  }
  return {windows == 100 && hr_dev <= 1e-9 && q_dev <= 1e-9 && sub_changes == 0,
          fmt("%zu windows: max |dHR| %.3g bpm, max |dQ| %.3g, %zu subwindow changes", windows, hr_dev,
              q_dev, sub_changes)};
}

// 6. 54 windows, 4 subwindows each.
Outcome window_counts() {
  const WindowSpec spec;
  const SampleTrace trace(std::vector<double>(1200, 0.0), 20.0);
  const auto windows = enumerate_windows(trace, spec);
  std::size_t bad = 0;
  for (const auto& w : windows) bad += enumerate_subwindows(w, trace.fs, spec).size() != 4;
  return {windows.size() == 54 && bad == 0,
          fmt("%zu windows (need 54), %zu with a subwindow count other than 4", windows.size(), bad)};
}

// 7. File formats.
Outcome round_trips(const fs::path& tmp) {
  std::mt19937_64 gen(7);
  FrameStream frames;
  frames.width = 37;
  frames.height = 23;
  frames.fps_numerator = 20;
  frames.count = 11;
  frames.pixels.resize(frames.frame_bytes() * frames.count);
  for (auto& p : frames.pixels) p = static_cast<std::uint8_t>(gen());
  write_frame_stream(tmp / "s.rfs", frames);
  const bool rfs_ok =
      serialize_frame_stream(read_frame_stream(tmp / "s.rfs")) == serialize_frame_stream(frames) &&
      io::read_file(tmp / "s.rfs").size() == 24 + frames.pixels.size();

  SimulationConfig sim;
  sim.noise_sigma = 0.7;
  sim.seed = 3;
  const auto est = estimate_trace(synth_pulse(sim).trace, WindowSpec{}, PipelineConfig{},
                                  default_calibration());
  write_estimates_csv(tmp / "e.csv", est);
  const auto back = read_estimates_csv(tmp / "e.csv");
  write_estimates_csv(tmp / "f.csv", back);
  const bool csv_ok = back == est && io::read_file(tmp / "e.csv") == io::read_file(tmp / "f.csv");

  const auto down = downsample_groundtruth(SampleTrace(std::vector<double>(5000, 1.25), 500.0), 20.0);
  const bool down_ok = down.size() == 200 &&
                       std::all_of(down.samples.begin(), down.samples.end(), [](double v) { return v == 1.25; });
  return {rfs_ok && csv_ok && down_ok,
          fmt("RFS %s, estimates CSV %s (%zu rows), downsample %zu samples", rfs_ok ? "exact" : "differs",
              csv_ok ? "exact" : "differs", est.size(), down.size())};
}

// 8. Two full CLI runs give byte-identical reports.
Outcome determinism(const fs::path& tmp) {
  write_manifest(tmp / "m.jsonl", burst_corpus(3, 0xDE7));
  std::string reports[2][2];
  int failures = 0;
  for (int k = 0; k < 2; ++k) {
    const auto dir = tmp / ("run" + std::to_string(k));
    std::ostringstream out, err;
    const std::vector<std::vector<std::string>> steps{
        {"simulate", "--manifest", (tmp / "m.jsonl").string(), "--out", (dir / "corpus").string()},
        {"estimate", "--manifest", (dir / "corpus" / "manifest.jsonl").string(), "--out",
         (dir / "est").string()},
        {"evaluate", "--manifest", (dir / "corpus" / "manifest.jsonl").string(), "--estimates-dir",
         (dir / "est").string(), "--out", (dir / "report.json").string()}};
    for (const auto& s : steps) failures += cli::run(s, out, err) != 0;
    if (failures) return {false, "CLI run failed: " + err.str()};
    reports[k][0] = io::read_file(dir / "report.json");
    reports[k][1] = io::read_file(dir / "report.txt");
  }
  const bool same = reports[0][0] == reports[1][0] && reports[0][1] == reports[1][1];
  return {same, fmt("report.json %zu bytes, report.txt %zu bytes, %s", reports[0][0].size(),
                    reports[0][1].size(), same ? "identical" : "different")};
}

}  // namespace

int main() {
  std::random_device rd;
  const fs::path tmp = fs::temp_directory_path() / ("rppg-acceptance-" + std::to_string(rd()));
  fs::create_directories(tmp);

  const auto burst = burst_run();
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"clean-signal accuracy", clean_accuracy},
      {"quality-selection benefit", [&] { return selection_benefit(burst); }},
      {"Q separation", [&] { return q_separation(burst); }},
      {"affine invariance", affine_invariance},
      {"window-count arithmetic", window_counts},
      {"format round-trips", [&] { return round_trips(tmp); }},
      {"determinism", [&] { return determinism(tmp); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::error_code ec;
  fs::remove_all(tmp, ec);
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
