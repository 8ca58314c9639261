#include "rppg/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>

#include "rppg/error.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/io_util.hpp"
#include "rppg/quality.hpp"
#include "rppg/simulator.hpp"
#include "rppg/trace.hpp"

namespace rppg::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Raw flag values; only the ones actually given override the config.
struct Flags {
  std::string config_file;
  double fs = 0, window = 0, stride = 0, substride = 0, band_lo = 0, band_hi = 0,
         detrend_span = 0;
  std::vector<double> subwindows;
  int ma_size = 0;
  std::string calibration;
  std::string method;
  std::uint64_t seed = 0;
  std::string out;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_file, "JSON file with parameter overrides");
  sub->add_option("--fs", f.fs, "sampling rate in Hz");
  sub->add_option("--window", f.window, "window length T in seconds");
  sub->add_option("--stride", f.stride, "window stride d in seconds");
  sub->add_option("--subwindows", f.subwindows, "subwindow lengths T' in seconds")
      ->delimiter(',');
  sub->add_option("--substride", f.substride, "subwindow stride d' in seconds");
  sub->add_option("--band-lo", f.band_lo, "lower band edge in Hz");
  sub->add_option("--band-hi", f.band_hi, "upper band edge in Hz");
  sub->add_option("--ma-size", f.ma_size, "moving-average size (odd)");
  sub->add_option("--detrend-span", f.detrend_span, "detrend span in seconds");
  sub->add_option("--calibration", f.calibration, "calibration file");
  sub->add_option("--method", f.method, "baseline | quality | both");
  sub->add_option("--seed", f.seed, "seed");
  sub->add_option("--out", f.out, "output file or directory")->required();
}

void apply_json(RunConfig& rc, const nlohmann::json& j) {
  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j.at(key).get<double>();
  };
  num("fs", rc.pipeline.fs);
  num("window", rc.windows.window_s);
  num("stride", rc.windows.stride_s);
  num("substride", rc.windows.substride_s);
  num("band_lo", rc.pipeline.band_lo);
  num("band_hi", rc.pipeline.band_hi);
  num("detrend_span", rc.pipeline.detrend_span_s);
  if (j.contains("subwindows")) rc.windows.subwindow_s = j.at("subwindows").get<std::vector<double>>();
  if (j.contains("ma_size")) rc.pipeline.ma_size = j.at("ma_size").get<int>();
  if (j.contains("fft_pad")) rc.pipeline.fft_pad = j.at("fft_pad").get<std::size_t>();
  if (j.contains("calibration")) rc.calibration_path = j.at("calibration").get<std::string>();
  if (j.contains("method")) {
    auto m = parse_method_selection(j.at("method").get<std::string>());
    if (!m) fail(ErrorKind::BadArguments, "method must be baseline, quality or both");
    rc.method = *m;
  }
  if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
}

RunConfig resolve(const std::string& command, const CLI::App* sub, const Flags& f) {
  RunConfig rc;
  rc.command = command;
  if (!f.config_file.empty()) {
    try {
      apply_json(rc, nlohmann::json::parse(io::read_file(f.config_file)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::BadArguments, "bad config file: " + std::string(e.what()));
    }
  }
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--fs")) rc.pipeline.fs = f.fs;
  if (given("--window")) rc.windows.window_s = f.window;
  if (given("--stride")) rc.windows.stride_s = f.stride;
  if (given("--subwindows")) rc.windows.subwindow_s = f.subwindows;
  if (given("--substride")) rc.windows.substride_s = f.substride;
  if (given("--band-lo")) rc.pipeline.band_lo = f.band_lo;
  if (given("--band-hi")) rc.pipeline.band_hi = f.band_hi;
  if (given("--ma-size")) rc.pipeline.ma_size = f.ma_size;
  if (given("--detrend-span")) rc.pipeline.detrend_span_s = f.detrend_span;
  if (given("--calibration")) rc.calibration_path = f.calibration;
  if (given("--seed")) rc.seed = f.seed;
  if (given("--method")) {
    auto m = parse_method_selection(f.method);
    if (!m) fail(ErrorKind::BadArguments, "method must be baseline, quality or both");
    rc.method = *m;
  }
  rc.pipeline.validate();
  rc.windows.validate();
  return rc;
}

CalibrationParams load_calibration(const RunConfig& rc) {
  return rc.calibration_path.empty() ? default_calibration()
                                     : read_calibration(rc.calibration_path);
}

fs::path echo_path(const fs::path& out, bool out_is_dir) {
  if (out_is_dir) return out / "run_config.json";
  auto p = out;
  p += ".config.json";
  return p;
}

void write_echo(const RunConfig& rc, const fs::path& out, bool out_is_dir) {
  io::write_file_atomic(echo_path(out, out_is_dir), echo_json(rc));
}

PipelineConfig pipeline_for(const RunConfig& rc, double fs) {
  PipelineConfig p = rc.pipeline;
  p.fs = fs;
  p.validate();
  return p;
}

fs::path manifest_dir(const std::string& manifest, const std::string& corpus_dir) {
  if (!corpus_dir.empty()) return corpus_dir;
  return fs::path(manifest).parent_path();
}

}  // namespace

std::string echo_json(const RunConfig& rc) {
  ordered_json j;
  j["command"] = rc.command;
  j["fs"] = rc.pipeline.fs;
  j["window"] = rc.windows.window_s;
  j["stride"] = rc.windows.stride_s;
  j["subwindows"] = rc.windows.subwindow_s;
  j["substride"] = rc.windows.substride_s;
  j["band_lo"] = rc.pipeline.band_lo;
  j["band_hi"] = rc.pipeline.band_hi;
  j["ma_size"] = rc.pipeline.ma_size;
  j["detrend_span"] = rc.pipeline.detrend_span_s;
  j["fft_pad"] = rc.pipeline.fft_pad;
  j["calibration"] = rc.calibration_path;
  j["method"] = std::string(to_string(rc.method));
  j["seed"] = rc.seed;
  ordered_json paths = ordered_json::object();
  for (const auto& [k, v] : rc.paths) paths[k] = v;
  j["paths"] = paths;
  return j.dump(2) + "\n";
}

int exit_code(ErrorKind kind) { return 10 + static_cast<int>(kind); }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heart rate from rPPG traces with quality-based subwindow selection", "rppg"};
  app.require_subcommand(1);

  Flags f;
  std::string frames_path, rois_path, trace_path, manifest_path, corpus_dir, estimates_dir,
      kind = "burst";
  std::size_t count = 20;

  auto* extract = app.add_subcommand("extract", "RFS frames + ROI sidecar -> trace CSV");
  add_common(extract, f);
  extract->add_option("--frames", frames_path, "RFS frame container")->required();
  extract->add_option("--rois", rois_path, "ROI sidecar CSV")->required();

  auto* estimate = app.add_subcommand("estimate", "trace CSV (or corpus) -> estimates CSV");
  add_common(estimate, f);
  estimate->add_option("--trace", trace_path, "trace CSV");
  estimate->add_option("--manifest", manifest_path, "corpus manifest (batch mode)");
  estimate->add_option("--corpus-dir", corpus_dir, "directory holding the corpus files");

  auto* simulate_cmd = app.add_subcommand("simulate", "manifest -> synthetic corpus");
  add_common(simulate_cmd, f);
  simulate_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();

  auto* calibrate_cmd = app.add_subcommand("calibrate", "corpus -> calibration file");
  add_common(calibrate_cmd, f);
  calibrate_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();
  calibrate_cmd->add_option("--corpus-dir", corpus_dir, "directory holding the corpus files");

  auto* evaluate = app.add_subcommand("evaluate", "estimates + reference PPG -> report");
  add_common(evaluate, f);
  evaluate->add_option("--manifest", manifest_path, "corpus manifest")->required();
  evaluate->add_option("--corpus-dir", corpus_dir, "directory holding the corpus files");
  evaluate->add_option("--estimates-dir", estimates_dir, "directory of <id>.estimates.csv")
      ->required();

  auto* make_manifest = app.add_subcommand("make-manifest", "write a seeded corpus manifest");
  add_common(make_manifest, f);
  make_manifest->add_option("--kind", kind, "clean | burst | reference");
  make_manifest->add_option("--count", count, "number of traces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    const fs::path out_path = f.out;
    if (extract->parsed()) {
      auto rc = resolve("extract", extract, f);
      rc.paths = {{"frames", frames_path}, {"rois", rois_path}, {"out", f.out}};
      const auto frames = read_frame_stream(frames_path);
      const auto rois = read_roi_sidecar(rois_path);
      const auto trace = roi_mean_trace(frames, rois);
      write_csv_trace(out_path, trace);
      write_echo(rc, out_path, false);
      out << "wrote " << trace.size() << " samples (" << trace.gap_count()
          << " gaps) to " << f.out << "\n";
    } else if (estimate->parsed()) {
      auto rc = resolve("estimate", estimate, f);
      const auto cal = load_calibration(rc);
      if (!trace_path.empty() == !manifest_path.empty())
        fail(ErrorKind::BadArguments, "estimate needs exactly one of --trace or --manifest");
      if (!trace_path.empty()) {
        rc.paths = {{"trace", trace_path}, {"out", f.out}};
        const auto trace = read_csv_trace(trace_path, rc.pipeline.fs);
        const auto est = estimate_trace(trace, rc.windows, rc.pipeline, cal, rc.method);
        write_estimates_csv(out_path, est);
        write_echo(rc, out_path, false);
        out << "wrote " << est.size() << " estimates to " << f.out << "\n";
      } else {
        const auto dir = manifest_dir(manifest_path, corpus_dir);
        rc.paths = {{"manifest", manifest_path}, {"corpus_dir", dir.string()}, {"out", f.out}};
        for (const auto& r : read_manifest(manifest_path)) {
          const auto pipe = pipeline_for(rc, r.config.fs);
          const auto trace = read_csv_trace(dir / r.trace_path, pipe.fs);
          const auto est = estimate_trace(trace, rc.windows, pipe, cal, rc.method);
          write_estimates_csv(out_path / (r.id + ".estimates.csv"), est);
        }
        write_echo(rc, out_path, true);
        out << "wrote estimates to " << f.out << "\n";
      }
    } else if (simulate_cmd->parsed()) {
      auto rc = resolve("simulate", simulate_cmd, f);
      rc.paths = {{"manifest", manifest_path}, {"out", f.out}};
      const auto records = read_manifest(manifest_path);
      write_corpus(records, out_path);
      write_manifest(out_path / "manifest.jsonl", records);
      write_echo(rc, out_path, true);
      out << "simulated " << records.size() << " traces into " << f.out << "\n";
    } else if (calibrate_cmd->parsed()) {
      auto rc = resolve("calibrate", calibrate_cmd, f);
      const auto dir = manifest_dir(manifest_path, corpus_dir);
      rc.paths = {{"manifest", manifest_path}, {"corpus_dir", dir.string()}, {"out", f.out}};
      const auto records = read_manifest(manifest_path);
      std::vector<ReferenceSpectrum> reference;
      for (const auto& r : records) {
        const auto pipe = pipeline_for(rc, r.config.fs);
        const SampleTrace trace = read_csv_trace(dir / r.trace_path, pipe.fs);
        auto part = reference_spectra(std::span(&r, 1), std::span(&trace, 1), rc.windows, pipe);
        reference.insert(reference.end(), std::make_move_iterator(part.begin()),
                         std::make_move_iterator(part.end()));
      }
      const auto cal = calibrate(reference);
      write_calibration(out_path, cal);
      write_echo(rc, out_path, false);
      out << format_calibration(cal);
    } else if (evaluate->parsed()) {
      auto rc = resolve("evaluate", evaluate, f);
      const auto dir = manifest_dir(manifest_path, corpus_dir);
      rc.paths = {{"manifest", manifest_path},
                  {"corpus_dir", dir.string()},
                  {"estimates_dir", estimates_dir},
                  {"out", f.out}};
      std::vector<VideoResult> videos;
      for (const auto& r : read_manifest(manifest_path)) {
        const auto pipe = pipeline_for(rc, r.config.fs);
        auto ppg = read_csv_trace(dir / r.groundtruth_path, r.groundtruth_fs);
        if (std::abs(ppg.fs - pipe.fs) > 1e-9 * pipe.fs) ppg = downsample_groundtruth(ppg, pipe.fs);
        const auto gt = groundtruth_hr(ppg, rc.windows, pipe);
        const auto est =
            read_estimates_csv(fs::path(estimates_dir) / (r.id + ".estimates.csv"));
        videos.push_back({r.id, mae_for_method(est, gt, Method::Baseline),
                          mae_for_method(est, gt, Method::Quality)});
      }
      const auto report = corpus_report(videos);
      io::write_file_atomic(out_path, format_report_json(report));
      auto text_path = out_path;
      text_path.replace_extension(".txt");
      io::write_file_atomic(text_path, format_report_text(report));
      write_echo(rc, out_path, false);
      out << format_report_text(report);
    } else if (make_manifest->parsed()) {
      auto rc = resolve("make-manifest", make_manifest, f);
      rc.paths = {{"out", f.out}};
      std::vector<CorpusRecord> records;
      if (kind == "clean")
        records = clean_corpus(count, rc.seed);
      else if (kind == "burst")
        records = burst_corpus(count, rc.seed);
      else if (kind == "reference")
        records = default_reference_manifest();
      else
        fail(ErrorKind::BadArguments, "kind must be clean, burst or reference");
      write_manifest(out_path, records);
      write_echo(rc, out_path, false);
      out << "wrote " << records.size() << " records to " << f.out << "\n";
    }
  } catch (const Error& e) {
    err << "rppg: error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "rppg: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"rppg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace rppg::cli
