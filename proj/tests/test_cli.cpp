#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "rppg/cli.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/io_util.hpp"
#include "rppg/simulator.hpp"
#include "test_util.hpp"

using namespace rppg;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_pulse(const TempDir& dir, const std::string& name, double bpm, double duration) {
  SimulationConfig cfg;
  cfg.hr_trajectory = {{0.0, bpm}};
  cfg.pulse_harmonics = {1.0, 0.4, 0.2};
  cfg.noise_sigma = 0.05;
  cfg.duration = duration;
  cfg.seed = 5;
  const auto path = dir / name;
  write_csv_trace(path, synth_pulse(cfg).trace);
  return path;
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("estimate on a clean 72 bpm trace") {
  TempDir dir("cli-est");
  const auto trace = write_pulse(dir, "t.csv", 72, 60);
  const auto before = io::read_file(trace);
  const auto r = run({"estimate", "--trace", trace.string(), "--out", (dir / "e.csv").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto est = read_estimates_csv(dir / "e.csv");
  REQUIRE(est.size() == 108);
  std::size_t baseline = 0;
  for (const auto& e : est) {
    REQUIRE(e.hr_bpm);
    CHECK(std::abs(*e.hr_bpm - 72.0) <= 1.0);
    baseline += e.method == Method::Baseline;
  }
  CHECK(baseline == 54);
  CHECK(io::read_file(trace) == before);
  CHECK(fs::exists(dir / "e.csv.config.json"));

  const auto only = run({"estimate", "--trace", trace.string(), "--method", "baseline", "--out",
                         (dir / "b.csv").string()});
  REQUIRE(only.code == 0);
  CHECK(read_estimates_csv(dir / "b.csv").size() == 54);
}

TEST_CASE("estimate on a 6 s trace fails") {
  TempDir dir("cli-short");
  const auto trace = write_pulse(dir, "t.csv", 72, 6);
  const auto r = run({"estimate", "--trace", trace.string(), "--out", (dir / "e.csv").string()});
  CHECK(r.code == cli::exit_code(ErrorKind::TraceTooShort));
  CHECK(r.code != 0);
  CHECK(r.err.find("trace too short") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "e.csv"));
}

TEST_CASE("simulate is byte-identical across runs") {
  TempDir dir("cli-sim");
  const auto manifest = dir / "m.jsonl";
  write_manifest(manifest, burst_corpus(2, 77, 30.0));
  const auto a = run({"simulate", "--manifest", manifest.string(), "--out", (dir / "a").string()});
  const auto b = run({"simulate", "--manifest", manifest.string(), "--out", (dir / "b").string()});
  REQUIRE_MESSAGE(a.code == 0, a.err);
  REQUIRE(b.code == 0);
  const auto fa = files_under(dir / "a");
  REQUIRE(fa == files_under(dir / "b"));
  CHECK(fa.size() == 2 * 3 + 2);  // three files per trace, manifest, echo
  for (const auto& f : fa) {
    if (f == "run_config.json") continue;  // records the output path
    CHECK(io::read_file(dir / "a" / f) == io::read_file(dir / "b" / f));
  }
}

TEST_CASE("config precedence and echo") {
  TempDir dir("cli-cfg");
  const auto trace = write_pulse(dir, "t.csv", 90, 20);
  io::write_file_atomic(dir / "c.json", R"({"window": 6, "ma_size": 5, "subwindows": [4, 5]})");
  const auto r = run({"estimate", "--trace", trace.string(), "--config", (dir / "c.json").string(),
                      "--window", "8", "--subwindows", "5,6", "--out", (dir / "e.csv").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto echo = nlohmann::json::parse(io::read_file(dir / "e.csv.config.json"));
  CHECK(echo["window"] == 8.0);
  CHECK(echo["ma_size"] == 5);
  CHECK(echo["stride"] == 1.0);
  CHECK(echo["subwindows"] == std::vector<double>{5.0, 6.0});
  CHECK(echo["command"] == "estimate");
  CHECK(echo["method"] == "both");
  CHECK(read_estimates_csv(dir / "e.csv").size() == 2 * 13);

  // The echo alone reproduces the run.
  const auto again = run({"estimate", "--trace", trace.string(), "--config",
                          (dir / "e.csv.config.json").string(), "--out", (dir / "f.csv").string()});
  REQUIRE(again.code == 0);
  CHECK(io::read_file(dir / "f.csv") == io::read_file(dir / "e.csv"));
}

TEST_CASE("extract turns frames and ROIs into a trace") {
  TempDir dir("cli-extract");
  FrameStream frames;
  frames.width = 2;
  frames.height = 2;
  frames.fps_numerator = 20;
  frames.count = 3;
  frames.pixels = {10, 20, 30, 40, 0, 0, 0, 0, 1, 2, 3, 4};
  write_frame_stream(dir / "f.rfs", frames);
  const std::vector<RoiBox> rois{{0, 0, 0, 2, 2}, {2, 1, 1, 1, 1}};
  write_roi_sidecar(dir / "r.csv", rois);
  const auto r = run({"extract", "--frames", (dir / "f.rfs").string(), "--rois",
                      (dir / "r.csv").string(), "--out", (dir / "t.csv").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(io::read_file(dir / "t.csv") == "25\nnan\n4\n");

  auto bytes = serialize_frame_stream(frames);
  bytes[0] = 'X';
  io::write_file_atomic(dir / "bad.rfs", std::string(bytes.begin(), bytes.end()));
  const auto bad = run({"extract", "--frames", (dir / "bad.rfs").string(), "--rois",
                        (dir / "r.csv").string(), "--out", (dir / "u.csv").string()});
  CHECK(bad.code == cli::exit_code(ErrorKind::MalformedHeader));
  CHECK(bad.err.find("malformed header") != std::string::npos);
}

TEST_CASE("calibrate and evaluate on a small corpus") {
  TempDir dir("cli-eval");
  const auto manifest = dir / "m.jsonl";
  auto records = burst_corpus(2, 9, 30.0);
  const auto clean = clean_corpus(1, 10, 30.0);
  records.insert(records.end(), clean.begin(), clean.end());
  write_manifest(manifest, records);
  REQUIRE(run({"simulate", "--manifest", manifest.string(), "--out", (dir / "c").string()}).code == 0);
  const auto corpus_manifest = (dir / "c" / "manifest.jsonl").string();

  const auto cal = run({"calibrate", "--manifest", corpus_manifest, "--out", (dir / "cal.csv").string()});
  REQUIRE_MESSAGE(cal.code == 0, cal.err);
  CHECK_NOTHROW(read_calibration(dir / "cal.csv"));

  const auto est = run({"estimate", "--manifest", corpus_manifest, "--calibration",
                        (dir / "cal.csv").string(), "--out", (dir / "est").string()});
  REQUIRE_MESSAGE(est.code == 0, est.err);
  for (const auto& r : records) CHECK(fs::exists(dir / "est" / (r.id + ".estimates.csv")));

  const auto ev = run({"evaluate", "--manifest", corpus_manifest, "--estimates-dir",
                       (dir / "est").string(), "--out", (dir / "report.json").string()});
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  const auto report = parse_report_json(io::read_file(dir / "report.json"));
  CHECK(report.per_video.size() == 3);
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(report == corpus_report(report.per_video));
}

TEST_CASE("exit codes") {
  std::set<int> codes;
  for (int k = static_cast<int>(ErrorKind::Io); k <= static_cast<int>(ErrorKind::BadArguments); ++k) {
    const int code = cli::exit_code(static_cast<ErrorKind>(k));
    CHECK(code > 2);
    CHECK(code < 126);
    codes.insert(code);
  }
  CHECK(codes.size() == static_cast<std::size_t>(ErrorKind::BadArguments));

  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"estimate", "--trace", "x.csv"}).code == 2);  // --out missing
  TempDir dir("cli-codes");
  CHECK(run({"estimate", "--trace", (dir / "missing.csv").string(), "--out", (dir / "e.csv").string()})
            .code == cli::exit_code(ErrorKind::Io));
  const auto trace = write_pulse(dir, "t.csv", 72, 10);
  CHECK(run({"estimate", "--trace", trace.string(), "--ma-size", "4", "--out", (dir / "e.csv").string()})
            .code == cli::exit_code(ErrorKind::BadPipelineConfig));
  CHECK(run({"estimate", "--trace", trace.string(), "--subwindows", "9", "--out", (dir / "e.csv").string()})
            .code == cli::exit_code(ErrorKind::BadWindowSpec));
}
