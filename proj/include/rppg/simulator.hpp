#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rppg/dsp.hpp"
#include "rppg/estimator.hpp"
#include "rppg/quality.hpp"
#include "rppg/trace.hpp"

namespace rppg {

// mt19937_64 stream with a Box-Muller normal sampler. Both are fully
// specified here, so corpora reproduce bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();  // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct HrKnot {
  double t = 0.0;
  double bpm = 72.0;
};

struct SimulationConfig {
  double fs = 20.0;
  double duration = 60.0;
  std::vector<HrKnot> hr_trajectory{{0.0, 72.0}};  // piecewise linear
  std::vector<double> pulse_harmonics{1.0};        // a1, a2, ...
  double drift_amplitude = 0.0;
  double drift_period = 20.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double hr_at(double t) const;
  // Cycles elapsed at t: integral of hr(s)/60 over [0, t].
  double phase_at(double t) const;
};

struct SynthResult {
  SampleTrace trace;
  std::vector<double> hr_per_second;  // ground truth at t = 0, 1, 2, ...
};

/// Harmonic pulse with integrated phase, sinusoidal drift and seeded
/// Gaussian noise.
SynthResult synth_pulse(const SimulationConfig& cfg);

/// Noise- and drift-free pulse at an arbitrary rate: the fingerclip
/// reference channel.
SampleTrace synth_reference_ppg(const SimulationConfig& cfg, double fs);

enum class ArtifactKind { MotionBurst, IlluminationStep, Vibration, Dropout };

std::string_view to_string(ArtifactKind kind);
ArtifactKind parse_artifact_kind(std::string_view text);

struct ArtifactSpec {
  ArtifactKind kind = ArtifactKind::MotionBurst;
  double start = 0.0;
  double length = 1.0;
  double magnitude = 1.0;  // in units of the clean pulse amplitude

  bool overlaps(double from, double to) const noexcept {
    return start < to && from < start + length;
  }
};

/// Adds the listed artifacts. Magnitudes are multiplied by clean_amplitude.
SampleTrace inject_artifacts(const SampleTrace& trace,
                             std::span<const ArtifactSpec> artifacts,
                             std::uint64_t seed, double clean_amplitude = 1.0);

// One corpus entry. Paths are relative to the corpus directory.
struct CorpusRecord {
  std::string id;
  SimulationConfig config;
  std::vector<ArtifactSpec> artifacts;
  double groundtruth_fs = 500.0;
  std::string trace_path;
  std::string groundtruth_path;
  std::string hr_path;
};

struct SimulatedTrace {
  SampleTrace trace;         // camera channel with artifacts
  SampleTrace groundtruth;   // clean reference PPG at groundtruth_fs
  std::vector<double> hr_per_second;
};

SimulatedTrace simulate(const CorpusRecord& record);

/// Writes trace, reference PPG and HR series for every record under dir.
void write_corpus(std::span<const CorpusRecord> records,
                  const std::filesystem::path& dir);

// Manifest: JSON Lines, one record per line.
std::vector<CorpusRecord> parse_manifest(std::string_view text);
std::string format_manifest(std::span<const CorpusRecord> records);
std::vector<CorpusRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    std::span<const CorpusRecord> records);

// Seeded corpora. Clean: constant HR drawn from 45-175 bpm, fundamental plus
// two harmonics, noise 0.05 a1. Burst: three 2 s motion bursts of magnitude
// 10 and one illumination step per trace.
std::vector<CorpusRecord> clean_corpus(std::size_t count, std::uint64_t seed,
                                       double duration = 60.0);
std::vector<CorpusRecord> burst_corpus(std::size_t count, std::uint64_t seed,
                                       double duration = 60.0);
/// Calibration reference: clean and burst traces from a dedicated seed.
std::vector<CorpusRecord> default_reference_manifest();

struct ReferenceSpectrum {
  PowerSpectrum spectrum;
  bool corrupted = false;
};

/// Distinct subwindow spectra of every window of every record, labelled
/// corrupted when the subwindow overlaps any artifact.
std::vector<ReferenceSpectrum> reference_spectra(
    std::span<const CorpusRecord> records, std::span<const SampleTrace> traces,
    const WindowSpec& spec, const PipelineConfig& cfg);

/// Per-feature mean and population standard deviation (log rp), sigma
/// floored at kSigmaFloor. Spectra without power are skipped.
CalibrationParams calibrate(std::span<const ReferenceSpectrum> reference);

}  // namespace rppg
