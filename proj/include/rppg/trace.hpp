#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rppg {

// Uniformly sampled scalar series. Holds both camera traces and reference PPG.
// gap_mask[i] is true where sample i was missing at ingestion time; repaired
// traces keep the mask for diagnostics.
struct SampleTrace {
  std::vector<double> samples;
  std::vector<bool> gap_mask;
  double fs = 0.0;
  double t0 = 0.0;

  SampleTrace() = default;
  SampleTrace(std::vector<double> values, double fs, double t0 = 0.0);
  SampleTrace(std::vector<double> values, std::vector<bool> gaps, double fs,
              double t0 = 0.0);

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept {
    return static_cast<double>(samples.size()) / fs;
  }
  std::size_t gap_count() const noexcept;
  bool has_gaps() const noexcept { return gap_count() > 0; }
};

struct RoiBox {
  std::uint32_t frame_index = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t w = 0;
  std::int64_t h = 0;
};

// Decoded RFS container. Frames are row-major 8-bit grayscale, width*height
// bytes each, stored back to back in `pixels`.
struct FrameStream {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t fps_numerator = 0;
  std::uint32_t fps_denominator = 1;
  std::uint32_t count = 0;
  std::vector<std::uint8_t> pixels;

  double fps() const noexcept {
    return static_cast<double>(fps_numerator) / fps_denominator;
  }
  std::size_t frame_bytes() const noexcept {
    return static_cast<std::size_t>(width) * height;
  }
  std::span<const std::uint8_t> frame(std::size_t index) const;
};

/// Parses an RFS file. Throws MalformedHeader, UnsupportedVersion or
/// TruncatedPayload.
FrameStream read_frame_stream(const std::filesystem::path& path);
FrameStream parse_frame_stream(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_frame_stream(const FrameStream& frames);
void write_frame_stream(const std::filesystem::path& path,
                        const FrameStream& frames);

/// Reads an ROI sidecar CSV ("frame,x,y,w,h" header, one row per frame).
std::vector<RoiBox> read_roi_sidecar(const std::filesystem::path& path);
void write_roi_sidecar(const std::filesystem::path& path,
                       std::span<const RoiBox> rois);

/// Mean pixel intensity inside each frame's ROI. Frames without an ROI row
/// become gaps holding NaN.
SampleTrace roi_mean_trace(const FrameStream& frames,
                           std::span<const RoiBox> rois);

/// One value per line; blank or "nan" lines become gaps.
SampleTrace read_csv_trace(const std::filesystem::path& path, double fs);
SampleTrace parse_csv_trace(std::string_view text, double fs);
std::string format_csv_trace(const SampleTrace& trace);
void write_csv_trace(const std::filesystem::path& path,
                     const SampleTrace& trace);

/// Non-overlapping block means; fs must be an integer multiple of target_fs.
SampleTrace downsample_groundtruth(const SampleTrace& trace,
                                   double target_fs = 20.0);

inline constexpr double kMaxGapFraction = 0.2;

/// Linear interpolation across interior gaps, nearest-value fill at the ends.
/// Non-finite samples are treated as gaps.
SampleTrace interpolate_gaps(const SampleTrace& trace);

}  // namespace rppg
