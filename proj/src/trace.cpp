#include "rppg/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "rppg/error.hpp"
#include "rppg/io_util.hpp"

namespace rppg {

namespace {

constexpr char kRfsMagic[4] = {'R', 'F', 'S', '1'};
constexpr std::size_t kRfsHeaderBytes = 4 + 5 * 4;

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8)
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFFu));
}

bool is_nan_token(std::string_view token) {
  if (token.size() != 3) return false;
  auto lower = [](char c) { return static_cast<char>(c | 0x20); };
  return lower(token[0]) == 'n' && lower(token[1]) == 'a' &&
         lower(token[2]) == 'n';
}

}  // namespace

SampleTrace::SampleTrace(std::vector<double> values, double rate, double start)
    : samples(std::move(values)), gap_mask(samples.size(), false), fs(rate),
      t0(start) {
  if (!(fs > 0.0)) fail(ErrorKind::BadConfig, "sampling rate must be > 0");
}

SampleTrace::SampleTrace(std::vector<double> values, std::vector<bool> gaps,
                         double rate, double start)
    : samples(std::move(values)), gap_mask(std::move(gaps)), fs(rate), t0(start) {
  if (!(fs > 0.0)) fail(ErrorKind::BadConfig, "sampling rate must be > 0");
  if (samples.size() != gap_mask.size())
    fail(ErrorKind::LengthMismatch, "samples and gap mask differ in length");
}

std::size_t SampleTrace::gap_count() const noexcept {
  return static_cast<std::size_t>(
      std::count(gap_mask.begin(), gap_mask.end(), true));
}

std::span<const std::uint8_t> FrameStream::frame(std::size_t index) const {
  if (index >= count) fail(ErrorKind::BadArguments, "frame index out of range");
  return std::span<const std::uint8_t>(pixels).subspan(index * frame_bytes(),
                                                       frame_bytes());
}

FrameStream parse_frame_stream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) fail(ErrorKind::MalformedHeader, "file shorter than magic");
  if (std::memcmp(bytes.data(), kRfsMagic, 3) != 0)
    fail(ErrorKind::MalformedHeader, "bad magic");
  if (bytes[3] != static_cast<std::uint8_t>(kRfsMagic[3]))
    fail(ErrorKind::UnsupportedVersion,
         std::string("RFS version '") + static_cast<char>(bytes[3]) + "'");
  if (bytes.size() < kRfsHeaderBytes)
    fail(ErrorKind::MalformedHeader, "header truncated");

  FrameStream fs;
  const auto* p = bytes.data() + 4;
  fs.width = read_u32_le(p);
  fs.height = read_u32_le(p + 4);
  fs.fps_numerator = read_u32_le(p + 8);
  fs.fps_denominator = read_u32_le(p + 12);
  fs.count = read_u32_le(p + 16);
  if (fs.width == 0 || fs.height == 0)
    fail(ErrorKind::MalformedHeader, "zero frame dimension");
  if (fs.fps_numerator == 0 || fs.fps_denominator == 0)
    fail(ErrorKind::MalformedHeader, "frame rate must be > 0");

  const std::uint64_t payload = static_cast<std::uint64_t>(fs.count) *
                                fs.width * static_cast<std::uint64_t>(fs.height);
  const std::uint64_t available = bytes.size() - kRfsHeaderBytes;
  if (available < payload)
    fail(ErrorKind::TruncatedPayload,
         "expected " + std::to_string(payload) + " payload bytes, found " +
             std::to_string(available));
  if (available > payload)
    fail(ErrorKind::MalformedHeader, "trailing bytes after last frame");
  fs.pixels.assign(bytes.begin() + kRfsHeaderBytes, bytes.end());
  return fs;
}

FrameStream read_frame_stream(const std::filesystem::path& path) {
  const auto raw = io::read_file(path);
  return parse_frame_stream(std::span(
      reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

std::vector<std::uint8_t> serialize_frame_stream(const FrameStream& frames) {
  if (frames.pixels.size() != frames.frame_bytes() * frames.count)
    fail(ErrorKind::BadArguments, "pixel buffer does not match header");
  std::vector<std::uint8_t> out;
  out.reserve(kRfsHeaderBytes + frames.pixels.size());
  out.insert(out.end(), kRfsMagic, kRfsMagic + 4);
  append_u32_le(out, frames.width);
  append_u32_le(out, frames.height);
  append_u32_le(out, frames.fps_numerator);
  append_u32_le(out, frames.fps_denominator);
  append_u32_le(out, frames.count);
  out.insert(out.end(), frames.pixels.begin(), frames.pixels.end());
  return out;
}

void write_frame_stream(const std::filesystem::path& path,
                        const FrameStream& frames) {
  const auto bytes = serialize_frame_stream(frames);
  io::write_file_atomic(
      path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                             bytes.size()));
}

std::vector<RoiBox> read_roi_sidecar(const std::filesystem::path& path) {
  const auto text = io::read_file(path);
  const auto lines = io::split_lines(text);
  if (lines.empty() || io::trim(lines[0]) != "frame,x,y,w,h")
    fail(ErrorKind::MalformedSidecar, "missing header 'frame,x,y,w,h'");
  std::vector<RoiBox> rois;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto fields = io::split(lines[i], ',');
    const auto where = "line " + std::to_string(i + 1);
    if (fields.size() != 5) fail(ErrorKind::MalformedSidecar, where + ": expected 5 fields");
    long long v[5];
    for (int k = 0; k < 5; ++k) {
      auto parsed = io::parse_int(fields[k]);
      if (!parsed) fail(ErrorKind::MalformedSidecar, where + ": non-integer field");
      v[k] = *parsed;
    }
    if (v[0] < 0 || v[0] > std::numeric_limits<std::uint32_t>::max())
      fail(ErrorKind::MalformedSidecar, where + ": bad frame index");
    rois.push_back({static_cast<std::uint32_t>(v[0]), v[1], v[2], v[3], v[4]});
  }
  return rois;
}

void write_roi_sidecar(const std::filesystem::path& path,
                       std::span<const RoiBox> rois) {
  std::string out = "frame,x,y,w,h\n";
  for (const auto& r : rois) {
    out += std::to_string(r.frame_index) + ',' + std::to_string(r.x) + ',' +
           std::to_string(r.y) + ',' + std::to_string(r.w) + ',' +
           std::to_string(r.h) + '\n';
  }
  io::write_file_atomic(path, out);
}

SampleTrace roi_mean_trace(const FrameStream& frames,
                           std::span<const RoiBox> rois) {
  std::vector<double> values(frames.count,
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> gaps(frames.count, true);
  std::int64_t previous = -1;
  for (const auto& roi : rois) {
    if (static_cast<std::int64_t>(roi.frame_index) <= previous)
      fail(ErrorKind::MalformedSidecar,
           "frame indices must be strictly increasing (frame " +
               std::to_string(roi.frame_index) + ")");
    previous = roi.frame_index;
    const bool inside = roi.frame_index < frames.count && roi.w > 0 &&
                        roi.h > 0 && roi.x >= 0 && roi.y >= 0 &&
                        roi.x + roi.w <= frames.width &&
                        roi.y + roi.h <= frames.height;
    if (!inside)
      fail(ErrorKind::RoiOutOfBounds,
           "roi out of bounds at frame " + std::to_string(roi.frame_index));

    const auto frame = frames.frame(roi.frame_index);
    std::uint64_t sum = 0;
    for (std::int64_t row = roi.y; row < roi.y + roi.h; ++row) {
      const auto* line = frame.data() + row * frames.width;
      for (std::int64_t col = roi.x; col < roi.x + roi.w; ++col) sum += line[col];
    }
    values[roi.frame_index] =
        static_cast<double>(sum) / static_cast<double>(roi.w * roi.h);
    gaps[roi.frame_index] = false;
  }
  return SampleTrace(std::move(values), std::move(gaps), frames.fps());
}

SampleTrace parse_csv_trace(std::string_view text, double fs) {
  std::vector<double> values;
  std::vector<bool> gaps;
  const auto lines = io::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto token = io::trim(lines[i]);
    if (token.empty() || is_nan_token(token)) {
      values.push_back(std::numeric_limits<double>::quiet_NaN());
      gaps.push_back(true);
      continue;
    }
    auto parsed = io::parse_double(token);
    if (!parsed || !std::isfinite(*parsed))
      fail(ErrorKind::NonNumericLine,
           "non-numeric value on line " + std::to_string(i + 1));
    values.push_back(*parsed);
    gaps.push_back(false);
  }
  return SampleTrace(std::move(values), std::move(gaps), fs);
}

SampleTrace read_csv_trace(const std::filesystem::path& path, double fs) {
  return parse_csv_trace(io::read_file(path), fs);
}

std::string format_csv_trace(const SampleTrace& trace) {
  std::string out;
  out.reserve(trace.size() * 20);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.gap_mask[i] || !std::isfinite(trace.samples[i]))
      out += "nan";
    else
      out += io::format_double(trace.samples[i]);
    out += '\n';
  }
  return out;
}

void write_csv_trace(const std::filesystem::path& path,
                     const SampleTrace& trace) {
  io::write_file_atomic(path, format_csv_trace(trace));
}

SampleTrace downsample_groundtruth(const SampleTrace& trace, double target_fs) {
  if (!(target_fs > 0.0))
    fail(ErrorKind::NonIntegerRatio, "target rate must be > 0");
  const double ratio = trace.fs / target_fs;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
    fail(ErrorKind::NonIntegerRatio,
         io::format_double(trace.fs) + " Hz is not an integer multiple of " +
             io::format_double(target_fs) + " Hz");
  const auto block = static_cast<std::size_t>(rounded);
  const std::size_t out_len = trace.size() / block;

  std::vector<double> values(out_len);
  std::vector<bool> gaps(out_len, false);
  for (std::size_t b = 0; b < out_len; ++b) {
    double sum = 0.0;
    std::size_t valid = 0;
    for (std::size_t i = b * block; i < (b + 1) * block; ++i) {
      if (trace.gap_mask[i] || !std::isfinite(trace.samples[i])) continue;
      sum += trace.samples[i];
      ++valid;
    }
    if (valid == 0) {
      values[b] = std::numeric_limits<double>::quiet_NaN();
      gaps[b] = true;
    } else {
      values[b] = sum / static_cast<double>(valid);
    }
  }
  return SampleTrace(std::move(values), std::move(gaps), target_fs, trace.t0);
}

SampleTrace interpolate_gaps(const SampleTrace& trace) {
  const std::size_t n = trace.size();
  std::vector<bool> missing(n);
  std::size_t missing_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    missing[i] = trace.gap_mask[i] || !std::isfinite(trace.samples[i]);
    missing_count += missing[i];
  }
  if (missing_count == 0) return trace;
  if (missing_count == n ||
      static_cast<double>(missing_count) > kMaxGapFraction * static_cast<double>(n))
    fail(ErrorKind::TooManyGaps,
         std::to_string(missing_count) + " of " + std::to_string(n) +
             " samples missing");

  SampleTrace out = trace;
  for (std::size_t i = 0; i < n; ++i) out.gap_mask[i] = out.gap_mask[i] || missing[i];

  std::size_t i = 0;
  std::ptrdiff_t last_valid = -1;
  while (i < n) {
    if (!missing[i]) {
      last_valid = static_cast<std::ptrdiff_t>(i);
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < n && missing[run_end]) ++run_end;
    if (last_valid < 0) {
      for (std::size_t k = i; k < run_end; ++k) out.samples[k] = trace.samples[run_end];
    } else if (run_end == n) {
      for (std::size_t k = i; k < run_end; ++k) out.samples[k] = trace.samples[last_valid];
    } else {
      const double left = trace.samples[last_valid];
      const double right = trace.samples[run_end];
      const double span = static_cast<double>(run_end) - static_cast<double>(last_valid);
      for (std::size_t k = i; k < run_end; ++k) {
        const double frac = (static_cast<double>(k) - static_cast<double>(last_valid)) / span;
        out.samples[k] = left + frac * (right - left);
      }
    }
    i = run_end;
  }
  return out;
}

}  // namespace rppg
