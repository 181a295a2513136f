#include "cafbp/frame_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace cafbp {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::UnsupportedColorSpace: return "UnsupportedColorSpace";
    case Errc::TruncatedFrame: return "TruncatedFrame";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ThresholdOrderInvalid: return "ThresholdOrderInvalid";
    case Errc::BlockTooSmall: return "BlockTooSmall";
    case Errc::UnsupportedSize: return "UnsupportedSize";
    case Errc::NotPowerOfTwo: return "NotPowerOfTwo";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ReservedRunCollision: return "ReservedRunCollision";
    case Errc::TruncatedStream: return "TruncatedStream";
    case Errc::MalformedStream: return "MalformedStream";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::IoFailure: return "IoFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

FramePlane::FramePlane(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw Error(Errc::InvalidArgument, "plane dimensions must be positive");
  samples.assign(static_cast<std::size_t>(w) * h, fill);
}

FramePlane::FramePlane(int w, int h, std::vector<std::uint8_t> data)
    : width(w), height(h), samples(std::move(data)) {
  if (w <= 0 || h <= 0) throw Error(Errc::InvalidArgument, "plane dimensions must be positive");
  if (samples.size() != static_cast<std::size_t>(w) * h)
    throw Error(Errc::SizeMismatch, "sample count does not match width*height");
}

void VideoSequence::validate() const {
  for (const auto& f : frames) {
    if (f.width != width() || f.height != height())
      throw Error(Errc::DimensionMismatch, "frames differ in size");
  }
  if (has_chroma()) {
    if (chroma.size() != frames.size())
      throw Error(Errc::DimensionMismatch, "chroma pair count differs from frame count");
    const int cw = chroma_dim(width()), ch = chroma_dim(height());
    for (const auto& c : chroma) {
      if (c.u.width != cw || c.u.height != ch || c.v.width != cw || c.v.height != ch)
        throw Error(Errc::DimensionMismatch, "chroma plane is not 4:2:0 sized");
    }
  } else if (!chroma.empty()) {
    throw Error(Errc::DimensionMismatch, "mono sequence carries chroma planes");
  }
}

double PsnrValue::db() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : db_;
}

std::string PsnrValue::to_string(int decimals) const {
  if (infinite_) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, db_);
  return buf;
}

namespace {

std::size_t frame_bytes(int w, int h, ChromaMode mode) {
  std::size_t n = static_cast<std::size_t>(w) * h;
  if (mode == ChromaMode::Yuv420) n += 2 * static_cast<std::size_t>(chroma_dim(w)) * chroma_dim(h);
  return n;
}

// Reads one frame payload starting at `pos`; caller guarantees enough bytes.
void take_frame(std::span<const std::uint8_t> bytes, std::size_t pos, int w, int h,
                ChromaMode mode, VideoSequence& seq) {
  auto slice = [&](std::size_t n) {
    std::vector<std::uint8_t> out(bytes.begin() + pos, bytes.begin() + pos + n);
    pos += n;
    return out;
  };
  seq.frames.emplace_back(w, h, slice(static_cast<std::size_t>(w) * h));
  if (mode == ChromaMode::Yuv420) {
    const int cw = chroma_dim(w), ch = chroma_dim(h);
    const std::size_t cn = static_cast<std::size_t>(cw) * ch;
    ChromaPair pair;
    pair.u = FramePlane(cw, ch, slice(cn));
    pair.v = FramePlane(cw, ch, slice(cn));
    seq.chroma.push_back(std::move(pair));
  }
}

int parse_positive(const std::string& token, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(token, &used);
    if (used != token.size() || v <= 0 || v > std::numeric_limits<int>::max()) throw 0;
    return static_cast<int>(v);
  } catch (...) {
    throw Error(Errc::MalformedHeader, std::string("invalid ") + what + " token");
  }
}

}  // namespace

VideoSequence parse_y4m(std::span<const std::uint8_t> bytes) {
  static constexpr std::string_view kSignature = "YUV4MPEG2";
  std::size_t eol = 0;
  while (eol < bytes.size() && bytes[eol] != '\n') ++eol;
  if (eol == bytes.size()) throw Error(Errc::MalformedHeader, "missing header line");
  const std::string header(bytes.begin(), bytes.begin() + eol);

  std::istringstream in(header);
  std::string token;
  in >> token;
  if (token != kSignature) throw Error(Errc::MalformedHeader, "missing YUV4MPEG2 signature");

  int w = 0, h = 0;
  bool have_rate = false;
  Rational rate;
  ChromaMode mode = ChromaMode::Yuv420;
  while (in >> token) {
    const char tag = token[0];
    const std::string value = token.substr(1);
    switch (tag) {
      case 'W': w = parse_positive(value, "W"); break;
      case 'H': h = parse_positive(value, "H"); break;
      case 'F': {
        const auto colon = value.find(':');
        if (colon == std::string::npos) throw Error(Errc::MalformedHeader, "invalid F token");
        rate.num = static_cast<std::uint32_t>(parse_positive(value.substr(0, colon), "F"));
        rate.den = static_cast<std::uint32_t>(parse_positive(value.substr(colon + 1), "F"));
        have_rate = true;
        break;
      }
      case 'C':
        if (value == "mono") {
          mode = ChromaMode::Mono;
        } else if (value == "420" || value == "420jpeg" || value == "420paldv" ||
                   value == "420mpeg2") {
          mode = ChromaMode::Yuv420;
        } else {
          throw Error(Errc::UnsupportedColorSpace, "color space C" + value);
        }
        break;
      case 'I':
        if (value != "p" && value != "?")
          throw Error(Errc::UnsupportedColorSpace, "interlaced content");
        break;
      default:  // A (aspect), X (comments) and unknown tags are ignored.
        break;
    }
  }
  if (w == 0 || h == 0 || !have_rate)
    throw Error(Errc::MalformedHeader, "header lacks W, H or F");

  VideoSequence seq;
  seq.frame_rate = rate;
  seq.mode = mode;
  const std::size_t payload = frame_bytes(w, h, mode);
  std::size_t pos = eol + 1;
  while (pos < bytes.size()) {
    static constexpr std::string_view kFrame = "FRAME";
    if (bytes.size() - pos < kFrame.size() ||
        !std::equal(kFrame.begin(), kFrame.end(), bytes.begin() + pos))
      throw Error(Errc::TruncatedFrame, "expected FRAME marker");
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos == bytes.size()) throw Error(Errc::TruncatedFrame, "unterminated FRAME line");
    ++pos;
    if (bytes.size() - pos < payload) throw Error(Errc::TruncatedFrame, "stream ends mid-frame");
    take_frame(bytes, pos, w, h, mode, seq);
    pos += payload;
  }
  return seq;
}

std::vector<std::uint8_t> serialize_y4m(const VideoSequence& seq) {
  seq.validate();
  std::string header = "YUV4MPEG2 W" + std::to_string(seq.width()) + " H" +
                       std::to_string(seq.height()) + " F" + std::to_string(seq.frame_rate.num) +
                       ":" + std::to_string(seq.frame_rate.den) + " Ip A1:1 " +
                       (seq.has_chroma() ? "C420jpeg" : "Cmono") + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    static constexpr std::string_view kFrame = "FRAME\n";
    out.insert(out.end(), kFrame.begin(), kFrame.end());
    const auto& y = seq.frames[i].samples;
    out.insert(out.end(), y.begin(), y.end());
    if (seq.has_chroma()) {
      out.insert(out.end(), seq.chroma[i].u.samples.begin(), seq.chroma[i].u.samples.end());
      out.insert(out.end(), seq.chroma[i].v.samples.begin(), seq.chroma[i].v.samples.end());
    }
  }
  return out;
}

VideoSequence parse_raw_yuv(std::span<const std::uint8_t> bytes, int width, int height,
                            ChromaMode mode) {
  if (width <= 0 || height <= 0) throw Error(Errc::InvalidArgument, "width/height must be > 0");
  const std::size_t payload = frame_bytes(width, height, mode);
  if (bytes.size() % payload != 0)
    throw Error(Errc::SizeMismatch, "stream length is not a multiple of the frame size");
  VideoSequence seq;
  seq.mode = mode;
  for (std::size_t pos = 0; pos < bytes.size(); pos += payload)
    take_frame(bytes, pos, width, height, mode, seq);
  return seq;
}

std::vector<std::uint8_t> serialize_raw_yuv(const VideoSequence& seq) {
  seq.validate();
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    out.insert(out.end(), seq.frames[i].samples.begin(), seq.frames[i].samples.end());
    if (seq.has_chroma()) {
      out.insert(out.end(), seq.chroma[i].u.samples.begin(), seq.chroma[i].u.samples.end());
      out.insert(out.end(), seq.chroma[i].v.samples.begin(), seq.chroma[i].v.samples.end());
    }
  }
  return out;
}

std::uint64_t sse(const FramePlane& a, const FramePlane& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(Errc::DimensionMismatch, "planes differ in size");
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const int d = static_cast<int>(a.samples[i]) - static_cast<int>(b.samples[i]);
    acc += static_cast<std::uint64_t>(d * d);
  }
  return acc;
}

double mse(const FramePlane& a, const FramePlane& b) {
  const std::uint64_t total = sse(a, b);
  return static_cast<double>(total) / static_cast<double>(a.samples.size());
}

PsnrValue psnr_from_mse(double m) {
  if (m <= 0.0) return PsnrValue::infinite();
  return PsnrValue::finite(10.0 * std::log10(255.0 * 255.0 / m));
}

PsnrValue psnr(const FramePlane& a, const FramePlane& b) { return psnr_from_mse(mse(a, b)); }

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::IoFailure, "read failed on " + path);
  return data;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed on " + path);
}

VideoSequence load_video(const std::string& path, std::optional<int> width,
                         std::optional<int> height, ChromaMode raw_mode) {
  const auto bytes = read_file(path);
  static constexpr std::string_view kSignature = "YUV4MPEG2";
  if (bytes.size() >= kSignature.size() &&
      std::equal(kSignature.begin(), kSignature.end(), bytes.begin())) {
    auto seq = parse_y4m(bytes);
    seq.validate();
    return seq;
  }
  if (!width || !height)
    throw Error(Errc::InvalidArgument, path + " is raw YUV; --width and --height are required");
  return parse_raw_yuv(bytes, *width, *height, raw_mode);
}

}  // namespace cafbp
