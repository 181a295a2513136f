#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cafbp/error.hpp"

namespace cafbp {

// 8-bit sample plane, row-major.
struct FramePlane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  FramePlane() = default;
  FramePlane(int w, int h, std::uint8_t fill = 0);
  FramePlane(int w, int h, std::vector<std::uint8_t> data);

  std::uint8_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return samples.size(); }

  friend bool operator==(const FramePlane&, const FramePlane&) = default;
};

enum class ChromaMode { Mono, Yuv420 };

struct Rational {
  std::uint32_t num = 25;
  std::uint32_t den = 1;

  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct ChromaPair {
  FramePlane u;
  FramePlane v;
  friend bool operator==(const ChromaPair&, const ChromaPair&) = default;
};

// Luma frames drive all processing; chroma (when present) is carried alongside
// at 4:2:0 size, one pair per luma frame.
struct VideoSequence {
  std::vector<FramePlane> frames;
  std::vector<ChromaPair> chroma;
  Rational frame_rate;
  ChromaMode mode = ChromaMode::Mono;

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  bool has_chroma() const { return mode == ChromaMode::Yuv420; }

  // Throws DimensionMismatch if frames disagree in size or chroma is inconsistent.
  void validate() const;

  friend bool operator==(const VideoSequence&, const VideoSequence&) = default;
};

inline int chroma_dim(int luma_dim) { return (luma_dim + 1) / 2; }

// Decibel value with a distinguished infinite state for zero MSE.
class PsnrValue {
 public:
  static PsnrValue infinite() { return PsnrValue(true, 0.0); }
  static PsnrValue finite(double db) { return PsnrValue(false, db); }

  bool is_infinite() const { return infinite_; }
  // +inf for the infinite value.
  double db() const;
  // "inf" or fixed-point with the given number of decimals.
  std::string to_string(int decimals = 4) const;

  friend bool operator==(const PsnrValue&, const PsnrValue&) = default;
  friend bool operator<(const PsnrValue& a, const PsnrValue& b) { return a.db() < b.db(); }

 private:
  PsnrValue(bool inf, double db) : infinite_(inf), db_(db) {}
  bool infinite_;
  double db_;
};

VideoSequence parse_y4m(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_y4m(const VideoSequence& seq);

VideoSequence parse_raw_yuv(std::span<const std::uint8_t> bytes, int width, int height,
                            ChromaMode mode);
std::vector<std::uint8_t> serialize_raw_yuv(const VideoSequence& seq);

std::uint64_t sse(const FramePlane& a, const FramePlane& b);
double mse(const FramePlane& a, const FramePlane& b);
PsnrValue psnr_from_mse(double mse);
PsnrValue psnr(const FramePlane& a, const FramePlane& b);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

// Loads .y4m by signature, anything else as raw YUV with the given geometry.
VideoSequence load_video(const std::string& path, std::optional<int> width = std::nullopt,
                         std::optional<int> height = std::nullopt,
                         ChromaMode raw_mode = ChromaMode::Yuv420);

}  // namespace cafbp
