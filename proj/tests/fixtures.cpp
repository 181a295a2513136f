#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "cafbp/random.hpp"

namespace cafbp::fixtures {

FramePlane piecewise_constant_frame(int shift) {
  FramePlane f(128, 128, 128);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      std::uint8_t v = 128;
      if (x >= 8 + shift && x < 56 + shift && y >= 12 && y < 60) v = 40;
      if (x >= 70 && x < 120 && y >= 20 + shift && y < 50 + shift) v = 210;
      const int dx = x - (40 + shift), dy = y - 92;
      if (dx * dx + dy * dy < 22 * 22) v = 175;
      if (x >= 78 && x < 118 && y >= 70 && y < 118 && ((x - 78) / 20 + (y - 70) / 24) % 2 == 0) v = 90;
      f.at(x, y) = v;
    }
  }
  return f;
}

FramePlane add_awgn(const FramePlane& clean, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  FramePlane out = clean;
  for (auto& s : out.samples) {
    const double v = std::floor(s + sigma * rng.normal() + 0.5);
    s = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

namespace {

FramePlane chroma_plane(int shift, std::uint8_t base, std::uint8_t accent) {
  FramePlane c(64, 64, base);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (x >= 4 + shift / 2 && x < 28 + shift / 2 && y >= 6 && y < 30) c.at(x, y) = accent;
  return c;
}

}  // namespace

VideoSequence clean_sequence(int frames) {
  VideoSequence seq;
  seq.mode = ChromaMode::Yuv420;
  seq.frame_rate = {25, 1};
  for (int i = 0; i < frames; ++i) {
    seq.frames.push_back(piecewise_constant_frame(i));
    seq.chroma.push_back({chroma_plane(i, 128, 100), chroma_plane(i, 128, 160)});
  }
  return seq;
}

VideoSequence noisy_sequence(int frames) {
  VideoSequence seq = clean_sequence(frames);
  for (int i = 0; i < frames; ++i) {
    seq.frames[i] = add_awgn(seq.frames[i], 25.0, 1234 + i);
    seq.chroma[i].u = add_awgn(seq.chroma[i].u, 3.0, 5678 + i);
    seq.chroma[i].v = add_awgn(seq.chroma[i].v, 3.0, 9012 + i);
  }
  return seq;
}

FramePlane textured_frame(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  FramePlane f(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = 128 + 60 * std::sin(x * 0.09) * std::cos(y * 0.06) + 25 * std::sin((x + 2 * y) * 0.4) +
                       8 * rng.normal();
      f.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  }
  return f;
}

FramePlane random_frame(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  FramePlane f(width, height);
  for (auto& s : f.samples) s = static_cast<std::uint8_t>(rng.bits() & 0xFF);
  return f;
}

}  // namespace cafbp::fixtures
