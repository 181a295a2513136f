#pragma once

#include <cstdint>
#include <string>

#include "cafbp/frame_io.hpp"

namespace cafbp::fixtures {

inline std::string data_path(const std::string& name) { return std::string(CAFBP_TEST_DATA) + "/" + name; }

// 128x128 luma of flat rectangles and a disc on a mid-gray background.
FramePlane piecewise_constant_frame(int shift = 0);

// Adds seeded Gaussian noise, rounding half-up and clamping to [0, 255].
FramePlane add_awgn(const FramePlane& clean, double sigma, std::uint64_t seed);

// Clean 4:2:0 sequence of piecewise-constant frames drifting one pixel per frame.
VideoSequence clean_sequence(int frames = 4);
// clean_sequence with luma AWGN sigma 25 (seed 1234) and chroma AWGN sigma 3.
VideoSequence noisy_sequence(int frames = 4);

// Smooth gradients plus mild texture: content for rate tests.
FramePlane textured_frame(int width, int height, std::uint64_t seed);

FramePlane random_frame(int width, int height, std::uint64_t seed);

}  // namespace cafbp::fixtures
