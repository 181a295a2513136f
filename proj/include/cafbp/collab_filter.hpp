#pragma once

#include <span>
#include <vector>

#include "cafbp/block_engine.hpp"
#include "cafbp/frame_io.hpp"
#include "cafbp/transforms.hpp"

namespace cafbp {

struct FilterParams {
  double sigma = 25.0;
  double lambda_3d = 2.7;
  MatchParams match1{.match_threshold = 3000.0};
  MatchParams match2{.match_threshold = 400.0};
  int max_pipeline_iters = 4;
  int threads = 0;  // 0 = all cores; output does not depend on it

  void validate() const;
};

// Weighted sum of overlapping block estimates over one plane.
class Accumulator {
 public:
  Accumulator(int width, int height);

  // `block` is size*size row-major, placed with its top-left at `origin`.
  void add(std::span<const double> block, int size, Point origin, double weight);

  double numerator(int x, int y) const { return num_[index(x, y)]; }
  double denominator(int x, int y) const { return den_[index(x, y)]; }

  // numerator / denominator, rounded half-up and clamped to [0, 255]. Pixels
  // never covered fall back to `fallback`.
  FramePlane resolve(const FramePlane& fallback) const;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }
  int width_;
  int height_;
  std::vector<double> num_;
  std::vector<double> den_;
};

std::uint8_t round_to_sample(double v);

// Zeroes |c| < lambda_3d * sigma except the joint DC; returns the number of
// nonzero coefficients left.
std::size_t hard_threshold(Spectrum3D& s, double sigma, double lambda_3d);

// Scales `noisy` in place by basic^2 / (basic^2 + sigma^2); 0/0 gives 0.
// Returns the sum of squared shrink factors.
double wiener_shrink(Spectrum3D& noisy, const Spectrum3D& basic, double sigma);

// Basic estimate of frames[center] from grouping and hard thresholding.
FramePlane pass1_basic_estimate(std::span<const FramePlane> noisy, int center,
                                const FilterParams& p);

// Final estimate of noisy[center]: groups are found on `basic` (one plane per
// noisy frame) and the noisy stack is Wiener-shrunk against the basic stack.
FramePlane pass2_final_estimate(std::span<const FramePlane> noisy,
                                std::span<const FramePlane> basic, int center,
                                const FilterParams& p);

// Both passes for frames[index] using its temporal neighbors.
FramePlane aegbm3d_denoise(std::span<const FramePlane> frames, int index, const FilterParams& p);

// Both passes for every frame, sharing the basic estimates.
std::vector<FramePlane> denoise_sequence(std::span<const FramePlane> frames, const FilterParams& p);

}  // namespace cafbp
