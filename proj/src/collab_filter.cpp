#include "cafbp/collab_filter.hpp"

#include <algorithm>
#include <cmath>

#include "cafbp/parallel.hpp"

namespace cafbp {

void FilterParams::validate() const {
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidArgument, "sigma must be >= 0");
  if (!(lambda_3d > 0.0)) throw Error(Errc::InvalidArgument, "lambda_3d must be > 0");
  if (max_pipeline_iters < 1) throw Error(Errc::InvalidArgument, "max_pipeline_iters must be >= 1");
  match1.validate();
  match2.validate();
}

Accumulator::Accumulator(int width, int height)
    : width_(width),
      height_(height),
      num_(static_cast<std::size_t>(width) * height, 0.0),
      den_(static_cast<std::size_t>(width) * height, 0.0) {}

void Accumulator::add(std::span<const double> block, int size, Point origin, double weight) {
  for (int r = 0; r < size; ++r) {
    const std::size_t row = index(origin.x, origin.y + r);
    for (int c = 0; c < size; ++c) {
      num_[row + c] += weight * block[static_cast<std::size_t>(r) * size + c];
      den_[row + c] += weight;
    }
  }
}

std::uint8_t round_to_sample(double v) {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

FramePlane Accumulator::resolve(const FramePlane& fallback) const {
  FramePlane out(width_, height_);
  for (std::size_t i = 0; i < num_.size(); ++i)
    out.samples[i] = den_[i] > 0.0 ? round_to_sample(num_[i] / den_[i]) : fallback.samples[i];
  return out;
}

std::size_t hard_threshold(Spectrum3D& s, double sigma, double lambda_3d) {
  const double t = lambda_3d * sigma;
  std::size_t retained = 0;
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    double& c = s.coeffs[i];
    if (i != 0 && std::abs(c) < t) c = 0.0;
    if (i == 0 || c != 0.0) ++retained;
  }
  return retained;
}

double wiener_shrink(Spectrum3D& noisy, const Spectrum3D& basic, double sigma) {
  if (noisy.size != basic.size || noisy.group_size != basic.group_size ||
      noisy.coeffs.size() != basic.coeffs.size())
    throw Error(Errc::DimensionMismatch, "noisy and basic spectra differ in shape");
  const double s2 = sigma * sigma;
  double norm = 0.0;
  for (std::size_t i = 0; i < noisy.coeffs.size(); ++i) {
    const double b2 = basic.coeffs[i] * basic.coeffs[i];
    const double denom = b2 + s2;
    const double w = denom > 0.0 ? b2 / denom : 0.0;
    noisy.coeffs[i] *= w;
    norm += w * w;
  }
  return norm;
}

namespace {

struct GroupEstimate {
  std::vector<GroupMember> members;
  std::vector<double> blocks;
  double weight = 0.0;
};

// Block side actually used on a plane: the configured side, shrunk to fit.
int effective_block_size(const FramePlane& plane, int configured) {
  int size = configured;
  while (size > 2 && (size > plane.width || size > plane.height)) size /= 2;
  return (size <= plane.width && size <= plane.height) ? size : 0;
}

std::vector<double> gather(std::span<const FramePlane> frames,
                           const std::vector<GroupMember>& members, int size) {
  const std::size_t area = static_cast<std::size_t>(size) * size;
  std::vector<double> stack(area * members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    const FramePlane& plane = frames[members[m].frame];
    const Point o = members[m].origin;
    for (int r = 0; r < size; ++r) {
      const std::uint8_t* src = plane.samples.data() + static_cast<std::size_t>(o.y + r) * plane.width + o.x;
      double* dst = stack.data() + m * area + static_cast<std::size_t>(r) * size;
      for (int c = 0; c < size; ++c) dst[c] = src[c];
    }
  }
  return stack;
}

// Runs `estimate` for every reference block in raster order and aggregates.
// Groups are computed concurrently in chunks but always accumulated in raster
// order so the result is identical for every thread count.
template <typename Estimate>
FramePlane collaborate(const FramePlane& target, int size, int step, int threads,
                       Estimate&& estimate) {
  const auto xs = reference_positions(target.width, size, step);
  const auto ys = reference_positions(target.height, size, step);
  std::vector<Point> refs;
  refs.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) refs.push_back({x, y});

  Accumulator acc(target.width, target.height);
  constexpr std::size_t kChunk = 1024;
  std::vector<GroupEstimate> results;
  for (std::size_t begin = 0; begin < refs.size(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, refs.size() - begin);
    results.assign(n, {});
    parallel_for(n, threads, [&](std::size_t i) { results[i] = estimate(refs[begin + i]); });
    const std::size_t area = static_cast<std::size_t>(size) * size;
    for (const auto& r : results) {
      for (std::size_t m = 0; m < r.members.size(); ++m) {
        if (r.members[m].frame != -1)
          acc.add(std::span<const double>(r.blocks).subspan(m * area, area), size,
                  r.members[m].origin, r.weight);
      }
    }
  }
  return acc.resolve(target);
}

MatchParams sized(MatchParams m, int size) {
  m.block_size = size;
  m.step = std::min(m.step, size);
  return m;
}

}  // namespace

FramePlane pass1_basic_estimate(std::span<const FramePlane> noisy, int center,
                                const FilterParams& p) {
  p.validate();
  const FramePlane& target = noisy[center];
  const int size = effective_block_size(target, p.match1.block_size);
  if (size == 0) return target;
  const MatchParams match = sized(p.match1, size);

  return collaborate(target, size, match.step, p.threads, [&](Point ref) {
    GroupEstimate e;
    e.members = match_blocks(noisy, center, ref, match);
    Spectrum3D spec = group_forward(gather(noisy, e.members, size), size,
                                    static_cast<int>(e.members.size()));
    const std::size_t retained = hard_threshold(spec, p.sigma, p.lambda_3d);
    e.blocks = group_inverse(spec);
    e.weight = 1.0 / static_cast<double>(std::max<std::size_t>(retained, 1));
    // Only members on the target frame contribute to its estimate.
    for (auto& m : e.members)
      if (m.frame != center) m.frame = -1;
    return e;
  });
}

FramePlane pass2_final_estimate(std::span<const FramePlane> noisy,
                                std::span<const FramePlane> basic, int center,
                                const FilterParams& p) {
  p.validate();
  if (noisy.size() != basic.size())
    throw Error(Errc::DimensionMismatch, "basic and noisy windows differ in length");
  const FramePlane& target = noisy[center];
  if (basic[center].width != target.width || basic[center].height != target.height)
    throw Error(Errc::DimensionMismatch, "basic estimate differs in size from the noisy frame");
  const int size = effective_block_size(target, p.match2.block_size);
  if (size == 0) return target;
  const MatchParams match = sized(p.match2, size);

  return collaborate(target, size, match.step, p.threads, [&](Point ref) {
    GroupEstimate e;
    e.members = match_blocks(basic, center, ref, match);
    const int count = static_cast<int>(e.members.size());
    Spectrum3D basic_spec = group_forward(gather(basic, e.members, size), size, count);
    Spectrum3D noisy_spec = group_forward(gather(noisy, e.members, size), size, count);
    const double norm = wiener_shrink(noisy_spec, basic_spec, p.sigma);
    e.blocks = group_inverse(noisy_spec);
    e.weight = 1.0 / std::max(norm, 1e-12);
    for (auto& m : e.members)
      if (m.frame != center) m.frame = -1;
    return e;
  });
}

FramePlane aegbm3d_denoise(std::span<const FramePlane> frames, int index, const FilterParams& p) {
  if (index < 0 || index >= static_cast<int>(frames.size()))
    throw Error(Errc::InvalidArgument, "frame index out of range");
  const int depth = std::max(p.match1.temporal_depth, p.match2.temporal_depth);
  const int first = std::max(0, index - depth);
  const int last = std::min(static_cast<int>(frames.size()) - 1, index + depth);

  std::vector<FramePlane> basic;
  for (int f = first; f <= last; ++f) basic.push_back(pass1_basic_estimate(frames, f, p));
  return pass2_final_estimate(frames.subspan(first, last - first + 1), basic, index - first, p);
}

std::vector<FramePlane> denoise_sequence(std::span<const FramePlane> frames, const FilterParams& p) {
  std::vector<FramePlane> basic;
  basic.reserve(frames.size());
  for (int f = 0; f < static_cast<int>(frames.size()); ++f)
    basic.push_back(pass1_basic_estimate(frames, f, p));
  std::vector<FramePlane> out;
  out.reserve(frames.size());
  for (int f = 0; f < static_cast<int>(frames.size()); ++f)
    out.push_back(pass2_final_estimate(frames, basic, f, p));
  return out;
}

}  // namespace cafbp
