#include "cafbp/block_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace cafbp {

Block extract_block(const FramePlane& plane, int x, int y, int size) {
  if (size <= 0 || x < 0 || y < 0 || x + size > plane.width || y + size > plane.height)
    throw Error(Errc::InvalidArgument, "block does not fit inside the plane");
  Block b{size, x, y, {}};
  b.samples.resize(static_cast<std::size_t>(size) * size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      b.samples[static_cast<std::size_t>(r) * size + c] = plane.at(x + c, y + r);
  return b;
}

double block_variance(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double acc = 0.0;
  for (double s : samples) acc += (s - mean) * (s - mean);
  return acc / static_cast<double>(samples.size());
}

double block_variance(const Block& b) { return block_variance(b.samples); }

double edge_energy(const Block& b) {
  const int n = b.size;
  if (n < 3) throw Error(Errc::BlockTooSmall, "edge_energy needs a block of at least 3x3");
  auto px = [&](int r, int c) { return b.samples[static_cast<std::size_t>(r) * n + c]; };
  double total = 0.0;
  for (int r = 1; r < n - 1; ++r) {
    for (int c = 1; c < n - 1; ++c) {
      const double gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
      const double gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
      total += std::sqrt(gx * gx + gy * gy);
    }
  }
  return total / static_cast<double>((n - 2) * (n - 2));
}

double match_distance(const Block& a, const Block& b) {
  if (a.size != b.size) throw Error(Errc::SizeMismatch, "blocks differ in size");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = a.samples[i] - b.samples[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size * a.size);
}

int select_block_size(int width, int height, double variance, const VarianceThresholds& t) {
  if (!(t.t1 < t.t2 && t.t2 < t.t3))
    throw Error(Errc::ThresholdOrderInvalid, "block thresholds must satisfy T1 < T2 < T3");
  int size = variance < t.t1 ? 64 : variance < t.t2 ? 32 : variance < t.t3 ? 16 : 8;
  const int limit = std::min(width, height);
  while (size > kCodecBlockSizes.front() && size > limit) size /= 2;
  return size;
}

void MatchParams::validate() const {
  if (block_size < 4 || block_size > 64 || (block_size & (block_size - 1)) != 0)
    throw Error(Errc::InvalidArgument, "block_size must be a power of two in [4, 64]");
  if (search_radius < 0) throw Error(Errc::InvalidArgument, "search_radius must be >= 0");
  if (max_group_size < 1 || max_group_size > 32 || (max_group_size & (max_group_size - 1)) != 0)
    throw Error(Errc::InvalidArgument, "max_group_size must be one of 1,2,4,8,16,32");
  if (!(match_threshold >= 0.0)) throw Error(Errc::InvalidArgument, "match_threshold must be >= 0");
  if (temporal_depth < 0) throw Error(Errc::InvalidArgument, "temporal_depth must be >= 0");
  if (step < 1 || step > block_size)
    throw Error(Errc::InvalidArgument, "step must be in [1, block_size]");
}

namespace {

// SSD between two blocks of `size`, giving up once `limit` is exceeded.
long long block_ssd(const FramePlane& a, Point pa, const FramePlane& b, Point pb, int size,
                    long long limit) {
  long long acc = 0;
  for (int r = 0; r < size; ++r) {
    const std::uint8_t* ra = a.samples.data() + static_cast<std::size_t>(pa.y + r) * a.width + pa.x;
    const std::uint8_t* rb = b.samples.data() + static_cast<std::size_t>(pb.y + r) * b.width + pb.x;
    for (int c = 0; c < size; ++c) {
      const int d = static_cast<int>(ra[c]) - static_cast<int>(rb[c]);
      acc += d * d;
    }
    if (acc > limit) return acc;
  }
  return acc;
}

}  // namespace

std::vector<GroupMember> match_blocks(std::span<const FramePlane> frames, int center, Point ref,
                                      const MatchParams& p, std::optional<Point> prediction) {
  if (center < 0 || center >= static_cast<int>(frames.size()))
    throw Error(Errc::InvalidArgument, "center frame index out of range");
  const FramePlane& cur = frames[center];
  const int size = p.block_size;
  if (ref.x < 0 || ref.y < 0 || ref.x + size > cur.width || ref.y + size > cur.height)
    throw Error(Errc::InvalidArgument, "reference block lies outside the frame");

  double threshold = p.match_threshold;
  if (p.edge_adapt && size >= 3 &&
      edge_energy(extract_block(cur, ref.x, ref.y, size)) > p.edge_tau)
    threshold *= 0.5;

  const double area = static_cast<double>(size) * size;
  // Integer SSD bound equivalent to distance <= threshold.
  const long long limit = static_cast<long long>(std::floor(threshold * area + 1e-9));

  std::vector<GroupMember> kept;
  auto scan = [&](int frame, Point around, int radius) {
    const FramePlane& plane = frames[frame];
    const int x0 = std::max(0, around.x - radius), x1 = std::min(plane.width - size, around.x + radius);
    const int y0 = std::max(0, around.y - radius), y1 = std::min(plane.height - size, around.y + radius);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (frame == center && x == ref.x && y == ref.y) continue;
        const long long d = block_ssd(cur, ref, plane, {x, y}, size, limit);
        if (d <= limit) kept.push_back({frame, {x, y}, static_cast<double>(d) / area});
      }
    }
  };

  scan(center, ref, p.search_radius);
  const Point predicted = prediction.value_or(ref);
  const int n = static_cast<int>(frames.size());
  for (int d = 1; d <= p.temporal_depth; ++d) {
    for (int f : {center - d, center + d}) {
      if (f < 0 || f >= n) continue;
      if (frames[f].width != cur.width || frames[f].height != cur.height)
        throw Error(Errc::DimensionMismatch, "temporal neighbor differs in size");
      const Point around{std::clamp(predicted.x, 0, cur.width - size),
                         std::clamp(predicted.y, 0, cur.height - size)};
      scan(f, around, p.search_radius / 2);
    }
  }

  std::sort(kept.begin(), kept.end(), [](const GroupMember& a, const GroupMember& b) {
    return std::tie(a.distance, a.origin.y, a.origin.x, a.frame) <
           std::tie(b.distance, b.origin.y, b.origin.x, b.frame);
  });

  const std::size_t available = std::min<std::size_t>(kept.size() + 1, p.max_group_size);
  std::size_t count = 1;
  while (count * 2 <= available) count *= 2;

  std::vector<GroupMember> members;
  members.reserve(count);
  members.push_back({center, ref, 0.0});
  members.insert(members.end(), kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(count - 1));
  return members;
}

BlockGroup build_group(std::span<const FramePlane> frames, int center, Point ref,
                       const MatchParams& p, std::optional<Point> prediction) {
  BlockGroup g;
  g.size = p.block_size;
  g.members = match_blocks(frames, center, ref, p, prediction);
  const std::size_t area = static_cast<std::size_t>(g.size) * g.size;
  g.stack.resize(area * g.members.size());
  for (std::size_t m = 0; m < g.members.size(); ++m) {
    const FramePlane& plane = frames[g.members[m].frame];
    const Point o = g.members[m].origin;
    for (int r = 0; r < g.size; ++r)
      for (int c = 0; c < g.size; ++c)
        g.stack[m * area + static_cast<std::size_t>(r) * g.size + c] = plane.at(o.x + c, o.y + r);
  }
  return g;
}

std::vector<int> reference_positions(int dim, int size, int step) {
  std::vector<int> out;
  if (dim < size) return out;
  for (int p = 0; p <= dim - size; p += step) out.push_back(p);
  if (out.back() != dim - size) out.push_back(dim - size);
  return out;
}

std::vector<BlockMap::Entry> BlockMap::blocks() const {
  std::vector<Entry> out;
  const int rx_count = regions_x(), ry_count = regions_y();
  for (int ry = 0; ry < ry_count; ++ry) {
    for (int rx = 0; rx < rx_count; ++rx) {
      const int s = region_sizes[static_cast<std::size_t>(ry) * rx_count + rx];
      const int x0 = rx * kRegion, y0 = ry * kRegion;
      const int rw = std::min(kRegion, width - x0), rh = std::min(kRegion, height - y0);
      for (int by = 0; by < rh; by += s)
        for (int bx = 0; bx < rw; bx += s)
          out.push_back({std::min(x0 + bx, width - s), std::min(y0 + by, height - s), s});
    }
  }
  return out;
}

BlockMap build_block_map(const FramePlane& plane, const VarianceThresholds& t) {
  if (plane.width < kCodecBlockSizes.front() || plane.height < kCodecBlockSizes.front())
    throw Error(Errc::UnsupportedSize, "plane smaller than the minimum 8x8 codec block");
  BlockMap map{plane.width, plane.height, {}};
  constexpr int R = BlockMap::kRegion;
  for (int ry = 0; ry < map.regions_y(); ++ry) {
    for (int rx = 0; rx < map.regions_x(); ++rx) {
      const int x0 = rx * R, y0 = ry * R;
      const int rw = std::min(R, plane.width - x0), rh = std::min(R, plane.height - y0);
      std::vector<double> samples;
      samples.reserve(static_cast<std::size_t>(rw) * rh);
      for (int y = y0; y < y0 + rh; ++y)
        for (int x = x0; x < x0 + rw; ++x) samples.push_back(plane.at(x, y));
      map.region_sizes.push_back(
          select_block_size(std::max(rw, 8), std::max(rh, 8), block_variance(samples), t));
    }
  }
  return map;
}

}  // namespace cafbp
