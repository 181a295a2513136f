#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cafbp/frame_io.hpp"

namespace cafbp {

// Square block lifted out of a plane as reals.
struct Block {
  int size = 0;
  int x = 0;
  int y = 0;
  std::vector<double> samples;
};

Block extract_block(const FramePlane& plane, int x, int y, int size);

double block_variance(const Block& b);
double block_variance(std::span<const double> samples);

// Mean Sobel gradient magnitude over the interior (size - 2)^2 pixels.
double edge_energy(const Block& b);

// Per-pixel normalized SSD.
double match_distance(const Block& a, const Block& b);

struct VarianceThresholds {
  double t1 = 50.0;
  double t2 = 300.0;
  double t3 = 1200.0;
};

inline constexpr std::array<int, 4> kCodecBlockSizes{8, 16, 32, 64};

// Flat content gets the coarsest block; the result shrinks until it fits the
// given area.
int select_block_size(int width, int height, double variance, const VarianceThresholds& t);

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct MatchParams {
  int block_size = 8;
  int search_radius = 8;
  int max_group_size = 16;
  double match_threshold = 2500.0;
  int temporal_depth = 1;
  int step = 3;
  bool edge_adapt = true;
  double edge_tau = 30.0;

  void validate() const;
};

struct GroupMember {
  int frame = 0;  // index into the frame window
  Point origin;
  double distance = 0.0;
};

struct BlockGroup {
  int size = 0;
  std::vector<GroupMember> members;  // reference first
  std::vector<double> stack;         // members.size() blocks of size*size

  std::size_t count() const { return members.size(); }
};

// Groups blocks similar to the one at `ref` in frames[center]. The center
// frame is searched over +-search_radius; each temporal neighbor within
// temporal_depth over +-search_radius/2 around `prediction` (defaults to ref).
BlockGroup build_group(std::span<const FramePlane> frames, int center, Point ref,
                       const MatchParams& p, std::optional<Point> prediction = std::nullopt);

// Same grouping but only coordinates and distances; avoids copying samples.
std::vector<GroupMember> match_blocks(std::span<const FramePlane> frames, int center, Point ref,
                                      const MatchParams& p,
                                      std::optional<Point> prediction = std::nullopt);

// Reference positions along one axis at the given stride; the last position
// is always dim - size so every pixel is covered.
std::vector<int> reference_positions(int dim, int size, int step);

// Codec partition: the plane is split into 64x64 regions, each tiled with one
// block size chosen from its variance. Blocks that would overhang the plane
// edge are shifted inward.
struct BlockMap {
  int width = 0;
  int height = 0;
  std::vector<int> region_sizes;  // raster order over ceil(w/64) x ceil(h/64)

  static constexpr int kRegion = 64;
  int regions_x() const { return (width + kRegion - 1) / kRegion; }
  int regions_y() const { return (height + kRegion - 1) / kRegion; }

  struct Entry {
    int x;
    int y;
    int size;
  };
  // Blocks in coding order.
  std::vector<Entry> blocks() const;

  friend bool operator==(const BlockMap&, const BlockMap&) = default;
};

BlockMap build_block_map(const FramePlane& plane, const VarianceThresholds& t);

}  // namespace cafbp
