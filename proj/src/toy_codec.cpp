#include "cafbp/toy_codec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "cafbp/collab_filter.hpp"
#include "cafbp/transforms.hpp"

namespace cafbp {

double QuantParams::step() const { return std::exp2((qp - 4) / 6.0); }

void QuantParams::validate() const {
  if (qp < 0 || qp > 51) throw Error(Errc::InvalidArgument, "qp must be in [0, 51]");
}

std::vector<int> quantize(std::span<const double> coeffs, const QuantParams& q) {
  const double step = q.step();
  std::vector<int> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    out[i] = static_cast<int>(std::round(coeffs[i] / step));  // half away from zero
  return out;
}

std::vector<double> dequantize(std::span<const int> levels, const QuantParams& q) {
  const double step = q.step();
  std::vector<double> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) out[i] = levels[i] * step;
  return out;
}

const std::vector<int>& zigzag_order(int size) {
  if (!is_supported_dct_size(size)) throw Error(Errc::UnsupportedSize, "zigzag size " + std::to_string(size));
  static std::mutex mutex;
  static std::map<int, std::vector<int>> cache;
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace(size);
  if (inserted) {
    auto& order = it->second;
    order.reserve(static_cast<std::size_t>(size) * size);
    for (int diag = 0; diag <= 2 * (size - 1); ++diag) {
      // Odd diagonals run top-right to bottom-left, even ones the other way.
      for (int k = 0; k <= diag; ++k) {
        const int row = diag % 2 == 1 ? k : diag - k;
        const int col = diag - row;
        if (row < size && col < size) order.push_back(row * size + col);
      }
    }
  }
  return it->second;
}

std::vector<int> zigzag(std::span<const int> block, int size) {
  const auto& order = zigzag_order(size);
  if (block.size() != order.size()) throw Error(Errc::DimensionMismatch, "block is not size*size");
  std::vector<int> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = block[order[i]];
  return out;
}

std::vector<int> inverse_zigzag(std::span<const int> scan, int size) {
  const auto& order = zigzag_order(size);
  if (scan.size() != order.size()) throw Error(Errc::DimensionMismatch, "scan is not size*size");
  std::vector<int> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[order[i]] = scan[i];
  return out;
}

namespace {

double basis_value(int u, int i, int size) {
  const double alpha = u == 0 ? std::sqrt(1.0 / size) : std::sqrt(2.0 / size);
  return alpha * std::cos(std::numbers::pi * (2 * i + 1) * u / (2.0 * size));
}

// Nudges single levels until no reconstructed sample misses the residual by
// step + 1/2 or more.
void limit_peak_error(std::vector<int>& levels, std::span<const double> residual, int size, double step) {
  const double bound = step + 0.5 - 1e-6;
  const std::size_t area = levels.size();
  for (int round = 0; round < 64; ++round) {
    std::vector<double> dq(area);
    for (std::size_t i = 0; i < area; ++i) dq[i] = levels[i] * step;
    const auto rec = dct2_inverse(dq, size);
    std::size_t worst = 0;
    double worst_err = 0.0;
    for (std::size_t i = 0; i < area; ++i) {
      const double e = rec[i] - residual[i];
      if (std::abs(e) > std::abs(worst_err)) {
        worst = i;
        worst_err = e;
      }
    }
    if (std::abs(worst_err) < bound) return;
    const int r = static_cast<int>(worst) / size, c = static_cast<int>(worst) % size;
    std::size_t best = area;
    double best_mag = 0.0, best_val = 0.0;
    for (int u = 0; u < size; ++u) {
      for (int v = 0; v < size; ++v) {
        const double b = basis_value(u, r, size) * basis_value(v, c, size);
        const double mag = std::abs(b);
        if (mag > best_mag && mag * step < 2.0 * std::abs(worst_err)) {
          best = static_cast<std::size_t>(u) * size + v;
          best_mag = mag;
          best_val = b;
        }
      }
    }
    if (best == area) return;
    levels[best] += (worst_err * best_val > 0) ? -1 : 1;
  }
}

}  // namespace

std::vector<int> encode_block(BitWriter& out, std::span<const double> residual, int size,
                              const QuantParams& q) {
  const auto coeffs = dct2_forward(residual, size);
  auto levels = quantize(coeffs, q);
  limit_peak_error(levels, residual, size, q.step());
  const auto scan = zigzag(levels, size);
  std::uint64_t run = 0;
  for (int level : scan) {
    if (level == 0) {
      ++run;
      continue;
    }
    if (run >= kEndOfBlock) throw Error(Errc::ReservedRunCollision, "zero run reaches the EOB code");
    out.put_ue(run);
    out.put_se(level);
    run = 0;
  }
  out.put_ue(kEndOfBlock);
  return levels;
}

std::vector<int> decode_block(BitReader& in, int size) {
  const std::size_t area = static_cast<std::size_t>(size) * size;
  std::vector<int> scan(area, 0);
  std::size_t pos = 0;
  for (;;) {
    const std::uint64_t run = in.get_ue();
    if (run == kEndOfBlock) break;
    if (run >= area - pos) throw Error(Errc::MalformedStream, "zero run overruns the block");
    pos += run;
    const std::int64_t level = in.get_se();
    if (level == 0) throw Error(Errc::MalformedStream, "zero level in run/level pair");
    if (level > INT32_MAX || level < INT32_MIN) throw Error(Errc::MalformedStream, "level out of range");
    scan[pos++] = static_cast<int>(level);
  }
  return inverse_zigzag(scan, size);
}

std::vector<double> reconstruct_residual(std::span<const int> levels, int size, const QuantParams& q) {
  return dct2_inverse(dequantize(levels, q), size);
}

std::size_t EncodedPlane::coded_blocks() const {
  return static_cast<std::size_t>(std::count(decisions.begin(), decisions.end(), true));
}

int dc_prediction(const FramePlane& recon, int x, int y, int size) {
  long sum = 0;
  int count = 0;
  if (y > 0) {
    for (int c = 0; c < size; ++c) sum += recon.at(x + c, y - 1);
    count += size;
  }
  if (x > 0) {
    for (int r = 0; r < size; ++r) sum += recon.at(x - 1, y + r);
    count += size;
  }
  return count == 0 ? 128 : static_cast<int>((sum + count / 2) / count);
}

// Frame bitstream layout (see docs/bitstream.md):
//   "CFBP" | version u8 | width u16 | height u16 | qp u8 | 2-bit size index
//   per 64x64 region | per block: gate flag, then run/level pairs and EOB.
namespace {

constexpr std::uint8_t kVersion = 1;
constexpr char kMagic[4] = {'C', 'F', 'B', 'P'};

int size_index(int size) {
  for (int i = 0; i < 4; ++i)
    if (kCodecBlockSizes[i] == size) return i;
  throw Error(Errc::UnsupportedSize, "block size " + std::to_string(size));
}

void write_header(BitWriter& w, const BlockMap& map, int qp) {
  for (char c : kMagic) w.put_bits(static_cast<std::uint8_t>(c), 8);
  w.put_bits(kVersion, 8);
  w.put_bits(static_cast<std::uint64_t>(map.width), 16);
  w.put_bits(static_cast<std::uint64_t>(map.height), 16);
  w.put_bits(static_cast<std::uint64_t>(qp), 8);
  for (int s : map.region_sizes) w.put_bits(static_cast<std::uint64_t>(size_index(s)), 2);
}

FrameHeader read_header(BitReader& r) {
  try {
    for (char c : kMagic)
      if (r.get_bits(8) != static_cast<std::uint8_t>(c)) throw Error(Errc::MalformedHeader, "bad magic");
    if (r.get_bits(8) != kVersion) throw Error(Errc::MalformedHeader, "unsupported bitstream version");
    FrameHeader h;
    h.width = static_cast<int>(r.get_bits(16));
    h.height = static_cast<int>(r.get_bits(16));
    h.qp = static_cast<int>(r.get_bits(8));
    if (h.width < 8 || h.height < 8) throw Error(Errc::MalformedHeader, "plane dimensions below 8");
    if (h.qp > 51) throw Error(Errc::MalformedHeader, "qp out of range");
    h.map.width = h.width;
    h.map.height = h.height;
    const int regions = h.map.regions_x() * h.map.regions_y();
    for (int i = 0; i < regions; ++i) {
      const int s = kCodecBlockSizes[r.get_bits(2)];
      if (s > h.width || s > h.height) throw Error(Errc::MalformedHeader, "block larger than plane");
      h.map.region_sizes.push_back(s);
    }
    return h;
  } catch (const Error& e) {
    if (e.code() == Errc::TruncatedStream) throw Error(Errc::MalformedHeader, "header truncated");
    throw;
  }
}

void write_block(FramePlane& recon, const BlockMap::Entry& b, int prediction,
                 std::span<const double> residual) {
  for (int r = 0; r < b.size; ++r)
    for (int c = 0; c < b.size; ++c)
      recon.at(b.x + c, b.y + r) = round_to_sample(
          prediction + (residual.empty() ? 0.0 : residual[static_cast<std::size_t>(r) * b.size + c]));
}

}  // namespace

EncodedPlane encode_frame(const FramePlane& plane, const BlockMap& map, const QuantParams& q,
                          const GatePolicy& gate) {
  q.validate();
  if (map.width != plane.width || map.height != plane.height ||
      map.region_sizes.size() != static_cast<std::size_t>(map.regions_x() * map.regions_y()))
    throw Error(Errc::DimensionMismatch, "block map does not match the plane");
  if (plane.width > 0xFFFF || plane.height > 0xFFFF)
    throw Error(Errc::UnsupportedSize, "plane dimensions exceed 16 bits");

  BitWriter w;
  write_header(w, map, q.qp);
  EncodedPlane out;
  out.recon = FramePlane(plane.width, plane.height);
  const auto blocks = map.blocks();
  out.decisions.reserve(blocks.size());

  std::vector<double> source, residual;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::size_t area = static_cast<std::size_t>(b.size) * b.size;
    const int pred = dc_prediction(out.recon, b.x, b.y, b.size);
    source.resize(area);
    residual.resize(area);
    for (int r = 0; r < b.size; ++r) {
      for (int c = 0; c < b.size; ++c) {
        const std::size_t k = static_cast<std::size_t>(r) * b.size + c;
        source[k] = plane.at(b.x + c, b.y + r);
        residual[k] = source[k] - pred;
      }
    }
    const bool coded = gate ? gate(BlockContext{b, source, residual, pred, i}) : true;
    out.decisions.push_back(coded);
    w.put_bit(coded);
    if (coded) {
      const auto levels = encode_block(w, residual, b.size, q);
      write_block(out.recon, b, pred, reconstruct_residual(levels, b.size, q));
    } else {
      write_block(out.recon, b, pred, {});
    }
  }
  out.stream.bit_count = w.bit_count();
  out.stream.bytes = w.bytes();
  return out;
}

EncodedPlane encode_frame(const FramePlane& plane, const BlockMap& map, const QuantParams& q,
                          const std::vector<bool>& decisions) {
  const std::size_t expected = map.blocks().size();
  if (decisions.size() != expected)
    throw Error(Errc::DimensionMismatch, "one gate decision per block is required");
  return encode_frame(plane, map, q, [&](const BlockContext& ctx) { return decisions[ctx.index]; });
}

FrameHeader peek_header(const Bitstream& stream) {
  BitReader r(stream.bytes, stream.bit_count);
  return read_header(r);
}

FramePlane decode_frame(const Bitstream& stream) {
  BitReader r(stream.bytes, stream.bit_count);
  const FrameHeader h = read_header(r);
  const QuantParams q{h.qp};
  FramePlane recon(h.width, h.height);
  for (const auto& b : h.map.blocks()) {
    const int pred = dc_prediction(recon, b.x, b.y, b.size);
    if (r.get_bit()) {
      const auto levels = decode_block(r, b.size);
      write_block(recon, b, pred, reconstruct_residual(levels, b.size, q));
    } else {
      write_block(recon, b, pred, {});
    }
  }
  return recon;
}

}  // namespace cafbp
