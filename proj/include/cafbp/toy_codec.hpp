#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cafbp/bitio.hpp"
#include "cafbp/block_engine.hpp"
#include "cafbp/frame_io.hpp"

namespace cafbp {

struct QuantParams {
  int qp = 30;

  // 2^((qp - 4) / 6): six QP steps per octave, qp 4 is unit step.
  double step() const;
  void validate() const;
};

std::vector<int> quantize(std::span<const double> coeffs, const QuantParams& q);
std::vector<double> dequantize(std::span<const int> levels, const QuantParams& q);

// Raster index of each scan position, diagonal zigzag starting at DC.
const std::vector<int>& zigzag_order(int size);
std::vector<int> zigzag(std::span<const int> block, int size);
std::vector<int> inverse_zigzag(std::span<const int> scan, int size);

// Run value reserved as end-of-block.
inline constexpr std::uint64_t kEndOfBlock = (1u << 16) - 1;

// Transform, quantize and entropy-code one residual block (no gate flag).
// Returns the quantized levels in raster order.
std::vector<int> encode_block(BitWriter& out, std::span<const double> residual, int size,
                              const QuantParams& q);
// Reads one block's levels (raster order) up to and including its EOB.
std::vector<int> decode_block(BitReader& in, int size);
// Dequantize and inverse transform; the residual a decoder adds to the prediction.
std::vector<double> reconstruct_residual(std::span<const int> levels, int size, const QuantParams& q);

struct Bitstream {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;  // before final byte padding

  std::size_t padded_bits() const { return bytes.size() * 8; }
};

// What a gate policy sees for one block, in coding order.
struct BlockContext {
  BlockMap::Entry entry;
  std::span<const double> source;    // original samples
  std::span<const double> residual;  // source - prediction
  int prediction = 0;
  std::size_t index = 0;             // position in coding order
};

// Returns true to code the residual, false to skip it.
using GatePolicy = std::function<bool(const BlockContext&)>;

struct EncodedPlane {
  Bitstream stream;
  FramePlane recon;
  std::vector<bool> decisions;  // per block, coding order
  std::size_t coded_blocks() const;
  std::size_t skipped_blocks() const { return decisions.size() - coded_blocks(); }
};

// DC prediction from the reconstructed row above and column to the left;
// 128 when neither exists.
int dc_prediction(const FramePlane& recon, int x, int y, int size);

EncodedPlane encode_frame(const FramePlane& plane, const BlockMap& map, const QuantParams& q,
                          const GatePolicy& gate = {});
EncodedPlane encode_frame(const FramePlane& plane, const BlockMap& map, const QuantParams& q,
                          const std::vector<bool>& decisions);

FramePlane decode_frame(const Bitstream& stream);

struct FrameHeader {
  int width = 0;
  int height = 0;
  int qp = 0;
  BlockMap map;
};
FrameHeader peek_header(const Bitstream& stream);

}  // namespace cafbp
