#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cafbp/error.hpp"

namespace cafbp {

// MSB-first bit packer.
class BitWriter {
 public:
  void put_bit(bool bit);
  void put_bits(std::uint64_t value, int count);
  // Order-0 exp-Golomb.
  void put_ue(std::uint64_t value);
  void put_se(std::int64_t value);

  std::size_t bit_count() const { return bits_; }
  // Bytes with the final partial byte zero-padded.
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::string to_bit_string() const;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_limit = SIZE_MAX)
      : bytes_(bytes), limit_(std::min(bit_limit, bytes.size() * 8)) {}

  bool get_bit();
  std::uint64_t get_bits(int count);
  std::uint64_t get_ue();
  std::int64_t get_se();

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return limit_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

// 0 -> 0, 1 -> 1, -1 -> 2, 2 -> 3, -2 -> 4, ...
std::uint64_t signed_to_unsigned(std::int64_t v);
std::int64_t unsigned_to_signed(std::uint64_t u);

// Exp-Golomb codeword as a string of '0'/'1'.
std::string exp_golomb_bits(std::uint64_t v);

}  // namespace cafbp
