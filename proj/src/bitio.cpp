#include "cafbp/bitio.hpp"

#include <bit>

namespace cafbp {

void BitWriter::put_bit(bool bit) {
  if (bits_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::put_bits(std::uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) put_bit((value >> i) & 1u);
}

void BitWriter::put_ue(std::uint64_t value) {
  const std::uint64_t coded = value + 1;
  const int length = std::bit_width(coded);
  put_bits(0, length - 1);
  put_bits(coded, length);
}

void BitWriter::put_se(std::int64_t value) { put_ue(signed_to_unsigned(value)); }

std::string BitWriter::to_bit_string() const {
  std::string s;
  s.reserve(bits_);
  for (std::size_t i = 0; i < bits_; ++i) s.push_back((bytes_[i / 8] >> (7 - i % 8)) & 1u ? '1' : '0');
  return s;
}

bool BitReader::get_bit() {
  if (pos_ >= limit_) throw Error(Errc::TruncatedStream, "read past end of bitstream");
  const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::get_bits(int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(get_bit());
  return v;
}

std::uint64_t BitReader::get_ue() {
  int zeros = 0;
  while (!get_bit()) {
    if (++zeros > 63) throw Error(Errc::MalformedStream, "exp-Golomb prefix too long");
  }
  const std::uint64_t rest = get_bits(zeros);
  return ((std::uint64_t{1} << zeros) | rest) - 1;
}

std::int64_t BitReader::get_se() { return unsigned_to_signed(get_ue()); }

std::uint64_t signed_to_unsigned(std::int64_t v) {
  return v > 0 ? 2 * static_cast<std::uint64_t>(v) - 1 : 2 * static_cast<std::uint64_t>(-v);
}

std::int64_t unsigned_to_signed(std::uint64_t u) {
  return (u & 1u) ? static_cast<std::int64_t>((u + 1) / 2) : -static_cast<std::int64_t>(u / 2);
}

std::string exp_golomb_bits(std::uint64_t v) {
  BitWriter w;
  w.put_ue(v);
  return w.to_bit_string();
}

}  // namespace cafbp
