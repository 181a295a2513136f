#include <gtest/gtest.h>

#include <cmath>

#include "cafbp/random.hpp"
#include "cafbp/toy_codec.hpp"
#include "cafbp/transforms.hpp"
#include "fixtures.hpp"

using namespace cafbp;

namespace {

int max_abs_diff(const FramePlane& a, const FramePlane& b) {
  int m = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) m = std::max(m, std::abs(a.samples[i] - b.samples[i]));
  return m;
}

EncodedPlane encode_all_open(const FramePlane& f, int qp) {
  return encode_frame(f, build_block_map(f, {}), QuantParams{qp});
}

}  // namespace

TEST(Quant, StepLaw) {
  EXPECT_EQ(QuantParams{4}.step(), 1.0);
  EXPECT_DOUBLE_EQ(QuantParams{10}.step(), 2.0);
  for (int qp = 1; qp <= 51; ++qp) EXPECT_GT(QuantParams{qp}.step(), QuantParams{qp - 1}.step());
  EXPECT_THROW(QuantParams{52}.validate(), Error);
  EXPECT_THROW(QuantParams{-1}.validate(), Error);
}

TEST(Quant, Examples) {
  const QuantParams unit{4};
  EXPECT_EQ(quantize(std::vector<double>{7.4, -7.5, 7.5, 0.0, -0.49}, unit),
            (std::vector<int>{7, -8, 8, 0, 0}));
  for (int qp : {0, 22, 51}) EXPECT_EQ(quantize(std::vector<double>{0.0}, QuantParams{qp})[0], 0);
  EXPECT_EQ(dequantize(std::vector<int>{3, -2}, QuantParams{10}), (std::vector<double>{6.0, -4.0}));
}

TEST(Zigzag, Order) {
  EXPECT_EQ(zigzag(std::vector<int>{1, 2, 3, 4}, 2), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(zigzag_order(4), (std::vector<int>{0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15}));
  EXPECT_EQ(zigzag(std::vector<int>(64, 0), 8), std::vector<int>(64, 0));
  Rng rng(3);
  for (int n : {2, 4, 8, 16, 32, 64}) {
    std::vector<int> m(static_cast<std::size_t>(n) * n);
    for (auto& v : m) v = static_cast<int>(rng.below(200)) - 100;
    EXPECT_EQ(inverse_zigzag(zigzag(m, n), n), m);
  }
  EXPECT_THROW(zigzag_order(6), Error);
}

TEST(ExpGolomb, Codewords) {
  EXPECT_EQ(exp_golomb_bits(0), "1");
  EXPECT_EQ(exp_golomb_bits(1), "010");
  EXPECT_EQ(exp_golomb_bits(2), "011");
  EXPECT_EQ(exp_golomb_bits(7), "0001000");
  EXPECT_EQ(signed_to_unsigned(0), 0u);
  EXPECT_EQ(signed_to_unsigned(1), 1u);
  EXPECT_EQ(signed_to_unsigned(-1), 2u);
  EXPECT_EQ(signed_to_unsigned(2), 3u);
  EXPECT_EQ(signed_to_unsigned(-2), 4u);
  BitWriter w;
  w.put_ue(2);
  w.put_se(-1);
  EXPECT_EQ(w.to_bit_string(), "011011");
}

TEST(ExpGolomb, RoundTrip) {
  Rng rng(8);
  BitWriter w;
  std::vector<std::int64_t> values;
  for (int i = 0; i < 2000; ++i) {
    const auto v = static_cast<std::int64_t>(rng.below(1u << (1 + rng.below(20)))) - 1000;
    values.push_back(v);
    w.put_se(v);
    w.put_ue(static_cast<std::uint64_t>(std::abs(v)));
  }
  BitReader r(w.bytes(), w.bit_count());
  for (auto v : values) {
    EXPECT_EQ(r.get_se(), v);
    EXPECT_EQ(r.get_ue(), static_cast<std::uint64_t>(std::abs(v)));
  }
  EXPECT_EQ(r.remaining(), 0u);
  EXPECT_THROW(r.get_bit(), Error);
}

TEST(Block, ZeroBlockIsEobOnly) {
  BitWriter w;
  encode_block(w, std::vector<double>(64, 0.0), 8, QuantParams{30});
  EXPECT_EQ(w.to_bit_string(), exp_golomb_bits(kEndOfBlock));
  EXPECT_EQ(w.bit_count(), 33u);
}

TEST(Block, RoundTripErrorBoundedByQuantization) {
  Rng rng(12);
  const QuantParams q{4};
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 8 << rng.below(3);
    std::vector<double> block(static_cast<std::size_t>(n) * n);
    for (auto& v : block) v = rng.uniform(-255, 255);
    BitWriter w;
    const auto levels = encode_block(w, block, n, q);
    BitReader r(w.bytes(), w.bit_count());
    ASSERT_EQ(decode_block(r, n), levels);
    ASSERT_EQ(r.remaining(), 0u);
    const auto rec = reconstruct_residual(levels, n, q);
    double sse = 0;
    for (std::size_t i = 0; i < block.size(); ++i) sse += (rec[i] - block[i]) * (rec[i] - block[i]);
    EXPECT_LE(sse, 0.25 * n * n + 1e-6);
  }
}

TEST(Block, MalformedPayloads) {
  BitWriter w;
  w.put_ue(64);  // run past the end of a 8x8 block
  w.put_se(1);
  BitReader r(w.bytes(), w.bit_count());
  EXPECT_THROW(decode_block(r, 8), Error);
  BitWriter z;
  z.put_ue(0);
  z.put_se(0);
  BitReader rz(z.bytes(), z.bit_count());
  EXPECT_THROW(decode_block(rz, 8), Error);
  BitWriter t;
  t.put_ue(3);
  BitReader rt(t.bytes(), t.bit_count());
  try {
    decode_block(rt, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TruncatedStream);
  }
}

TEST(Frame, NearLosslessAtUnitStep) {
  for (const auto& f : {FramePlane(64, 48, 201), fixtures::textured_frame(96, 80, 4),
                        fixtures::random_frame(40, 24, 6), fixtures::piecewise_constant_frame()}) {
    const auto enc = encode_all_open(f, 4);
    EXPECT_LE(max_abs_diff(enc.recon, f), 1);
    EXPECT_EQ(decode_frame(enc.stream), enc.recon);
    EXPECT_EQ(enc.stream.bit_count, enc.stream.bit_count);
    EXPECT_EQ((enc.stream.bit_count + 7) / 8, enc.stream.bytes.size());
  }
}

TEST(Frame, AllGatesClosedIsHeaderPlusFlags) {
  const auto f = fixtures::textured_frame(130, 70, 9);
  const auto map = build_block_map(f, {});
  const auto blocks = map.blocks().size();
  const auto enc = encode_frame(f, map, QuantParams{22}, std::vector<bool>(blocks, false));
  EXPECT_EQ(enc.stream.bit_count, 80 + 2 * map.region_sizes.size() + blocks);
  EXPECT_EQ(enc.skipped_blocks(), blocks);
  EXPECT_EQ(decode_frame(enc.stream), enc.recon);
  // Skipped blocks reconstruct to their prediction; the first one has no
  // neighbors.
  const auto first = map.blocks()[0];
  for (int y = 0; y < first.size; ++y)
    for (int x = 0; x < first.size; ++x) EXPECT_EQ(enc.recon.at(x, y), 128);
}

TEST(Frame, BitsDecreaseWithQp) {
  const auto f = fixtures::textured_frame(128, 128, 1);
  std::size_t prev = SIZE_MAX;
  double prev_mse = -1;
  for (int qp : {22, 26, 30, 34, 38}) {
    const auto enc = encode_all_open(f, qp);
    EXPECT_LT(enc.stream.bit_count, prev) << qp;
    const double m = mse(enc.recon, f);
    EXPECT_GE(m, prev_mse) << qp;
    prev = enc.stream.bit_count;
    prev_mse = m;
  }
}

TEST(Frame, ClosingGatesNeverAddsBits) {
  const auto f = fixtures::textured_frame(128, 96, 2);
  const auto map = build_block_map(f, {});
  const auto n = map.blocks().size();
  Rng rng(31);
  for (int qp : {22, 30, 38}) {
    const auto open = encode_frame(f, map, QuantParams{qp}, std::vector<bool>(n, true));
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<bool> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = rng.below(2) == 1;
      const auto enc = encode_frame(f, map, QuantParams{qp}, d);
      EXPECT_LE(enc.stream.bit_count, open.stream.bit_count);
      EXPECT_EQ(decode_frame(enc.stream), enc.recon);
    }
  }
}

TEST(Frame, PolicySeesCodingOrder) {
  const auto f = fixtures::textured_frame(64, 64, 5);
  const auto map = build_block_map(f, {});
  std::vector<std::size_t> seen;
  const auto enc = encode_frame(f, map, QuantParams{30}, [&](const BlockContext& c) {
    seen.push_back(c.index);
    return c.index % 2 == 0;
  });
  ASSERT_EQ(seen.size(), map.blocks().size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i);
  EXPECT_EQ(enc.coded_blocks(), (seen.size() + 1) / 2);
  EXPECT_EQ(peek_header(enc.stream).map, map);
  EXPECT_EQ(peek_header(enc.stream).qp, 30);
}

TEST(Frame, RejectsBadStreams) {
  const auto enc = encode_all_open(fixtures::textured_frame(64, 64, 5), 30);
  auto bad = enc.stream;
  bad.bytes[0] = 'X';
  try {
    decode_frame(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedHeader);
  }
  auto cut = enc.stream;
  cut.bytes.resize(cut.bytes.size() / 2);
  cut.bit_count = cut.bytes.size() * 8;
  EXPECT_THROW(decode_frame(cut), Error);
}
