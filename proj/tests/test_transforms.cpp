#include <gtest/gtest.h>

#include <cmath>

#include "cafbp/random.hpp"
#include "cafbp/transforms.hpp"

using namespace cafbp;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, double scale = 255.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

double energy(const std::vector<double>& v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

// Independent O(N^4) evaluation of the orthonormal 2D DCT-II.
std::vector<double> dct2_reference(const std::vector<double>& x, int n) {
  std::vector<double> out(x.size());
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      const double cu = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      const double cv = v == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      double acc = 0.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          acc += x[r * n + c] * std::cos(M_PI * (2 * r + 1) * u / (2.0 * n)) *
                 std::cos(M_PI * (2 * c + 1) * v / (2.0 * n));
      out[u * n + v] = cu * cv * acc;
    }
  }
  return out;
}

}  // namespace

TEST(Dct2, ConstantBlockMapsToDc) {
  const auto c = dct2_forward(std::vector<double>(16, 8.0), 4);
  EXPECT_NEAR(c[0], 32.0, 1e-9);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i], 0.0, 1e-9);
  std::vector<double> dc(16, 0.0);
  dc[0] = 32.0;
  for (double s : dct2_inverse(dc, 4)) EXPECT_NEAR(s, 8.0, 1e-9);
}

TEST(Dct2, ZeroAndUnsupported) {
  for (double c : dct2_forward(std::vector<double>(64, 0.0), 8)) EXPECT_EQ(c, 0.0);
  for (double c : dct2_inverse(std::vector<double>(64, 0.0), 8)) EXPECT_EQ(c, 0.0);
  EXPECT_THROW(dct2_forward(std::vector<double>(9, 0.0), 3), Error);
  EXPECT_THROW(dct2_forward(std::vector<double>(128 * 128, 0.0), 128), Error);
}

TEST(Dct2, MatchesDirectFormulaAndPreservesEnergy) {
  Rng rng(11);
  for (int n : {2, 4, 8, 16, 32}) {
    const auto x = random_values(rng, static_cast<std::size_t>(n) * n);
    const auto fast = dct2_forward(x, n);
    const auto ref = dct2_reference(x, n);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(fast[i], ref[i], 1e-9);
    EXPECT_NEAR(energy(fast), energy(x), 1e-6 * energy(x));
    const auto back = dct2_inverse(fast, n);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
  }
}

TEST(Wht, SmallCases) {
  EXPECT_EQ(wht1_forward(std::vector<double>{3.5}), std::vector<double>{3.5});
  const auto a = wht1_forward(std::vector<double>{1.0, 1.0});
  EXPECT_NEAR(a[0], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a[1], 0.0, 1e-15);
  const auto b = wht1_forward(std::vector<double>{1.0, -1.0});
  EXPECT_NEAR(b[0], 0.0, 1e-15);
  EXPECT_NEAR(b[1], std::sqrt(2.0), 1e-15);
  EXPECT_THROW(wht1_forward(std::vector<double>(3, 1.0)), Error);
  EXPECT_THROW(wht1_forward(std::vector<double>(64, 1.0)), Error);
}

TEST(Wht, SelfInverse) {
  Rng rng(5);
  for (int n : {1, 2, 4, 8, 16, 32}) {
    const auto x = random_values(rng, n);
    const auto back = wht1_forward(wht1_forward(x));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
  }
}

TEST(Group, DoublyConstantHasSingleCoefficient) {
  const auto s = group_forward(std::vector<double>(4 * 64, 10.0), 8, 4);
  EXPECT_NEAR(s.at(0, 0, 0), 10.0 * 8 * 2, 1e-9);
  for (std::size_t i = 1; i < s.coeffs.size(); ++i) EXPECT_NEAR(s.coeffs[i], 0.0, 1e-9);
}

TEST(Group, SizeOneIsPlainDct) {
  Rng rng(8);
  const auto x = random_values(rng, 64);
  const auto s = group_forward(x, 8, 1);
  const auto d = dct2_forward(x, 8);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(s.coeffs[i], d[i]);
}

TEST(Group, Linearity) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_values(rng, 8 * 64, 1.0), y = random_values(rng, 8 * 64, 1.0);
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    std::vector<double> mix(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const auto tx = group_forward(x, 8, 8), ty = group_forward(y, 8, 8), tm = group_forward(mix, 8, 8);
    for (std::size_t i = 0; i < mix.size(); ++i)
      EXPECT_NEAR(tm.coeffs[i], a * tx.coeffs[i] + b * ty.coeffs[i], 1e-9);
  }
}

TEST(Group, RejectsNonPowerOfTwo) {
  EXPECT_THROW(group_forward(std::vector<double>(3 * 64, 0.0), 8, 3), Error);
}
