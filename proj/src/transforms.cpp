#include "cafbp/transforms.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace cafbp {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

bool is_supported_dct_size(int size) { return size >= 2 && size <= 64 && is_power_of_two(size); }

namespace {

// basis[k * n + i] = c(k) cos(pi (2i + 1) k / 2n)
const std::vector<double>& dct_basis(int n) {
  static const std::array<std::vector<double>, 7> tables = [] {
    std::array<std::vector<double>, 7> t;
    for (int log = 1; log <= 6; ++log) {
      const int size = 1 << log;
      auto& b = t[log];
      b.resize(static_cast<std::size_t>(size) * size);
      for (int k = 0; k < size; ++k) {
        const double c = k == 0 ? std::sqrt(1.0 / size) : std::sqrt(2.0 / size);
        for (int i = 0; i < size; ++i)
          b[static_cast<std::size_t>(k) * size + i] =
              c * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * size));
      }
    }
    return t;
  }();
  return tables[std::countr_zero(static_cast<unsigned>(n))];
}

void check_dct(int size, std::size_t len) {
  if (!is_supported_dct_size(size))
    throw Error(Errc::UnsupportedSize, "DCT size " + std::to_string(size));
  if (len != static_cast<std::size_t>(size) * size)
    throw Error(Errc::DimensionMismatch, "buffer is not size*size");
}

// out = M in M^T (forward) or M^T in M (inverse), M the DCT basis.
void separable(std::span<double> data, int n, std::span<double> tmp, bool inverse) {
  const auto& m = dct_basis(n);
  // Rows: tmp[r][k] = sum_i data[r][i] * B(k, i)
  for (int r = 0; r < n; ++r) {
    const double* row = data.data() + static_cast<std::size_t>(r) * n;
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += row[i] * (inverse ? m[static_cast<std::size_t>(i) * n + k] : m[static_cast<std::size_t>(k) * n + i]);
      tmp[static_cast<std::size_t>(r) * n + k] = acc;
    }
  }
  // Columns.
  for (int c = 0; c < n; ++c) {
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += tmp[static_cast<std::size_t>(i) * n + c] *
               (inverse ? m[static_cast<std::size_t>(i) * n + k] : m[static_cast<std::size_t>(k) * n + i]);
      data[static_cast<std::size_t>(k) * n + c] = acc;
    }
  }
}

}  // namespace

void dct2_forward_inplace(std::span<double> block, int size, std::span<double> scratch) {
  check_dct(size, block.size());
  separable(block, size, scratch, false);
}

void dct2_inverse_inplace(std::span<double> coeffs, int size, std::span<double> scratch) {
  check_dct(size, coeffs.size());
  separable(coeffs, size, scratch, true);
}

std::vector<double> dct2_forward(std::span<const double> block, int size) {
  std::vector<double> out(block.begin(), block.end());
  std::vector<double> tmp(out.size());
  dct2_forward_inplace(out, size, tmp);
  return out;
}

std::vector<double> dct2_inverse(std::span<const double> coeffs, int size) {
  std::vector<double> out(coeffs.begin(), coeffs.end());
  std::vector<double> tmp(out.size());
  dct2_inverse_inplace(out, size, tmp);
  return out;
}

void wht1_inplace(std::span<double> v) {
  const int n = static_cast<int>(v.size());
  if (!is_power_of_two(n) || n > 32)
    throw Error(Errc::NotPowerOfTwo, "WHT length " + std::to_string(n));
  const double s = 1.0 / std::numbers::sqrt2;
  for (int half = 1; half < n; half *= 2) {
    for (int base = 0; base < n; base += 2 * half) {
      for (int i = base; i < base + half; ++i) {
        const double a = v[i], b = v[i + half];
        v[i] = (a + b) * s;
        v[i + half] = (a - b) * s;
      }
    }
  }
}

std::vector<double> wht1_forward(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  wht1_inplace(out);
  return out;
}

Spectrum3D group_forward(std::span<const double> stack, int size, int group_size) {
  if (!is_power_of_two(group_size) || group_size > 32)
    throw Error(Errc::NotPowerOfTwo, "group size " + std::to_string(group_size));
  const std::size_t area = static_cast<std::size_t>(size) * size;
  if (stack.size() != area * group_size)
    throw Error(Errc::DimensionMismatch, "stack does not hold group_size blocks");

  Spectrum3D s{size, group_size, std::vector<double>(stack.begin(), stack.end())};
  std::vector<double> tmp(area);
  for (int g = 0; g < group_size; ++g)
    dct2_forward_inplace(std::span<double>(s.coeffs).subspan(g * area, area), size, tmp);
  if (group_size > 1) {
    std::vector<double> column(group_size);
    for (std::size_t p = 0; p < area; ++p) {
      for (int g = 0; g < group_size; ++g) column[g] = s.coeffs[g * area + p];
      wht1_inplace(column);
      for (int g = 0; g < group_size; ++g) s.coeffs[g * area + p] = column[g];
    }
  }
  return s;
}

std::vector<double> group_inverse(const Spectrum3D& spectrum) {
  const int size = spectrum.size, group_size = spectrum.group_size;
  if (!is_power_of_two(group_size) || group_size > 32)
    throw Error(Errc::NotPowerOfTwo, "group size " + std::to_string(group_size));
  const std::size_t area = static_cast<std::size_t>(size) * size;
  if (spectrum.coeffs.size() != area * group_size)
    throw Error(Errc::DimensionMismatch, "spectrum size mismatch");

  std::vector<double> out = spectrum.coeffs;
  if (group_size > 1) {
    std::vector<double> column(group_size);
    for (std::size_t p = 0; p < area; ++p) {
      for (int g = 0; g < group_size; ++g) column[g] = out[g * area + p];
      wht1_inplace(column);
      for (int g = 0; g < group_size; ++g) out[g * area + p] = column[g];
    }
  }
  std::vector<double> tmp(area);
  for (int g = 0; g < group_size; ++g)
    dct2_inverse_inplace(std::span<double>(out).subspan(g * area, area), size, tmp);
  return out;
}

}  // namespace cafbp
