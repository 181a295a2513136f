#pragma once

#include <span>
#include <vector>

#include "cafbp/error.hpp"

namespace cafbp {

// Orthonormal separable transforms used by both the denoiser (3D: DCT per
// block, Walsh-Hadamard across the stack) and the codec (2D DCT).

// Block sides accepted by the 2D DCT: powers of two from 2 to 64.
bool is_supported_dct_size(int size);
bool is_power_of_two(int n);

// Row-major size x size in, row-major size x size out.
std::vector<double> dct2_forward(std::span<const double> block, int size);
std::vector<double> dct2_inverse(std::span<const double> coeffs, int size);

// In-place variants for hot loops; `scratch` must hold size*size values.
void dct2_forward_inplace(std::span<double> block, int size, std::span<double> scratch);
void dct2_inverse_inplace(std::span<double> coeffs, int size, std::span<double> scratch);

// Length must be a power of two in [1, 32]. Natural (Hadamard) ordering,
// 1/sqrt(2) per butterfly stage, so the transform is its own inverse.
std::vector<double> wht1_forward(std::span<const double> v);
void wht1_inplace(std::span<double> v);

// group_size x size x size coefficients, index (g * size + u) * size + v.
struct Spectrum3D {
  int size = 0;
  int group_size = 0;
  std::vector<double> coeffs;

  double& at(int g, int u, int v) { return coeffs[(static_cast<std::size_t>(g) * size + u) * size + v]; }
  double at(int g, int u, int v) const { return coeffs[(static_cast<std::size_t>(g) * size + u) * size + v]; }
};

// `stack` holds group_size consecutive size x size blocks.
Spectrum3D group_forward(std::span<const double> stack, int size, int group_size);
std::vector<double> group_inverse(const Spectrum3D& spectrum);

}  // namespace cafbp
