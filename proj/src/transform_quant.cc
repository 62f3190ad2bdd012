// Copyright 2026 The MVDR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "mvdr/transform_quant.h"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mvdr/error.h"

namespace mvdr {
namespace {

void CheckSize(int size) {
  if (size != 4 && size != 8) {
    ThrowInvalid("unsupported transform size " + std::to_string(size));
  }
}

// basis[k * n + i] = alpha(k) * cos(pi * (2i + 1) * k / (2n)).
template <int N>
std::array<double, N * N> MakeBasis() {
  std::array<double, N * N> basis{};
  for (int k = 0; k < N; ++k) {
    const double alpha = k == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
    for (int i = 0; i < N; ++i) {
      basis[k * N + i] =
          alpha * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * N));
    }
  }
  return basis;
}

std::span<const double> Basis(int size) {
  static const auto kBasis4 = MakeBasis<4>();
  static const auto kBasis8 = MakeBasis<8>();
  if (size == 4) return kBasis4;
  return kBasis8;
}

template <int N>
std::array<int, N * N> MakeZigzag() {
  std::array<int, N * N> order{};
  int i = 0;
  for (int s = 0; s < 2 * N - 1; ++s) {
    // Odd diagonals run top-right to bottom-left, even ones the other way.
    if (s % 2 == 0) {
      for (int y = std::min(s, N - 1); y >= 0 && s - y < N; --y) {
        order[i++] = y * N + (s - y);
      }
    } else {
      for (int x = std::min(s, N - 1); x >= 0 && s - x < N; --x) {
        order[i++] = (s - x) * N + x;
      }
    }
  }
  return order;
}

}  // namespace

QuantTable::QuantTable(int qp) : qp_(qp), step_(0) {
  if (qp < 0 || qp > kMaxQp) {
    ThrowInvalid("qp " + std::to_string(qp) + " outside [0, 51]");
  }
  step_ = StepForQp(qp);
}

double QuantTable::StepForQp(int qp) {
  static const std::array<double, 6> kFraction = {
      1.0,
      std::pow(2.0, 1.0 / 6.0),
      std::pow(2.0, 2.0 / 6.0),
      std::pow(2.0, 3.0 / 6.0),
      std::pow(2.0, 4.0 / 6.0),
      std::pow(2.0, 5.0 / 6.0),
  };
  const int e = qp - 4;
  int octave = e >= 0 ? e / 6 : -((-e + 5) / 6);
  int rem = e - 6 * octave;
  return std::ldexp(kFraction[rem], octave);
}

CoeffBlock Dct2d(std::span<const double> block, int size) {
  CheckSize(size);
  if (block.size() != static_cast<size_t>(size) * size) {
    ThrowInvalid("block sample count does not match transform size");
  }
  auto basis = Basis(size);
  // rows[y][u] = sum_x basis[u][x] * block[y][x]
  std::array<double, 64> rows{};
  for (int y = 0; y < size; ++y) {
    for (int u = 0; u < size; ++u) {
      double acc = 0;
      for (int x = 0; x < size; ++x) acc += basis[u * size + x] * block[y * size + x];
      rows[y * size + u] = acc;
    }
  }
  CoeffBlock out(size);
  for (int v = 0; v < size; ++v) {
    for (int u = 0; u < size; ++u) {
      double acc = 0;
      for (int y = 0; y < size; ++y) acc += basis[v * size + y] * rows[y * size + u];
      out.at(u, v) = acc;
    }
  }
  return out;
}

std::vector<double> Idct2d(const CoeffBlock& coeffs) {
  const int size = coeffs.size;
  CheckSize(size);
  auto basis = Basis(size);
  // cols[y][u] = sum_v basis[v][y] * c[v][u]
  std::array<double, 64> cols{};
  for (int y = 0; y < size; ++y) {
    for (int u = 0; u < size; ++u) {
      double acc = 0;
      for (int v = 0; v < size; ++v) acc += basis[v * size + y] * coeffs.at(u, v);
      cols[y * size + u] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double acc = 0;
      for (int u = 0; u < size; ++u) acc += basis[u * size + x] * cols[y * size + u];
      out[y * size + x] = acc;
    }
  }
  return out;
}

int QuantizeCoeff(double coeff, double step) {
  if (!std::isfinite(coeff)) ThrowInvalid("non-finite DCT coefficient");
  double r = std::round(coeff / step);
  if (std::abs(r) > std::numeric_limits<int16_t>::max()) {
    ThrowInvalid("quantization level overflows signed 16 bits");
  }
  int level = static_cast<int>(r);
  // The division above can land on the wrong side of a tie by one ulp. Nudge
  // the level so that the bounds, evaluated with exactly the arithmetic of
  // ComputeCoeffBounds, contain the coefficient.
  const double half = step * 0.5;
  if (coeff < DequantizeLevel(level, step) - half) {
    --level;
  } else if (coeff > DequantizeLevel(level, step) + half) {
    ++level;
  }
  if (level > std::numeric_limits<int16_t>::max() ||
      level < std::numeric_limits<int16_t>::min()) {
    ThrowInvalid("quantization level overflows signed 16 bits");
  }
  return level;
}

QuantLevels Quantize(const CoeffBlock& coeffs, const QuantTable& q) {
  CheckSize(coeffs.size);
  QuantLevels out(coeffs.size);
  for (size_t i = 0; i < coeffs.coeffs.size(); ++i) {
    out.levels[i] = QuantizeCoeff(coeffs.coeffs[i], q.step());
  }
  return out;
}

CoeffBlock Dequantize(const QuantLevels& levels, const QuantTable& q) {
  CheckSize(levels.size);
  CoeffBlock out(levels.size);
  for (size_t i = 0; i < levels.levels.size(); ++i) {
    out.coeffs[i] = DequantizeLevel(levels.levels[i], q.step());
  }
  return out;
}

CoeffBounds ComputeCoeffBounds(const CoeffBlock& decoded, const QuantTable& q) {
  return ComputeCoeffBounds(decoded, q.step());
}

CoeffBounds ComputeCoeffBounds(const CoeffBlock& decoded, double step) {
  CoeffBounds bounds;
  bounds.size = decoded.size;
  bounds.lower.resize(decoded.coeffs.size());
  bounds.upper.resize(decoded.coeffs.size());
  const double half = step * 0.5;
  for (size_t i = 0; i < decoded.coeffs.size(); ++i) {
    bounds.lower[i] = decoded.coeffs[i] - half;
    bounds.upper[i] = decoded.coeffs[i] + half;
  }
  return bounds;
}

std::span<const int> ZigzagOrder(int size) {
  CheckSize(size);
  static const auto kZigzag4 = MakeZigzag<4>();
  static const auto kZigzag8 = MakeZigzag<8>();
  if (size == 4) return kZigzag4;
  return kZigzag8;
}

}  // namespace mvdr
