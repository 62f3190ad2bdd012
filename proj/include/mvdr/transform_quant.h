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

// Orthonormal block DCT-II, flat scalar quantization and the per-coefficient
// quantization interval [d - step/2, d + step/2] that contains the original
// coefficient for every dequantized value d.

#ifndef MVDR_TRANSFORM_QUANT_H_
#define MVDR_TRANSFORM_QUANT_H_

#include <span>
#include <vector>

#include "mvdr/frame.h"

namespace mvdr {

inline constexpr int kMaxQp = 51;

// Flat quantizer for one QP: step(qp) = 2^((qp - 4) / 6).
class QuantTable {
 public:
  explicit QuantTable(int qp);

  int qp() const { return qp_; }
  double step() const { return step_; }

  // Doubles exactly every 6 QP.
  static double StepForQp(int qp);

 private:
  int qp_;
  double step_;
};

struct CoeffBounds {
  int size = 0;
  std::vector<double> lower;
  std::vector<double> upper;
};

// `block` is size*size row-major samples; size must be 4 or 8.
CoeffBlock Dct2d(std::span<const double> block, int size);
std::vector<double> Idct2d(const CoeffBlock& coeffs);

// round(coeff / step), ties away from zero. Throws if a level leaves the
// signed 16-bit range.
QuantLevels Quantize(const CoeffBlock& coeffs, const QuantTable& q);
CoeffBlock Dequantize(const QuantLevels& levels, const QuantTable& q);

// Scalar forms of the two operations above.
int QuantizeCoeff(double coeff, double step);
inline double DequantizeLevel(int level, double step) { return level * step; }

// L = decoded - step/2, U = decoded + step/2.
CoeffBounds ComputeCoeffBounds(const CoeffBlock& decoded, double step);
CoeffBounds ComputeCoeffBounds(const CoeffBlock& decoded, const QuantTable& q);

// Zigzag scan order for a size x size block: entry i is the row-major index
// of the i-th scanned coefficient.
std::span<const int> ZigzagOrder(int size);

}  // namespace mvdr

#endif  // MVDR_TRANSFORM_QUANT_H_
