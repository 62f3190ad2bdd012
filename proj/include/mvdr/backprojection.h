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

// Quantization-interval back projection. A candidate reconstruction's
// residual against the codec prediction is transformed per transform block,
// every coefficient is clamped into [d - step/2, d + step/2] around the
// decoded coefficient d, and the frame is rebuilt. Since the true residual
// coefficients lie inside those intervals and the DCT is orthonormal, the
// projection never moves a candidate away from the original frame.

#ifndef MVDR_BACKPROJECTION_H_
#define MVDR_BACKPROJECTION_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "mvdr/frame.h"
#include "mvdr/transform_quant.h"

namespace mvdr {

struct ProjectionReport {
  int64_t coefficients_clamped = 0;
  double max_clamp_magnitude = 0.0;
  // Pre-rounding MSE against the ground truth, when one is supplied.
  std::optional<double> frame_mse_before;
  std::optional<double> frame_mse_after;
};

// Residual DCT coefficients of `candidate - side.prediction`, indexed like
// side.decoded_levels: [leaf][transform block].
std::vector<std::vector<CoeffBlock>> CandidateResidualCoeffs(
    const Plane& candidate, const SideInfo& side);

// Elementwise clamp into [lower, upper].
CoeffBlock ClampToBounds(const CoeffBlock& coeffs, const CoeffBounds& bounds);

// Projected candidate before rounding. The result equals
// IDCT(clamp(DCT(candidate - P))) + P per transform block, evaluated as
// candidate + IDCT(clamp(x) - x) so that blocks with no clamped coefficient
// pass through bit-exactly.
Plane BackProjectPlane(const Plane& candidate, const SideInfo& side,
                       ProjectionReport* report = nullptr,
                       const Frame* truth = nullptr);

// BackProjectPlane followed by rounding and clipping to [0, 255].
Frame BackProjectFrame(const Plane& candidate, const SideInfo& side,
                       ProjectionReport* report = nullptr,
                       const Frame* truth = nullptr);

}  // namespace mvdr

#endif  // MVDR_BACKPROJECTION_H_
