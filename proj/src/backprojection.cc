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


#include "mvdr/backprojection.h"

#include <algorithm>
#include <cmath>

#include "mvdr/codec.h"
#include "mvdr/error.h"

namespace mvdr {
namespace {

void CheckCandidate(const Plane& candidate, const SideInfo& side) {
  if (candidate.width != side.prediction.width() ||
      candidate.height != side.prediction.height()) {
    ThrowInvalid("candidate dimensions do not match the side info");
  }
}

double PlaneMse(const Plane& plane, const Frame& truth) {
  if (plane.width != truth.width() || plane.height != truth.height()) {
    ThrowInvalid("ground truth dimensions do not match the candidate");
  }
  double sse = 0;
  auto samples = truth.samples();
  for (size_t i = 0; i < plane.values.size(); ++i) {
    double d = plane.values[i] - samples[i];
    sse += d * d;
  }
  return sse / static_cast<double>(plane.values.size());
}

CoeffBlock BlockResidualCoeffs(const Plane& candidate, const Frame& prediction,
                               const Leaf& tb) {
  std::vector<double> residual(static_cast<size_t>(tb.size) * tb.size);
  for (int y = 0; y < tb.size; ++y) {
    for (int x = 0; x < tb.size; ++x) {
      residual[y * tb.size + x] = candidate.at(tb.x + x, tb.y + y) -
                                  static_cast<double>(prediction.at(tb.x + x, tb.y + y));
    }
  }
  return Dct2d(residual, tb.size);
}

}  // namespace

std::vector<std::vector<CoeffBlock>> CandidateResidualCoeffs(
    const Plane& candidate, const SideInfo& side) {
  ValidateSideInfo(side);
  CheckCandidate(candidate, side);
  std::vector<std::vector<CoeffBlock>> out;
  out.reserve(side.partition.leaves.size());
  for (const Leaf& leaf : side.partition.leaves) {
    std::vector<CoeffBlock> blocks;
    for (const Leaf& tb : TransformBlocksOfLeaf(leaf)) {
      blocks.push_back(BlockResidualCoeffs(candidate, side.prediction, tb));
    }
    out.push_back(std::move(blocks));
  }
  return out;
}

CoeffBlock ClampToBounds(const CoeffBlock& coeffs, const CoeffBounds& bounds) {
  if (bounds.size != coeffs.size ||
      bounds.lower.size() != coeffs.coeffs.size() ||
      bounds.upper.size() != coeffs.coeffs.size()) {
    ThrowInvalid("coefficient bounds do not match the block");
  }
  CoeffBlock out(coeffs.size);
  for (size_t i = 0; i < coeffs.coeffs.size(); ++i) {
    const double x = coeffs.coeffs[i];
    if (x < bounds.lower[i]) {
      out.coeffs[i] = bounds.lower[i];
    } else if (x > bounds.upper[i]) {
      out.coeffs[i] = bounds.upper[i];
    } else {
      out.coeffs[i] = x;
    }
  }
  return out;
}

Plane BackProjectPlane(const Plane& candidate, const SideInfo& side,
                       ProjectionReport* report, const Frame* truth) {
  ValidateSideInfo(side);
  CheckCandidate(candidate, side);
  for (double v : candidate.values) {
    if (!std::isfinite(v)) ThrowInvalid("candidate frame has non-finite values");
  }
  const QuantTable q(side.qp);
  Plane out = candidate;
  ProjectionReport local;
  for (size_t i = 0; i < side.partition.leaves.size(); ++i) {
    const auto blocks = TransformBlocksOfLeaf(side.partition.leaves[i]);
    for (size_t b = 0; b < blocks.size(); ++b) {
      const Leaf& tb = blocks[b];
      const CoeffBlock x = BlockResidualCoeffs(candidate, side.prediction, tb);
      const CoeffBounds bounds =
          ComputeCoeffBounds(Dequantize(side.decoded_levels[i][b], q), q);
      const CoeffBlock projected = ClampToBounds(x, bounds);
      CoeffBlock delta(tb.size);
      bool any = false;
      for (size_t k = 0; k < x.coeffs.size(); ++k) {
        delta.coeffs[k] = projected.coeffs[k] - x.coeffs[k];
        if (delta.coeffs[k] != 0) {
          any = true;
          ++local.coefficients_clamped;
          local.max_clamp_magnitude =
              std::max(local.max_clamp_magnitude, std::abs(delta.coeffs[k]));
        }
      }
      if (!any) continue;
      const auto correction = Idct2d(delta);
      for (int y = 0; y < tb.size; ++y) {
        for (int xx = 0; xx < tb.size; ++xx) {
          out.at(tb.x + xx, tb.y + y) += correction[y * tb.size + xx];
        }
      }
    }
  }
  if (truth != nullptr) {
    local.frame_mse_before = PlaneMse(candidate, *truth);
    local.frame_mse_after = PlaneMse(out, *truth);
  }
  if (report != nullptr) *report = local;
  return out;
}

Frame BackProjectFrame(const Plane& candidate, const SideInfo& side,
                       ProjectionReport* report, const Frame* truth) {
  return RoundClip(BackProjectPlane(candidate, side, report, truth));
}

}  // namespace mvdr
