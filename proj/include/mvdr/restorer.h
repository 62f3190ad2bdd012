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

// Toy-scale multi-frame restorer: MV-guided deformable alignment of the
// neighbor frames, a video branch, two attention-gated branches over codec
// priors, fusion, and a residual reconstruction added to the center frame.

#ifndef MVDR_RESTORER_H_
#define MVDR_RESTORER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvdr/frame.h"
#include "mvdr/layers.h"
#include "mvdr/rng.h"
#include "mvdr/sampling.h"
#include "mvdr/tensor.h"

namespace mvdr {

struct RestorerShape {
  int window_radius = 2;  // window of 2n + 1 frames
  int channels = 16;
  int offset_channels = 8;
  int gather_channels = 2;

  int window_size() const { return 2 * window_radius + 1; }
  int neighbor_count() const { return 2 * window_radius; }
  void Validate() const;
  bool operator==(const RestorerShape&) const = default;
};

// Fixed layer schedule; the model file records every entry.
enum RestorerLayer : int {
  kOffsetHidden = 0,
  kOffsetOut,
  kGather,
  kVideo1,
  kVideo2,
  kCodec1,
  kCodec2,
  kLayout1,
  kLayout2,
  kAttentionCodec,
  kAttentionLayout,
  kAggregate,
  kReconstruct1,
  kReconstruct2,
  kRestorerLayerCount,
};

inline constexpr int kCodecPlanes = 3;   // prediction, residual, qp
inline constexpr int kLayoutPlanes = 2;  // |MV|, leaf size

struct RestorerModel {
  RestorerShape shape;
  std::vector<ConvLayer> layers;  // kRestorerLayerCount entries

  // All parameters zero: the identity restorer.
  static RestorerModel Zero(const RestorerShape& shape);
  // Uniform(-a, a), a = 1 / sqrt(fan_in). The offset output and the final
  // reconstruction layer start at zero so training begins at the identity
  // with plain-convolution alignment.
  static RestorerModel Initialized(const RestorerShape& shape, Rng& rng);

  size_t parameter_count() const;
  // Weights then bias, layer by layer.
  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> params);
  void SetZero();
  void Accumulate(const RestorerModel& other, double scale = 1.0);
};

// "MVDR", version, shape, layer schedule, then little-endian f64 parameters.
void SaveModel(const std::filesystem::path& path, const RestorerModel& model);
RestorerModel LoadModel(const std::filesystem::path& path);

// Dense codec priors for one frame, normalized to roughly unit range.
struct AuxPriorPlanes {
  FeatureMap codec;   // prediction / 255, residual / 255, qp / 51
  FeatureMap layout;  // |MV| / 16, leaf size / 16
};

AuxPriorPlanes MakeAuxPriorPlanes(const SideInfo& side);

// Frame indices of the window around `center`, padded by repetition.
std::vector<int> WindowIndices(int center, int frame_count, int radius);

// Network input for one center frame. Neighbors are in temporal order with
// the center removed; each is pre-warped by the center frame's motion
// vectors scaled by the temporal distance.
struct RestorerInput {
  Plane decoded;                      // center frame in pixel units
  FeatureMap center;                  // 1 channel, / 255
  std::vector<FeatureMap> neighbors;  // 1 channel each, / 255
  std::vector<FeatureMap> motion;     // 2 channels each, scaled MV / 16
  AuxPriorPlanes aux;
  int width() const { return center.width; }
  int height() const { return center.height; }
};

// `window` holds 2n + 1 decoded frames and `offsets` their temporal distance
// from the center (0 for repeated padding frames).
RestorerInput PrepareRestorerInput(std::span<const Frame> window,
                                   std::span<const int> offsets,
                                   const SideInfo& center_side);

RestorerInput CropInput(const RestorerInput& input, int x0, int y0, int w, int h);

// Forward activations kept for the backward pass.
struct RestorerTape {
  std::vector<OffsetPredictorTape> offsets;  // per neighbor
  std::vector<FeatureMap> gathered;          // per neighbor
  FeatureMap video_in, video1, fv;
  FeatureMap codec1, fa, layout1, fl;
  FeatureMap ma, ml;
  FeatureMap aggregate, reconstruct1, residual;
};

// Unrounded output in pixel units: center + 255 * residual branch.
Plane RestorerForward(const RestorerModel& model, const RestorerInput& input,
                      RestorerTape* tape = nullptr);

// Parameter gradients for dL/doutput = `upstream`, returned in a model of
// the same shape.
RestorerModel RestorerBackward(const RestorerModel& model,
                               const RestorerInput& input,
                               const RestorerTape& tape, const Plane& upstream);

}  // namespace mvdr

#endif  // MVDR_RESTORER_H_
