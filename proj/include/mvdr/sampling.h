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

// Motion-vector warping and offset-augmented bilinear gathering (deformable
// convolution with a single offset group), with analytic gradients.

#ifndef MVDR_SAMPLING_H_
#define MVDR_SAMPLING_H_

#include "mvdr/frame.h"
#include "mvdr/layers.h"
#include "mvdr/tensor.h"

namespace mvdr {

// Bilinear interpolation at (x, y) after clamping to [0, W-1] x [0, H-1].
double BilinearSample(const FeatureMap& map, double x, double y, int channel);

// Each leaf's area is read from `map` displaced by the leaf's motion vector,
// out(x, y) = map(clamp(x - dx), clamp(y - dy)), the same convention as the
// codec's motion compensation. Intra leaves copy in place.
FeatureMap WarpMv(const FeatureMap& map, const MotionField& motion,
                  const PartitionMap& partition);

// Dense 2-plane rasterization (dx, dy) of a motion field; intra leaves are 0.
FeatureMap RasterizeMotion(const MotionField& motion,
                           const PartitionMap& partition);

// Offsets have 2 * k * k channels: channel 2t holds the x and 2t + 1 the y
// displacement of tap t = ky * k + kx, per output position.
void CheckOffsets(const FeatureMap& offsets, const FeatureMap& input, int k);

// out(o, p) = act(b[o] + sum_{i,t} w[o,i,t] * sample(in_i, p + g_t + off_t(p)))
// where g_t is the nominal grid position of tap t. Zero offsets, zero bias and
// no activation reduce this to ConvForward.
FeatureMap DeformableGather(const FeatureMap& input, const FeatureMap& offsets,
                            const ConvLayer& kernel);

struct GatherGrads {
  FeatureMap input;
  FeatureMap offsets;
  std::vector<double> weights;
  std::vector<double> bias;
};

// Coordinates clamped at the border get a zero coordinate gradient.
GatherGrads DeformableGatherBackward(const FeatureMap& input,
                                     const FeatureMap& offsets,
                                     const ConvLayer& kernel,
                                     const FeatureMap& output,
                                     const FeatureMap& upstream);

// Two-layer 3x3 stack mapping [F_t, F_{t-1}, MV planes] to offsets.
struct OffsetPredictor {
  ConvLayer hidden;  // relu
  ConvLayer output;  // linear, 2 * taps channels

  OffsetPredictor() = default;
  // `in_channels` counts the concatenated input, motion planes included.
  OffsetPredictor(int in_channels, int width, int kernel_taps);
};

struct OffsetPredictorTape {
  FeatureMap input;
  FeatureMap hidden;
  FeatureMap offsets;
};

FeatureMap PredictOffsets(const FeatureMap& features_t,
                          const FeatureMap& features_tm1,
                          const FeatureMap& motion_planes,
                          const OffsetPredictor& predictor,
                          OffsetPredictorTape* tape = nullptr);

struct OffsetPredictorGrads {
  FeatureMap features_t;
  FeatureMap features_tm1;
  FeatureMap motion_planes;
  ConvGrads hidden;
  ConvGrads output;
};

OffsetPredictorGrads PredictOffsetsBackward(const OffsetPredictor& predictor,
                                            const OffsetPredictorTape& tape,
                                            int channels_t, int channels_tm1,
                                            const FeatureMap& upstream,
                                            bool want_input_grad = true);

}  // namespace mvdr

#endif  // MVDR_SAMPLING_H_
