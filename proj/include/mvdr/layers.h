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

// Convolution with clamp-to-edge padding, sigmoid spatial attention and
// attention-gated fusion, each with an analytic backward pass.

#ifndef MVDR_LAYERS_H_
#define MVDR_LAYERS_H_

#include <vector>

#include "mvdr/tensor.h"

namespace mvdr {

enum class Activation : int { kNone = 0, kRelu = 1, kSigmoid = 2 };

struct ConvLayer {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_size = 1;  // odd
  Activation activation = Activation::kNone;
  std::vector<double> weights;  // [out][in][ky][kx]
  std::vector<double> bias;     // [out]

  ConvLayer() = default;
  ConvLayer(int out, int in, int k, Activation act);

  size_t weight_index(int o, int i, int ky, int kx) const {
    return ((static_cast<size_t>(o) * in_channels + i) * kernel_size + ky) *
               kernel_size + kx;
  }
  size_t parameter_count() const { return weights.size() + bias.size(); }
};

struct ConvGrads {
  FeatureMap input;  // empty when not requested
  std::vector<double> weights;
  std::vector<double> bias;
};

// Cross-correlation, out(o,y,x) = act(b[o] + sum w[o,i,ky,kx] *
// in(i, clamp(y+ky-r), clamp(x+kx-r))), r = kernel_size / 2.
FeatureMap ConvForward(const ConvLayer& layer, const FeatureMap& input);

// `output` is the forward result (post-activation); `upstream` is dL/doutput.
ConvGrads ConvBackward(const ConvLayer& layer, const FeatureMap& input,
                       const FeatureMap& output, const FeatureMap& upstream,
                       bool want_input_grad = true);

// Multiplies `upstream` by the activation derivative, evaluated from the
// post-activation output.
FeatureMap ActivationBackward(Activation act, const FeatureMap& output,
                              const FeatureMap& upstream);

// M = sigmoid(conv7x7([video, aux])), one channel in [0, 1].
FeatureMap AttentionMap(const FeatureMap& video, const FeatureMap& aux,
                        const ConvLayer& layer);

struct AttentionGrads {
  FeatureMap video;
  FeatureMap aux;
  std::vector<double> weights;
  std::vector<double> bias;
};

AttentionGrads AttentionBackward(const FeatureMap& video, const FeatureMap& aux,
                                 const ConvLayer& layer, const FeatureMap& map,
                                 const FeatureMap& upstream);

// F_agg = agg([Fv, Fa * Ma, Fl * Ml]) with the single-channel maps broadcast
// over feature channels.
FeatureMap Fuse(const FeatureMap& fv, const FeatureMap& fa, const FeatureMap& fl,
                const FeatureMap& ma, const FeatureMap& ml, const ConvLayer& agg);

struct FuseGrads {
  FeatureMap fv, fa, fl, ma, ml;
  std::vector<double> weights;
  std::vector<double> bias;
};

FuseGrads FuseBackward(const FeatureMap& fv, const FeatureMap& fa,
                       const FeatureMap& fl, const FeatureMap& ma,
                       const FeatureMap& ml, const ConvLayer& agg,
                       const FeatureMap& output, const FeatureMap& upstream);

}  // namespace mvdr

#endif  // MVDR_LAYERS_H_
