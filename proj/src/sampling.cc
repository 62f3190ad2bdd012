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


#include "mvdr/sampling.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvdr/error.h"

namespace mvdr {
namespace {

// Bilinear footprint of one clamped coordinate, plus whether each axis is
// saturated at the border.
struct Footprint {
  int x0, x1, y0, y1;
  double fx, fy;
  bool clamped_x, clamped_y;
};

Footprint MakeFootprint(double x, double y, int w, int h) {
  Footprint f;
  const double cx = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(h - 1));
  f.clamped_x = x < 0.0 || x > w - 1;
  f.clamped_y = y < 0.0 || y > h - 1;
  f.x0 = static_cast<int>(std::floor(cx));
  f.y0 = static_cast<int>(std::floor(cy));
  f.x1 = std::min(f.x0 + 1, w - 1);
  f.y1 = std::min(f.y0 + 1, h - 1);
  f.fx = cx - f.x0;
  f.fy = cy - f.y0;
  return f;
}

double Interpolate(const double* plane, int w, const Footprint& f) {
  const double v00 = plane[f.y0 * w + f.x0], v01 = plane[f.y0 * w + f.x1];
  const double v10 = plane[f.y1 * w + f.x0], v11 = plane[f.y1 * w + f.x1];
  return (1 - f.fy) * ((1 - f.fx) * v00 + f.fx * v01) +
         f.fy * ((1 - f.fx) * v10 + f.fx * v11);
}

void CheckKernel(const ConvLayer& kernel, const FeatureMap& input) {
  if (kernel.in_channels != input.channels ||
      kernel.weights.size() != static_cast<size_t>(kernel.out_channels) *
                                   kernel.in_channels * kernel.kernel_size *
                                   kernel.kernel_size ||
      kernel.bias.size() != static_cast<size_t>(kernel.out_channels)) {
    ThrowInvalid("shape mismatch: gather kernel does not fit the input");
  }
}

}  // namespace

double BilinearSample(const FeatureMap& map, double x, double y, int channel) {
  if (channel < 0 || channel >= map.channels) ThrowInvalid("channel out of range");
  const Footprint f = MakeFootprint(x, y, map.width, map.height);
  return Interpolate(map.plane(channel).data(), map.width, f);
}

FeatureMap WarpMv(const FeatureMap& map, const MotionField& motion,
                  const PartitionMap& partition) {
  if (map.width != partition.width || map.height != partition.height) {
    ThrowInvalid("warp: feature map does not match the partition");
  }
  if (motion.leaves.size() != partition.leaves.size()) {
    ThrowInvalid("warp: motion field does not match the partition");
  }
  FeatureMap out(map.channels, map.height, map.width);
  for (size_t i = 0; i < partition.leaves.size(); ++i) {
    const Leaf& leaf = partition.leaves[i];
    const LeafMotion& m = motion.leaves[i];
    const int dx = m.intra ? 0 : m.dx;
    const int dy = m.intra ? 0 : m.dy;
    for (int c = 0; c < map.channels; ++c) {
      for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
        const int sy = std::clamp(y - dy, 0, map.height - 1);
        for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
          const int sx = std::clamp(x - dx, 0, map.width - 1);
          out.at(c, y, x) = map.at(c, sy, sx);
        }
      }
    }
  }
  return out;
}

FeatureMap RasterizeMotion(const MotionField& motion,
                           const PartitionMap& partition) {
  if (motion.leaves.size() != partition.leaves.size()) {
    ThrowInvalid("motion field does not match the partition");
  }
  FeatureMap out(2, partition.height, partition.width);
  for (size_t i = 0; i < partition.leaves.size(); ++i) {
    const Leaf& leaf = partition.leaves[i];
    const LeafMotion& m = motion.leaves[i];
    for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
      for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
        out.at(0, y, x) = m.intra ? 0.0 : m.dx;
        out.at(1, y, x) = m.intra ? 0.0 : m.dy;
      }
    }
  }
  return out;
}

void CheckOffsets(const FeatureMap& offsets, const FeatureMap& input, int k) {
  if (offsets.channels != 2 * k * k || !offsets.SameSpatial(input)) {
    ThrowInvalid("shape mismatch: offsets need 2*k*k channels of the input size");
  }
  for (double v : offsets.values) {
    if (!std::isfinite(v)) ThrowInvalid("non-finite sampling offset");
  }
}

FeatureMap DeformableGather(const FeatureMap& input, const FeatureMap& offsets,
                            const ConvLayer& kernel) {
  CheckKernel(kernel, input);
  const int k = kernel.kernel_size, r = k / 2;
  CheckOffsets(offsets, input, k);
  const int h = input.height, w = input.width;
  const size_t n = input.plane_size();
  FeatureMap out(kernel.out_channels, h, w);
  for (int o = 0; o < kernel.out_channels; ++o) {
    std::fill(out.plane(o).begin(), out.plane(o).end(), kernel.bias[o]);
  }
  std::vector<Footprint> feet(n);
  std::vector<double> sampled(n);
  for (int ky = 0; ky < k; ++ky) {
    for (int kx = 0; kx < k; ++kx) {
      const int t = ky * k + kx;
      const double* ox = offsets.plane(2 * t).data();
      const double* oy = offsets.plane(2 * t + 1).data();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const size_t p = static_cast<size_t>(y) * w + x;
          feet[p] = MakeFootprint(x + kx - r + ox[p], y + ky - r + oy[p], w, h);
        }
      }
      for (int i = 0; i < input.channels; ++i) {
        const double* plane = input.plane(i).data();
        for (size_t p = 0; p < n; ++p) sampled[p] = Interpolate(plane, w, feet[p]);
        for (int o = 0; o < kernel.out_channels; ++o) {
          const double wt = kernel.weights[kernel.weight_index(o, i, ky, kx)];
          if (wt == 0.0) continue;
          double* dst = out.plane(o).data();
          for (size_t p = 0; p < n; ++p) dst[p] += wt * sampled[p];
        }
      }
    }
  }
  if (kernel.activation == Activation::kRelu) {
    for (double& v : out.values) v = v > 0 ? v : 0.0;
  } else if (kernel.activation == Activation::kSigmoid) {
    for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
  }
  return out;
}

GatherGrads DeformableGatherBackward(const FeatureMap& input,
                                     const FeatureMap& offsets,
                                     const ConvLayer& kernel,
                                     const FeatureMap& output,
                                     const FeatureMap& upstream) {
  CheckKernel(kernel, input);
  const int k = kernel.kernel_size, r = k / 2;
  CheckOffsets(offsets, input, k);
  if (output.channels != kernel.out_channels || !output.SameSpatial(input) ||
      upstream.channels != output.channels || !upstream.SameSpatial(output)) {
    ThrowInvalid("shape mismatch: gather upstream gradient");
  }
  const int h = input.height, w = input.width;
  const size_t n = input.plane_size();
  const FeatureMap g = ActivationBackward(kernel.activation, output, upstream);

  GatherGrads grads;
  grads.input = FeatureMap(input.channels, h, w);
  grads.offsets = FeatureMap(offsets.channels, h, w);
  grads.weights.assign(kernel.weights.size(), 0.0);
  grads.bias.assign(kernel.bias.size(), 0.0);
  for (int o = 0; o < kernel.out_channels; ++o) {
    double acc = 0;
    for (double v : g.plane(o)) acc += v;
    grads.bias[o] = acc;
  }
  std::vector<Footprint> feet(n);
  std::vector<double> sampled(n), back(n);
  for (int ky = 0; ky < k; ++ky) {
    for (int kx = 0; kx < k; ++kx) {
      const int t = ky * k + kx;
      const double* ox = offsets.plane(2 * t).data();
      const double* oy = offsets.plane(2 * t + 1).data();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const size_t p = static_cast<size_t>(y) * w + x;
          feet[p] = MakeFootprint(x + kx - r + ox[p], y + ky - r + oy[p], w, h);
        }
      }
      double* gox = grads.offsets.plane(2 * t).data();
      double* goy = grads.offsets.plane(2 * t + 1).data();
      for (int i = 0; i < input.channels; ++i) {
        const double* plane = input.plane(i).data();
        for (size_t p = 0; p < n; ++p) sampled[p] = Interpolate(plane, w, feet[p]);
        std::fill(back.begin(), back.end(), 0.0);
        for (int o = 0; o < kernel.out_channels; ++o) {
          const double* go = g.plane(o).data();
          double dot = 0;
          for (size_t p = 0; p < n; ++p) dot += go[p] * sampled[p];
          const size_t wi = kernel.weight_index(o, i, ky, kx);
          grads.weights[wi] = dot;
          const double wt = kernel.weights[wi];
          if (wt == 0.0) continue;
          for (size_t p = 0; p < n; ++p) back[p] += wt * go[p];
        }
        // back[p] is dL/d(sampled value); distribute it to the four
        // neighbors and to the sampling coordinates.
        double* gin = grads.input.plane(i).data();
        for (size_t p = 0; p < n; ++p) {
          const double b = back[p];
          if (b == 0.0) continue;
          const Footprint& f = feet[p];
          gin[f.y0 * w + f.x0] += b * (1 - f.fy) * (1 - f.fx);
          gin[f.y0 * w + f.x1] += b * (1 - f.fy) * f.fx;
          gin[f.y1 * w + f.x0] += b * f.fy * (1 - f.fx);
          gin[f.y1 * w + f.x1] += b * f.fy * f.fx;
          const double v00 = plane[f.y0 * w + f.x0], v01 = plane[f.y0 * w + f.x1];
          const double v10 = plane[f.y1 * w + f.x0], v11 = plane[f.y1 * w + f.x1];
          if (!f.clamped_x) {
            gox[p] += b * ((1 - f.fy) * (v01 - v00) + f.fy * (v11 - v10));
          }
          if (!f.clamped_y) {
            goy[p] += b * ((1 - f.fx) * (v10 - v00) + f.fx * (v11 - v01));
          }
        }
      }
    }
  }
  return grads;
}

OffsetPredictor::OffsetPredictor(int in_channels, int width, int kernel_taps)
    : hidden(width, in_channels, 3, Activation::kRelu),
      output(2 * kernel_taps, width, 3, Activation::kNone) {}

FeatureMap PredictOffsets(const FeatureMap& features_t,
                          const FeatureMap& features_tm1,
                          const FeatureMap& motion_planes,
                          const OffsetPredictor& predictor,
                          OffsetPredictorTape* tape) {
  if (!features_t.SameSpatial(features_tm1) ||
      !features_t.SameSpatial(motion_planes) || motion_planes.channels != 2) {
    ThrowInvalid("shape mismatch: offset predictor inputs");
  }
  OffsetPredictorTape local;
  OffsetPredictorTape& tp = tape ? *tape : local;
  tp.input = Concat({&features_t, &features_tm1, &motion_planes});
  tp.hidden = ConvForward(predictor.hidden, tp.input);
  tp.offsets = ConvForward(predictor.output, tp.hidden);
  return tp.offsets;
}

OffsetPredictorGrads PredictOffsetsBackward(const OffsetPredictor& predictor,
                                            const OffsetPredictorTape& tape,
                                            int channels_t, int channels_tm1,
                                            const FeatureMap& upstream,
                                            bool want_input_grad) {
  OffsetPredictorGrads grads;
  grads.output = ConvBackward(predictor.output, tape.hidden, tape.offsets, upstream);
  grads.hidden = ConvBackward(predictor.hidden, tape.input, tape.hidden,
                              grads.output.input, want_input_grad);
  grads.output.input = {};
  if (want_input_grad) {
    grads.features_t = SliceChannels(grads.hidden.input, 0, channels_t);
    grads.features_tm1 = SliceChannels(grads.hidden.input, channels_t, channels_tm1);
    grads.motion_planes =
        SliceChannels(grads.hidden.input, channels_t + channels_tm1, 2);
  }
  return grads;
}

}  // namespace mvdr
