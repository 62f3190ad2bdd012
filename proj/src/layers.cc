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


#include "mvdr/layers.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvdr/error.h"

namespace mvdr {
namespace {

// out[y][x] = plane[clamp(y + oy)][clamp(x + ox)].
void ShiftClamped(const double* plane, int h, int w, int ox, int oy, double* out) {
  const int x_lo = std::clamp(-ox, 0, w);          // first x with x+ox >= 0
  const int x_hi = std::clamp(w - ox, x_lo, w);   // first x with x+ox >= w
  for (int y = 0; y < h; ++y) {
    const double* row = plane + static_cast<size_t>(std::clamp(y + oy, 0, h - 1)) * w;
    double* dst = out + static_cast<size_t>(y) * w;
    for (int x = 0; x < x_lo; ++x) dst[x] = row[0];
    for (int x = x_lo; x < x_hi; ++x) dst[x] = row[x + ox];
    for (int x = x_hi; x < w; ++x) dst[x] = row[w - 1];
  }
}

// Adjoint of ShiftClamped: grad[clamp(y+oy)][clamp(x+ox)] += src[y][x].
void ScatterClamped(const double* src, int h, int w, int ox, int oy, double* grad) {
  const int x_lo = std::clamp(-ox, 0, w);
  const int x_hi = std::clamp(w - ox, x_lo, w);
  for (int y = 0; y < h; ++y) {
    double* row = grad + static_cast<size_t>(std::clamp(y + oy, 0, h - 1)) * w;
    const double* s = src + static_cast<size_t>(y) * w;
    for (int x = 0; x < x_lo; ++x) row[0] += s[x];
    for (int x = x_lo; x < x_hi; ++x) row[x + ox] += s[x];
    for (int x = x_hi; x < w; ++x) row[w - 1] += s[x];
  }
}

void CheckConvInput(const ConvLayer& layer, const FeatureMap& input) {
  if (input.channels != layer.in_channels) {
    ThrowInvalid("convolution expects " + std::to_string(layer.in_channels) +
                 " input channels, got " + std::to_string(input.channels));
  }
  if (layer.weights.size() != static_cast<size_t>(layer.out_channels) *
                                  layer.in_channels * layer.kernel_size *
                                  layer.kernel_size ||
      layer.bias.size() != static_cast<size_t>(layer.out_channels)) {
    ThrowInvalid("convolution parameters do not match the layer shape");
  }
}

void CheckSame(const FeatureMap& a, const FeatureMap& b, const char* what) {
  if (a.channels != b.channels || !a.SameSpatial(b)) {
    ThrowInvalid(std::string("shape mismatch: ") + what);
  }
}

FeatureMap Gate(const FeatureMap& features, const FeatureMap& map) {
  FeatureMap out = features;
  const size_t n = features.plane_size();
  for (int c = 0; c < features.channels; ++c) {
    double* p = out.plane(c).data();
    for (size_t i = 0; i < n; ++i) p[i] *= map.values[i];
  }
  return out;
}

void CheckGateShapes(const FeatureMap& f, const FeatureMap& m) {
  if (m.channels != 1 || !m.SameSpatial(f)) {
    ThrowInvalid("attention map must be 1 x H x W matching its features");
  }
}

}  // namespace

ConvLayer::ConvLayer(int out, int in, int k, Activation act)
    : out_channels(out),
      in_channels(in),
      kernel_size(k),
      activation(act),
      weights(static_cast<size_t>(out) * in * k * k, 0.0),
      bias(static_cast<size_t>(out), 0.0) {
  if (out <= 0 || in <= 0 || k <= 0 || k % 2 == 0) {
    ThrowInvalid("convolution needs positive channels and an odd kernel size");
  }
}

FeatureMap ConvForward(const ConvLayer& layer, const FeatureMap& input) {
  CheckConvInput(layer, input);
  const int h = input.height, w = input.width, k = layer.kernel_size, r = k / 2;
  const size_t n = input.plane_size();
  FeatureMap out(layer.out_channels, h, w);
  for (int o = 0; o < layer.out_channels; ++o) {
    std::fill(out.plane(o).begin(), out.plane(o).end(), layer.bias[o]);
  }
  std::vector<double> shifted(n);
  for (int i = 0; i < layer.in_channels; ++i) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        ShiftClamped(input.plane(i).data(), h, w, kx - r, ky - r, shifted.data());
        for (int o = 0; o < layer.out_channels; ++o) {
          const double wt = layer.weights[layer.weight_index(o, i, ky, kx)];
          if (wt == 0.0) continue;
          double* dst = out.plane(o).data();
          for (size_t p = 0; p < n; ++p) dst[p] += wt * shifted[p];
        }
      }
    }
  }
  if (layer.activation == Activation::kRelu) {
    for (double& v : out.values) v = v > 0 ? v : 0.0;
  } else if (layer.activation == Activation::kSigmoid) {
    for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
  }
  return out;
}

FeatureMap ActivationBackward(Activation act, const FeatureMap& output,
                              const FeatureMap& upstream) {
  FeatureMap g = upstream;
  if (act == Activation::kRelu) {
    for (size_t i = 0; i < g.values.size(); ++i) {
      if (output.values[i] <= 0) g.values[i] = 0.0;
    }
  } else if (act == Activation::kSigmoid) {
    for (size_t i = 0; i < g.values.size(); ++i) {
      const double s = output.values[i];
      g.values[i] *= s * (1.0 - s);
    }
  }
  return g;
}

ConvGrads ConvBackward(const ConvLayer& layer, const FeatureMap& input,
                       const FeatureMap& output, const FeatureMap& upstream,
                       bool want_input_grad) {
  CheckConvInput(layer, input);
  CheckSame(output, upstream, "convolution upstream gradient");
  if (output.channels != layer.out_channels || !output.SameSpatial(input)) {
    ThrowInvalid("shape mismatch: convolution output");
  }
  const int h = input.height, w = input.width, k = layer.kernel_size, r = k / 2;
  const size_t n = input.plane_size();
  const FeatureMap g = ActivationBackward(layer.activation, output, upstream);

  ConvGrads grads;
  grads.weights.assign(layer.weights.size(), 0.0);
  grads.bias.assign(layer.bias.size(), 0.0);
  if (want_input_grad) grads.input = FeatureMap(input.channels, h, w);
  for (int o = 0; o < layer.out_channels; ++o) {
    double acc = 0;
    for (double v : g.plane(o)) acc += v;
    grads.bias[o] = acc;
  }
  std::vector<double> shifted(n), back(n);
  for (int i = 0; i < layer.in_channels; ++i) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        ShiftClamped(input.plane(i).data(), h, w, kx - r, ky - r, shifted.data());
        std::fill(back.begin(), back.end(), 0.0);
        for (int o = 0; o < layer.out_channels; ++o) {
          const double* go = g.plane(o).data();
          double dot = 0;
          for (size_t p = 0; p < n; ++p) dot += go[p] * shifted[p];
          const size_t wi = layer.weight_index(o, i, ky, kx);
          grads.weights[wi] = dot;
          if (want_input_grad) {
            const double wt = layer.weights[wi];
            if (wt == 0.0) continue;
            for (size_t p = 0; p < n; ++p) back[p] += wt * go[p];
          }
        }
        if (want_input_grad) {
          ScatterClamped(back.data(), h, w, kx - r, ky - r,
                         grads.input.plane(i).data());
        }
      }
    }
  }
  return grads;
}

FeatureMap AttentionMap(const FeatureMap& video, const FeatureMap& aux,
                        const ConvLayer& layer) {
  if (!video.SameSpatial(aux)) ThrowInvalid("attention inputs differ in size");
  if (layer.out_channels != 1 || layer.activation != Activation::kSigmoid ||
      layer.kernel_size != 7) {
    ThrowInvalid("attention layer must be a single-output 7x7 sigmoid conv");
  }
  return ConvForward(layer, Concat({&video, &aux}));
}

AttentionGrads AttentionBackward(const FeatureMap& video, const FeatureMap& aux,
                                 const ConvLayer& layer, const FeatureMap& map,
                                 const FeatureMap& upstream) {
  const FeatureMap input = Concat({&video, &aux});
  ConvGrads g = ConvBackward(layer, input, map, upstream);
  AttentionGrads out;
  out.video = SliceChannels(g.input, 0, video.channels);
  out.aux = SliceChannels(g.input, video.channels, aux.channels);
  out.weights = std::move(g.weights);
  out.bias = std::move(g.bias);
  return out;
}

FeatureMap Fuse(const FeatureMap& fv, const FeatureMap& fa, const FeatureMap& fl,
                const FeatureMap& ma, const FeatureMap& ml, const ConvLayer& agg) {
  CheckGateShapes(fa, ma);
  CheckGateShapes(fl, ml);
  if (!fv.SameSpatial(fa) || !fv.SameSpatial(fl)) {
    ThrowInvalid("fusion inputs differ in spatial size");
  }
  const FeatureMap ga = Gate(fa, ma);
  const FeatureMap gl = Gate(fl, ml);
  return ConvForward(agg, Concat({&fv, &ga, &gl}));
}

FuseGrads FuseBackward(const FeatureMap& fv, const FeatureMap& fa,
                       const FeatureMap& fl, const FeatureMap& ma,
                       const FeatureMap& ml, const ConvLayer& agg,
                       const FeatureMap& output, const FeatureMap& upstream) {
  CheckGateShapes(fa, ma);
  CheckGateShapes(fl, ml);
  const FeatureMap ga = Gate(fa, ma);
  const FeatureMap gl = Gate(fl, ml);
  ConvGrads g = ConvBackward(agg, Concat({&fv, &ga, &gl}), output, upstream);
  FuseGrads out;
  out.fv = SliceChannels(g.input, 0, fv.channels);
  const FeatureMap dga = SliceChannels(g.input, fv.channels, fa.channels);
  const FeatureMap dgl =
      SliceChannels(g.input, fv.channels + fa.channels, fl.channels);
  // d(F * M)/dF = M and d(F * M)/dM = sum over channels of F.
  out.fa = Gate(dga, ma);
  out.fl = Gate(dgl, ml);
  out.ma = FeatureMap(1, ma.height, ma.width);
  out.ml = FeatureMap(1, ml.height, ml.width);
  const size_t n = fa.plane_size();
  for (int c = 0; c < fa.channels; ++c) {
    for (size_t i = 0; i < n; ++i) out.ma.values[i] += dga.plane(c)[i] * fa.plane(c)[i];
  }
  for (int c = 0; c < fl.channels; ++c) {
    for (size_t i = 0; i < n; ++i) out.ml.values[i] += dgl.plane(c)[i] * fl.plane(c)[i];
  }
  out.weights = std::move(g.weights);
  out.bias = std::move(g.bias);
  return out;
}

}  // namespace mvdr
