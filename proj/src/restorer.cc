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


#include "mvdr/restorer.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mvdr/codec.h"
#include "mvdr/error.h"

namespace mvdr {
namespace {

constexpr char kModelMagic[4] = {'M', 'V', 'D', 'R'};
constexpr uint32_t kModelVersion = 1;
constexpr double kPixelScale = 255.0;
constexpr double kMotionScale = 16.0;

std::vector<ConvLayer> Schedule(const RestorerShape& s) {
  const int c = s.channels;
  std::vector<ConvLayer> layers(kRestorerLayerCount);
  layers[kOffsetHidden] = ConvLayer(s.offset_channels, 4, 3, Activation::kRelu);
  layers[kOffsetOut] = ConvLayer(18, s.offset_channels, 3, Activation::kNone);
  layers[kGather] = ConvLayer(s.gather_channels, 1, 3, Activation::kNone);
  layers[kVideo1] = ConvLayer(
      c, 1 + s.neighbor_count() * s.gather_channels, 3, Activation::kRelu);
  layers[kVideo2] = ConvLayer(c, c, 3, Activation::kRelu);
  layers[kCodec1] = ConvLayer(c, kCodecPlanes, 3, Activation::kRelu);
  layers[kCodec2] = ConvLayer(c, c, 3, Activation::kRelu);
  layers[kLayout1] = ConvLayer(c, kLayoutPlanes, 3, Activation::kRelu);
  layers[kLayout2] = ConvLayer(c, c, 3, Activation::kRelu);
  layers[kAttentionCodec] = ConvLayer(1, 2 * c, 7, Activation::kSigmoid);
  layers[kAttentionLayout] = ConvLayer(1, 2 * c, 7, Activation::kSigmoid);
  layers[kAggregate] = ConvLayer(c, 3 * c, 3, Activation::kRelu);
  layers[kReconstruct1] = ConvLayer(c, c, 3, Activation::kRelu);
  layers[kReconstruct2] = ConvLayer(1, c, 3, Activation::kNone);
  return layers;
}

FeatureMap Normalized(const Frame& frame) {
  FeatureMap map(1, frame.height(), frame.width());
  const auto samples = frame.samples();
  for (size_t i = 0; i < samples.size(); ++i) {
    map.values[i] = samples[i] / kPixelScale;
  }
  return map;
}

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutF64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ModelReader {
 public:
  explicit ModelReader(const std::string& bytes) : bytes_(bytes) {}

  uint64_t Take(int n) {
    if (pos_ + n > bytes_.size()) ThrowInvalid("truncated model file");
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  uint32_t U32() { return static_cast<uint32_t>(Take(4)); }
  double F64() {
    const uint64_t bits = Take(8);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  size_t pos_ = 0;
};

void CheckInput(const RestorerModel& model, const RestorerInput& input) {
  const size_t n = model.shape.neighbor_count();
  if (input.neighbors.size() != n || input.motion.size() != n) {
    ThrowInvalid("window length mismatch: model expects " +
                 std::to_string(model.shape.window_size()) + " frames");
  }
  if (model.layers.size() != kRestorerLayerCount) {
    ThrowInvalid("model layer schedule is incomplete");
  }
  const FeatureMap& c = input.center;
  if (c.channels != 1 || input.decoded.width != c.width ||
      input.decoded.height != c.height ||
      input.aux.codec.channels != kCodecPlanes || !input.aux.codec.SameSpatial(c) ||
      input.aux.layout.channels != kLayoutPlanes ||
      !input.aux.layout.SameSpatial(c)) {
    ThrowInvalid("shape mismatch: restorer input planes");
  }
  for (size_t j = 0; j < n; ++j) {
    if (input.neighbors[j].channels != 1 || !input.neighbors[j].SameSpatial(c) ||
        input.motion[j].channels != 2 || !input.motion[j].SameSpatial(c)) {
      ThrowInvalid("shape mismatch: restorer neighbor planes");
    }
  }
}

OffsetPredictor PredictorOf(const RestorerModel& model) {
  OffsetPredictor p;
  p.hidden = model.layers[kOffsetHidden];
  p.output = model.layers[kOffsetOut];
  return p;
}

void AddGrads(ConvLayer& acc, const std::vector<double>& w,
              const std::vector<double>& b) {
  for (size_t i = 0; i < w.size(); ++i) acc.weights[i] += w[i];
  for (size_t i = 0; i < b.size(); ++i) acc.bias[i] += b[i];
}

void AddGrads(ConvLayer& acc, const ConvGrads& g) { AddGrads(acc, g.weights, g.bias); }

}  // namespace

void RestorerShape::Validate() const {
  if (window_radius < 0 || window_radius > 8 || channels < 1 ||
      channels > 256 || offset_channels < 1 || offset_channels > 256 ||
      gather_channels < 1 || gather_channels > 64) {
    ThrowInvalid("restorer shape out of range");
  }
}

RestorerModel RestorerModel::Zero(const RestorerShape& shape) {
  shape.Validate();
  RestorerModel model;
  model.shape = shape;
  model.layers = Schedule(shape);
  return model;
}

RestorerModel RestorerModel::Initialized(const RestorerShape& shape, Rng& rng) {
  RestorerModel model = Zero(shape);
  for (int l = 0; l < kRestorerLayerCount; ++l) {
    if (l == kOffsetOut || l == kReconstruct2) continue;
    ConvLayer& layer = model.layers[l];
    const double a =
        1.0 / std::sqrt(static_cast<double>(layer.in_channels) *
                        layer.kernel_size * layer.kernel_size);
    for (double& w : layer.weights) w = rng.Uniform(-a, a);
    for (double& b : layer.bias) b = rng.Uniform(-a, a);
  }
  return model;
}

size_t RestorerModel::parameter_count() const {
  size_t n = 0;
  for (const ConvLayer& l : layers) n += l.parameter_count();
  return n;
}

std::vector<double> RestorerModel::Flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const ConvLayer& l : layers) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void RestorerModel::Unflatten(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    ThrowInvalid("parameter count mismatch");
  }
  size_t pos = 0;
  for (ConvLayer& l : layers) {
    for (double& w : l.weights) w = params[pos++];
    for (double& b : l.bias) b = params[pos++];
  }
}

void RestorerModel::SetZero() {
  for (ConvLayer& l : layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void RestorerModel::Accumulate(const RestorerModel& other, double scale) {
  if (!(other.shape == shape)) ThrowInvalid("model shape mismatch");
  for (size_t l = 0; l < layers.size(); ++l) {
    for (size_t i = 0; i < layers[l].weights.size(); ++i) {
      layers[l].weights[i] += scale * other.layers[l].weights[i];
    }
    for (size_t i = 0; i < layers[l].bias.size(); ++i) {
      layers[l].bias[i] += scale * other.layers[l].bias[i];
    }
  }
}

void SaveModel(const std::filesystem::path& path, const RestorerModel& model) {
  std::string out(kModelMagic, 4);
  PutU32(out, kModelVersion);
  PutU32(out, model.shape.window_radius);
  PutU32(out, model.shape.channels);
  PutU32(out, model.shape.offset_channels);
  PutU32(out, model.shape.gather_channels);
  PutU32(out, static_cast<uint32_t>(model.layers.size()));
  for (const ConvLayer& l : model.layers) {
    PutU32(out, l.out_channels);
    PutU32(out, l.in_channels);
    PutU32(out, l.kernel_size);
    PutU32(out, static_cast<uint32_t>(l.activation));
  }
  for (double v : model.Flatten()) PutF64(out, v);
  std::ofstream file(path, std::ios::binary);
  if (!file) ThrowIo("cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) ThrowIo("failed writing " + path.string());
}

RestorerModel LoadModel(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) ThrowIo("cannot open model " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(file)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    ThrowInvalid("bad magic in model " + path.string());
  }
  const std::string body = bytes.substr(4);
  ModelReader reader(body);
  if (reader.U32() != kModelVersion) ThrowInvalid("unsupported model version");
  RestorerShape shape;
  shape.window_radius = static_cast<int>(reader.U32());
  shape.channels = static_cast<int>(reader.U32());
  shape.offset_channels = static_cast<int>(reader.U32());
  shape.gather_channels = static_cast<int>(reader.U32());
  RestorerModel model = RestorerModel::Zero(shape);
  if (reader.U32() != model.layers.size()) {
    ThrowInvalid("model layer schedule mismatch");
  }
  for (const ConvLayer& l : model.layers) {
    const uint32_t out = reader.U32(), in = reader.U32(), k = reader.U32();
    const uint32_t act = reader.U32();
    if (out != static_cast<uint32_t>(l.out_channels) ||
        in != static_cast<uint32_t>(l.in_channels) ||
        k != static_cast<uint32_t>(l.kernel_size) ||
        act != static_cast<uint32_t>(l.activation)) {
      ThrowInvalid("model layer schedule mismatch");
    }
  }
  std::vector<double> params(model.parameter_count());
  for (double& v : params) {
    v = reader.F64();
    if (!std::isfinite(v)) ThrowInvalid("non-finite model parameter");
  }
  if (!reader.done()) ThrowInvalid("trailing data in model file");
  model.Unflatten(params);
  return model;
}

AuxPriorPlanes MakeAuxPriorPlanes(const SideInfo& side) {
  const int w = side.partition.width, h = side.partition.height;
  if (side.prediction.width() != w || side.prediction.height() != h) {
    ThrowInvalid("side info prediction does not match the partition");
  }
  AuxPriorPlanes aux{FeatureMap(kCodecPlanes, h, w), FeatureMap(kLayoutPlanes, h, w)};
  const Plane residual = ResidualImage(side);
  const double qp = side.qp / 51.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      aux.codec.at(0, y, x) = side.prediction.at(x, y) / kPixelScale;
      aux.codec.at(1, y, x) = residual.at(x, y) / kPixelScale;
      aux.codec.at(2, y, x) = qp;
    }
  }
  for (size_t i = 0; i < side.partition.leaves.size(); ++i) {
    const Leaf& leaf = side.partition.leaves[i];
    const LeafMotion& m = side.motion.leaves[i];
    const double mag = m.intra ? 0.0 : std::hypot(m.dx, m.dy) / kMotionScale;
    for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
      for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
        aux.layout.at(0, y, x) = mag;
        aux.layout.at(1, y, x) = leaf.size / 16.0;
      }
    }
  }
  return aux;
}

std::vector<int> WindowIndices(int center, int frame_count, int radius) {
  if (center < 0 || center >= frame_count) ThrowInvalid("window center out of range");
  std::vector<int> out;
  for (int d = -radius; d <= radius; ++d) {
    out.push_back(std::clamp(center + d, 0, frame_count - 1));
  }
  return out;
}

RestorerInput PrepareRestorerInput(std::span<const Frame> window,
                                   std::span<const int> offsets,
                                   const SideInfo& center_side) {
  if (window.size() % 2 != 1 || offsets.size() != window.size()) {
    ThrowInvalid("window length mismatch: expected an odd frame count with "
                 "matching offsets");
  }
  const size_t n = window.size() / 2;
  if (offsets[n] != 0) ThrowInvalid("center frame offset must be 0");
  const Frame& center = window[n];
  for (const Frame& f : window) {
    if (f.width() != center.width() || f.height() != center.height()) {
      ThrowInvalid("dimension mismatch inside the restoration window");
    }
  }
  if (center_side.partition.width != center.width() ||
      center_side.partition.height != center.height()) {
    ThrowInvalid("dimension mismatch between side info and frames");
  }
  RestorerInput input;
  input.decoded = Plane::FromFrame(center);
  input.center = Normalized(center);
  input.aux = MakeAuxPriorPlanes(center_side);
  for (size_t j = 0; j < window.size(); ++j) {
    if (j == n) continue;
    const int d = offsets[j];
    if (d == 0) {
      input.neighbors.push_back(input.center);
      input.motion.emplace_back(2, center.height(), center.width());
      continue;
    }
    MotionField scaled = center_side.motion;
    for (LeafMotion& m : scaled.leaves) {
      m.dx *= -d;
      m.dy *= -d;
    }
    input.neighbors.push_back(
        WarpMv(Normalized(window[j]), scaled, center_side.partition));
    FeatureMap mv = RasterizeMotion(scaled, center_side.partition);
    for (double& v : mv.values) v /= kMotionScale;
    input.motion.push_back(std::move(mv));
  }
  return input;
}

RestorerInput CropInput(const RestorerInput& input, int x0, int y0, int w,
                        int h) {
  RestorerInput out;
  out.center = Crop(input.center, x0, y0, w, h);
  out.decoded = Plane(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.decoded.at(x, y) = input.decoded.at(x0 + x, y0 + y);
  }
  for (const FeatureMap& m : input.neighbors) out.neighbors.push_back(Crop(m, x0, y0, w, h));
  for (const FeatureMap& m : input.motion) out.motion.push_back(Crop(m, x0, y0, w, h));
  out.aux.codec = Crop(input.aux.codec, x0, y0, w, h);
  out.aux.layout = Crop(input.aux.layout, x0, y0, w, h);
  return out;
}

Plane RestorerForward(const RestorerModel& model, const RestorerInput& input,
                      RestorerTape* tape) {
  CheckInput(model, input);
  RestorerTape local;
  RestorerTape& t = tape ? *tape : local;
  const auto& L = model.layers;
  const size_t n = input.neighbors.size();
  const OffsetPredictor predictor = PredictorOf(model);

  t.offsets.assign(n, {});
  t.gathered.assign(n, {});
  std::vector<const FeatureMap*> video_parts{&input.center};
  for (size_t j = 0; j < n; ++j) {
    const FeatureMap off = PredictOffsets(input.center, input.neighbors[j],
                                          input.motion[j], predictor,
                                          &t.offsets[j]);
    t.gathered[j] = DeformableGather(input.neighbors[j], off, L[kGather]);
    video_parts.push_back(&t.gathered[j]);
  }
  t.video_in = Concat(video_parts);
  t.video1 = ConvForward(L[kVideo1], t.video_in);
  t.fv = ConvForward(L[kVideo2], t.video1);
  t.codec1 = ConvForward(L[kCodec1], input.aux.codec);
  t.fa = ConvForward(L[kCodec2], t.codec1);
  t.layout1 = ConvForward(L[kLayout1], input.aux.layout);
  t.fl = ConvForward(L[kLayout2], t.layout1);
  t.ma = AttentionMap(t.fv, t.fa, L[kAttentionCodec]);
  t.ml = AttentionMap(t.fv, t.fl, L[kAttentionLayout]);
  t.aggregate = Fuse(t.fv, t.fa, t.fl, t.ma, t.ml, L[kAggregate]);
  t.reconstruct1 = ConvForward(L[kReconstruct1], t.aggregate);
  t.residual = ConvForward(L[kReconstruct2], t.reconstruct1);

  Plane out = input.decoded;
  for (size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] += kPixelScale * t.residual.values[i];
  }
  return out;
}

RestorerModel RestorerBackward(const RestorerModel& model,
                               const RestorerInput& input,
                               const RestorerTape& t, const Plane& upstream) {
  CheckInput(model, input);
  if (upstream.width != input.width() || upstream.height != input.height()) {
    ThrowInvalid("shape mismatch: restorer upstream gradient");
  }
  const auto& L = model.layers;
  RestorerModel grads = RestorerModel::Zero(model.shape);
  auto& G = grads.layers;

  FeatureMap d_residual(1, input.height(), input.width());
  for (size_t i = 0; i < upstream.values.size(); ++i) {
    d_residual.values[i] = kPixelScale * upstream.values[i];
  }
  ConvGrads rec2 = ConvBackward(L[kReconstruct2], t.reconstruct1, t.residual,
                                d_residual);
  AddGrads(G[kReconstruct2], rec2);
  ConvGrads rec1 = ConvBackward(L[kReconstruct1], t.aggregate, t.reconstruct1,
                                rec2.input);
  AddGrads(G[kReconstruct1], rec1);
  FuseGrads fuse = FuseBackward(t.fv, t.fa, t.fl, t.ma, t.ml, L[kAggregate],
                                t.aggregate, rec1.input);
  AddGrads(G[kAggregate], fuse.weights, fuse.bias);

  AttentionGrads att_a =
      AttentionBackward(t.fv, t.fa, L[kAttentionCodec], t.ma, fuse.ma);
  AttentionGrads att_l =
      AttentionBackward(t.fv, t.fl, L[kAttentionLayout], t.ml, fuse.ml);
  AddGrads(G[kAttentionCodec], att_a.weights, att_a.bias);
  AddGrads(G[kAttentionLayout], att_l.weights, att_l.bias);

  FeatureMap d_fv = fuse.fv;
  AddInPlace(d_fv, att_a.video);
  AddInPlace(d_fv, att_l.video);
  FeatureMap d_fa = fuse.fa;
  AddInPlace(d_fa, att_a.aux);
  FeatureMap d_fl = fuse.fl;
  AddInPlace(d_fl, att_l.aux);

  ConvGrads a2 = ConvBackward(L[kCodec2], t.codec1, t.fa, d_fa);
  AddGrads(G[kCodec2], a2);
  AddGrads(G[kCodec1], ConvBackward(L[kCodec1], input.aux.codec, t.codec1,
                                    a2.input, false));
  ConvGrads l2 = ConvBackward(L[kLayout2], t.layout1, t.fl, d_fl);
  AddGrads(G[kLayout2], l2);
  AddGrads(G[kLayout1], ConvBackward(L[kLayout1], input.aux.layout, t.layout1,
                                     l2.input, false));

  ConvGrads v2 = ConvBackward(L[kVideo2], t.video1, t.fv, d_fv);
  AddGrads(G[kVideo2], v2);
  ConvGrads v1 = ConvBackward(L[kVideo1], t.video_in, t.video1, v2.input);
  AddGrads(G[kVideo1], v1);

  const OffsetPredictor predictor = PredictorOf(model);
  const int g = model.shape.gather_channels;
  for (size_t j = 0; j < input.neighbors.size(); ++j) {
    const FeatureMap d_gathered =
        SliceChannels(v1.input, 1 + static_cast<int>(j) * g, g);
    GatherGrads gg = DeformableGatherBackward(
        input.neighbors[j], t.offsets[j].offsets, L[kGather], t.gathered[j],
        d_gathered);
    AddGrads(G[kGather], gg.weights, gg.bias);
    OffsetPredictorGrads pg =
        PredictOffsetsBackward(predictor, t.offsets[j], 1, 1, gg.offsets, false);
    AddGrads(G[kOffsetHidden], pg.hidden);
    AddGrads(G[kOffsetOut], pg.output);
  }
  return grads;
}

}  // namespace mvdr
