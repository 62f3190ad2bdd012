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


#include "mvdr/train.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvdr/error.h"
#include "mvdr/rng.h"

namespace mvdr {
namespace {

Frame CropFrame(const Frame& frame, int x0, int y0, int w, int h) {
  std::vector<uint8_t> samples(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) samples[y * w + x] = frame.at(x0 + x, y0 + y);
  }
  return Frame(w, h, std::move(samples));
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    ThrowInvalid("learning rate must be positive");
  }
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    ThrowInvalid("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0)) ThrowInvalid("Adam epsilon must be positive");
  if (batch_size < 1) ThrowInvalid("batch size must be positive");
  if (iterations < 0) ThrowInvalid("iteration count must be non-negative");
  if (crop < 16 || crop % 16 != 0) ThrowInvalid("crop must be a positive multiple of 16");
}

double L1Loss(const Plane& pred, const Frame& target, Plane* grad) {
  if (pred.width != target.width() || pred.height != target.height()) {
    ThrowInvalid("dimension mismatch in L1 loss");
  }
  const auto samples = target.samples();
  const double count = static_cast<double>(samples.size());
  if (grad) *grad = Plane(pred.width, pred.height);
  double sum = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double diff = pred.values[i] - samples[i];
    sum += std::abs(diff);
    if (grad) grad->values[i] = diff > 0 ? 1.0 / count : diff < 0 ? -1.0 / count : 0.0;
  }
  return sum / count;
}

void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state, const TrainConfig& config) {
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    ThrowInvalid("shape mismatch between parameters, gradients and Adam state");
  }
  ++state.step;
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1 - b2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

TrainResult TrainRestorer(std::span<const TrainingSample> samples,
                          const RestorerShape& shape, const TrainConfig& config,
                          const std::function<void(int, double)>& progress) {
  config.Validate();
  if (samples.empty()) ThrowInvalid("empty training dataset");
  const int w = samples[0].input.width(), h = samples[0].input.height();
  for (const TrainingSample& s : samples) {
    if (s.input.width() != w || s.input.height() != h ||
        s.target.width() != w || s.target.height() != h) {
      ThrowInvalid("training samples have inconsistent dimensions");
    }
  }
  Rng rng(config.seed);
  TrainResult result{RestorerModel::Initialized(shape, rng), {}};
  std::vector<double> params = result.model.Flatten();
  AdamState adam;
  RestorerModel batch_grads = RestorerModel::Zero(shape);
  const int cw = std::min(config.crop, w), ch = std::min(config.crop, h);

  for (int it = 0; it < config.iterations; ++it) {
    batch_grads.SetZero();
    double loss = 0;
    // Draws happen before any compute so the schedule depends on the seed
    // alone.
    struct Pick { size_t sample; int x0, y0; };
    std::vector<Pick> picks(config.batch_size);
    for (Pick& p : picks) {
      p.sample = rng.Below(samples.size());
      p.x0 = static_cast<int>(rng.Below(w - cw + 1));
      p.y0 = static_cast<int>(rng.Below(h - ch + 1));
    }
    for (const Pick& p : picks) {
      const TrainingSample& s = samples[p.sample];
      const RestorerInput crop = CropInput(s.input, p.x0, p.y0, cw, ch);
      const Frame target = CropFrame(s.target, p.x0, p.y0, cw, ch);
      RestorerTape tape;
      const Plane out = RestorerForward(result.model, crop, &tape);
      Plane grad;
      loss += L1Loss(out, target, &grad);
      batch_grads.Accumulate(RestorerBackward(result.model, crop, tape, grad),
                             1.0 / config.batch_size);
    }
    loss /= config.batch_size;
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::kNumerical,
                  "non-finite training loss at iteration " + std::to_string(it));
    }
    const std::vector<double> g = batch_grads.Flatten();
    for (double v : g) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kNumerical,
                    "non-finite gradient at iteration " + std::to_string(it));
      }
    }
    AdamStep(params, g, adam, config);
    result.model.Unflatten(params);
    result.loss_trace.push_back(loss);
    if (progress) progress(it, loss);
  }
  return result;
}

}  // namespace mvdr
