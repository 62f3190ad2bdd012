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

// L1 loss, Adam, and the deterministic mini-batch training loop.

#ifndef MVDR_TRAIN_H_
#define MVDR_TRAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mvdr/frame.h"
#include "mvdr/restorer.h"

namespace mvdr {

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 4;
  int iterations = 2000;
  int crop = 32;  // square training crop, clipped to the frame size
  uint64_t seed = 1;

  void Validate() const;
};

// Mean absolute error. When `grad` is given it receives the subgradient
// sign(pred - target) / count, with sign(0) = 0.
double L1Loss(const Plane& pred, const Frame& target, Plane* grad = nullptr);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
};

// Bias-corrected Adam update in place. An empty state is sized on first use.
void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state, const TrainConfig& config);

struct TrainingSample {
  RestorerInput input;
  Frame target;
};

struct TrainResult {
  RestorerModel model;
  std::vector<double> loss_trace;  // batch-mean L1 per iteration
};

// Throws a numerical error if the loss becomes non-finite.
TrainResult TrainRestorer(std::span<const TrainingSample> samples,
                          const RestorerShape& shape, const TrainConfig& config,
                          const std::function<void(int, double)>& progress = {});

}  // namespace mvdr

#endif  // MVDR_TRAIN_H_
