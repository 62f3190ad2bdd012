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

// Central finite-difference helpers shared by the gradient tests.

#ifndef MVDR_TESTS_GRAD_CHECK_H_
#define MVDR_TESTS_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

#include "mvdr/rng.h"
#include "mvdr/tensor.h"

namespace mvdr::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kGradTolerance = 1e-4;
// Below this magnitude both gradients are treated as zero-ish and the error
// becomes absolute; FD round-off alone is ~1e-11 * |loss| / h.
inline constexpr double kGradFloor = 1e-6;

inline double RelError(double analytic, double numeric,
                       double floor = kGradFloor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// Max relative error between `analytic` and central differences of `loss`
// w.r.t. each element of `values` (perturbed in place and restored).
inline double MaxGradError(std::span<double> values,
                           std::span<const double> analytic,
                           const std::function<double()>& loss,
                           double floor = kGradFloor, double h = kFdStep) {
  double worst = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double plus = loss();
    values[i] = saved - h;
    const double minus = loss();
    values[i] = saved;
    worst = std::max(worst, RelError(analytic[i], (plus - minus) / (2 * h), floor));
  }
  return worst;
}

inline double Contract(const FeatureMap& weights, const FeatureMap& map) {
  double acc = 0;
  for (size_t i = 0; i < map.values.size(); ++i) {
    acc += weights.values[i] * map.values[i];
  }
  return acc;
}

inline FeatureMap RandomMap(Rng& rng, int c, int h, int w, double lo = -1.0,
                            double hi = 1.0) {
  FeatureMap m(c, h, w);
  for (double& v : m.values) v = rng.Uniform(lo, hi);
  return m;
}

template <typename Layer>
void RandomizeLayer(Rng& rng, Layer& layer, double scale = 0.5) {
  for (double& v : layer.weights) v = rng.Uniform(-scale, scale);
  for (double& v : layer.bias) v = rng.Uniform(-scale, scale);
}

}  // namespace mvdr::testing

#endif  // MVDR_TESTS_GRAD_CHECK_H_
