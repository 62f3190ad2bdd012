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


#ifndef MVDR_TENSOR_H_
#define MVDR_TENSOR_H_

#include <initializer_list>
#include <span>
#include <vector>

namespace mvdr {

// channels x height x width, channel-major.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, double fill = 0.0)
      : channels(c),
        height(h),
        width(w),
        values(static_cast<size_t>(c) * h * w, fill) {}

  size_t plane_size() const { return static_cast<size_t>(height) * width; }

  double& at(int c, int y, int x) {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }

  std::span<double> plane(int c) {
    return {values.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const {
    return {values.data() + c * plane_size(), plane_size()};
  }

  bool SameSpatial(const FeatureMap& o) const {
    return height == o.height && width == o.width;
  }
};

FeatureMap Concat(std::initializer_list<const FeatureMap*> parts);
FeatureMap Concat(std::span<const FeatureMap* const> parts);
// Channels [first, first + count) of `map`.
FeatureMap SliceChannels(const FeatureMap& map, int first, int count);
// Spatial window [x0, x0 + w) x [y0, y0 + h) of every channel.
FeatureMap Crop(const FeatureMap& map, int x0, int y0, int w, int h);

void AddInPlace(FeatureMap& acc, const FeatureMap& other);

}  // namespace mvdr

#endif  // MVDR_TENSOR_H_
