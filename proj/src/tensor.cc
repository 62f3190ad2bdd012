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


#include "mvdr/tensor.h"

#include <algorithm>

#include "mvdr/error.h"

namespace mvdr {

FeatureMap Concat(std::initializer_list<const FeatureMap*> parts) {
  return Concat(std::span<const FeatureMap* const>(parts.begin(), parts.size()));
}

FeatureMap Concat(std::span<const FeatureMap* const> parts) {
  if (parts.empty()) return {};
  int channels = 0;
  for (const FeatureMap* p : parts) {
    if (!p->SameSpatial(*parts[0])) {
      ThrowInvalid("concatenated feature maps differ in spatial size");
    }
    channels += p->channels;
  }
  FeatureMap out;
  out.channels = channels;
  out.height = parts[0]->height;
  out.width = parts[0]->width;
  out.values.reserve(static_cast<size_t>(channels) * out.plane_size());
  for (const FeatureMap* p : parts) {
    out.values.insert(out.values.end(), p->values.begin(), p->values.end());
  }
  return out;
}

FeatureMap SliceChannels(const FeatureMap& map, int first, int count) {
  if (first < 0 || count < 0 || first + count > map.channels) {
    ThrowInvalid("channel slice out of range");
  }
  FeatureMap out(count, map.height, map.width);
  std::copy_n(map.values.begin() + first * map.plane_size(),
              count * map.plane_size(), out.values.begin());
  return out;
}

FeatureMap Crop(const FeatureMap& map, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || x0 + w > map.width || y0 + h > map.height) {
    ThrowInvalid("crop window outside the feature map");
  }
  FeatureMap out(map.channels, h, w);
  for (int c = 0; c < map.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      std::copy_n(&map.values[(static_cast<size_t>(c) * map.height + y0 + y) *
                                  map.width + x0],
                  w, &out.at(c, y, 0));
    }
  }
  return out;
}

void AddInPlace(FeatureMap& acc, const FeatureMap& other) {
  if (acc.values.size() != other.values.size()) {
    ThrowInvalid("feature map shapes differ");
  }
  for (size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += other.values[i];
}

}  // namespace mvdr
