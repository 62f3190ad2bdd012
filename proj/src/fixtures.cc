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


#include "mvdr/fixtures.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvdr/error.h"
#include "mvdr/rng.h"

namespace mvdr {
namespace {

double Smoothstep(double t) { return t * t * (3 - 2 * t); }

}  // namespace

std::vector<double> ValueNoise(uint64_t seed, int width, int height, int cell,
                               double lo, double hi) {
  Rng rng(seed);
  const int gw = width / cell + 2;
  const int gh = height / cell + 2;
  std::vector<double> lattice(static_cast<size_t>(gw) * gh);
  for (double& v : lattice) v = rng.Uniform(lo, hi);
  std::vector<double> out(static_cast<size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const int gy = y / cell;
    const double fy = Smoothstep(static_cast<double>(y % cell) / cell);
    for (int x = 0; x < width; ++x) {
      const int gx = x / cell;
      const double fx = Smoothstep(static_cast<double>(x % cell) / cell);
      const double a = lattice[gy * gw + gx];
      const double b = lattice[gy * gw + gx + 1];
      const double c = lattice[(gy + 1) * gw + gx];
      const double d = lattice[(gy + 1) * gw + gx + 1];
      out[y * width + x] =
          (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
    }
  }
  return out;
}

std::vector<Frame> MakeGlobalShiftSequence(uint64_t seed, int frames, int dx,
                                           int dy, int width, int height) {
  const int margin = (std::abs(dx) + std::abs(dy)) * std::max(frames, 1) + 8;
  const int bw = width + 2 * margin;
  const int bh = height + 2 * margin;
  const auto coarse = ValueNoise(seed, bw, bh, 8, 40, 210);
  const auto fine = ValueNoise(seed + 1, bw, bh, 2, -25, 25);
  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    Frame f(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const int sx = x - t * dx + margin;
        const int sy = y - t * dy + margin;
        const size_t i = static_cast<size_t>(sy) * bw + sx;
        f.set(x, y, RoundClipPixel(coarse[i] + fine[i]));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Frame> MakeFixture(FixtureKind kind, uint64_t seed, int frames,
                               int width, int height) {
  if (frames < 0) ThrowInvalid("negative fixture length");
  Rng rng(seed);
  std::vector<Frame> out;
  if (kind == FixtureKind::kTranslatingPatch) {
    const auto background = ValueNoise(seed * 7 + 1, width, height, 16, 50, 170);
    const int patch = 24;
    const auto texture = ValueNoise(seed * 7 + 2, patch, patch, 4, 120, 240);
    const auto grain = ValueNoise(seed * 7 + 3, width, height, 2, -12, 12);
    double px = rng.Uniform(4, width - patch - 4);
    double py = rng.Uniform(4, height - patch - 4);
    int vx = rng.Below(2) ? 2 : -2;
    int vy = rng.Below(2) ? 1 : -1;
    for (int t = 0; t < frames; ++t) {
      Frame f(width, height);
      const int ox = static_cast<int>(px);
      const int oy = static_cast<int>(py);
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          double v = background[y * width + x] + grain[y * width + x];
          const int u = x - ox;
          const int w = y - oy;
          if (u >= 0 && u < patch && w >= 0 && w < patch) {
            v = texture[w * patch + u];
          }
          f.set(x, y, RoundClipPixel(v));
        }
      }
      out.push_back(std::move(f));
      // Bounce off the borders.
      if (px + vx < 0 || px + vx > width - patch) vx = -vx;
      if (py + vy < 0 || py + vy > height - patch) vy = -vy;
      px += vx;
      py += vy;
    }
    return out;
  }

  const double cell = rng.Uniform(9, 13);
  const double amplitude = rng.Uniform(2, 4);
  const double phase = rng.Uniform(0, 2 * std::numbers::pi);
  const double lo = rng.Uniform(40, 70);
  const double hi = rng.Uniform(180, 215);
  const auto grain = ValueNoise(seed * 11 + 5, width, height, 2, -10, 10);
  for (int t = 0; t < frames; ++t) {
    Frame f(width, height);
    const double wt = phase + 0.45 * t;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u = x + amplitude * std::sin(2 * std::numbers::pi * y / 32.0 + wt) + 0.7 * t;
        const double v = y + amplitude * std::cos(2 * std::numbers::pi * x / 40.0 + wt);
        // Soft-edged checker: product of two smooth square waves.
        const double su = std::tanh(3.0 * std::sin(std::numbers::pi * u / cell));
        const double sv = std::tanh(3.0 * std::sin(std::numbers::pi * v / cell));
        const double s = 0.5 + 0.5 * su * sv;
        f.set(x, y, RoundClipPixel(lo + (hi - lo) * s + grain[y * width + x]));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace mvdr
