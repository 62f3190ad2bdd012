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

// Seeded synthetic sequences used by the tests, the acceptance suite and the
// CLI's bundled data set.

#ifndef MVDR_FIXTURES_H_
#define MVDR_FIXTURES_H_

#include <cstdint>
#include <vector>

#include "mvdr/frame.h"

namespace mvdr {

enum class FixtureKind {
  kTranslatingPatch,  // textured patch gliding over a textured background
  kDeformingChecker,  // checkerboard under a time-varying sinusoidal warp
};

std::vector<Frame> MakeFixture(FixtureKind kind, uint64_t seed, int frames,
                               int width = 64, int height = 64);

// Frame t is frame 0 shifted right by t*dx and down by t*dy.
std::vector<Frame> MakeGlobalShiftSequence(uint64_t seed, int frames, int dx,
                                           int dy, int width = 64,
                                           int height = 64);

// Smooth random texture with values roughly in [lo, hi].
std::vector<double> ValueNoise(uint64_t seed, int width, int height, int cell,
                               double lo, double hi);

}  // namespace mvdr

#endif  // MVDR_FIXTURES_H_
