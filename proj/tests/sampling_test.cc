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

#include <cmath>

#include "grad_check.h"
#include "gtest/gtest.h"
#include "mvdr/error.h"
#include "mvdr/rng.h"

namespace mvdr {
namespace {

using testing::Contract;
using testing::kGradTolerance;
using testing::MaxGradError;
using testing::RandomizeLayer;
using testing::RandomMap;

// Per-output brute force through BilinearSample.
FeatureMap GatherOracle(const FeatureMap& in, const FeatureMap& off,
                        const ConvLayer& kernel) {
  const int k = kernel.kernel_size, r = k / 2;
  FeatureMap out(kernel.out_channels, in.height, in.width);
  for (int o = 0; o < kernel.out_channels; ++o) {
    for (int y = 0; y < in.height; ++y) {
      for (int x = 0; x < in.width; ++x) {
        double acc = kernel.bias[o];
        for (int i = 0; i < in.channels; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int t = ky * k + kx;
              acc += kernel.weights[kernel.weight_index(o, i, ky, kx)] *
                     BilinearSample(in, x + kx - r + off.at(2 * t, y, x),
                                    y + ky - r + off.at(2 * t + 1, y, x), i);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

// Integer part in [-2, 2] plus a fraction kept off the lattice so central
// differences never straddle a bilinear kink.
FeatureMap OffLatticeOffsets(Rng& rng, int taps, int h, int w) {
  FeatureMap off(2 * taps, h, w);
  for (double& v : off.values) {
    v = static_cast<double>(rng.Below(5)) - 2.0 + rng.Uniform(0.1, 0.9);
  }
  return off;
}

TEST(BilinearTest, Examples) {
  FeatureMap m(1, 2, 2);
  m.values = {0, 10, 20, 30};
  EXPECT_DOUBLE_EQ(BilinearSample(m, 0, 0, 0), 0);
  EXPECT_DOUBLE_EQ(BilinearSample(m, 1, 1, 0), 30);
  EXPECT_DOUBLE_EQ(BilinearSample(m, 0.5, 0, 0), 5);
  EXPECT_DOUBLE_EQ(BilinearSample(m, 0.5, 0.5, 0), 15);
  EXPECT_DOUBLE_EQ(BilinearSample(m, -3, 7, 0), 20);
  EXPECT_DOUBLE_EQ(BilinearSample(m, 0.25, 0.75, 0), 17.5);
  EXPECT_THROW(BilinearSample(m, 0, 0, 1), Error);
}

TEST(WarpTest, ShiftsLeafByMotionVector) {
  Rng rng(1);
  const FeatureMap src = RandomMap(rng, 1, 16, 16);
  PartitionMap part{16, 16, {Leaf{0, 0, 16}}};
  MotionField motion{{LeafMotion{false, 2, 3}}};
  const FeatureMap out = WarpMv(src, motion, part);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      EXPECT_EQ(out.at(0, y, x),
                src.at(0, std::clamp(y - 3, 0, 15), std::clamp(x - 2, 0, 15)));
    }
  }
  motion.leaves[0].intra = true;
  EXPECT_EQ(WarpMv(src, motion, part).values, src.values);
}

TEST(WarpTest, PerLeafVectors) {
  Rng rng(2);
  const FeatureMap src = RandomMap(rng, 2, 16, 16);
  PartitionMap part{16, 16, {Leaf{0, 0, 8}, Leaf{8, 0, 8}, Leaf{0, 8, 8},
                             Leaf{8, 8, 8}}};
  MotionField motion{{LeafMotion{false, 0, 0}, LeafMotion{false, -1, 0},
                      LeafMotion{true, 5, 5}, LeafMotion{false, 1, -2}}};
  const FeatureMap out = WarpMv(src, motion, part);
  EXPECT_EQ(out.at(1, 3, 3), src.at(1, 3, 3));
  EXPECT_EQ(out.at(1, 3, 10), src.at(1, 3, 11));
  EXPECT_EQ(out.at(0, 12, 2), src.at(0, 12, 2));
  EXPECT_EQ(out.at(0, 12, 10), src.at(0, 14, 9));
  const FeatureMap mv = RasterizeMotion(motion, part);
  EXPECT_EQ(mv.at(0, 3, 10), -1);
  EXPECT_EQ(mv.at(1, 12, 10), -2);
  EXPECT_EQ(mv.at(0, 12, 2), 0);
}

TEST(GatherTest, ZeroOffsetsMatchConvolution) {
  for (int seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    ConvLayer kernel(3, 2, 3, Activation::kNone);
    RandomizeLayer(rng, kernel);
    const FeatureMap in = RandomMap(rng, 2, 7, 9);
    const FeatureMap got = DeformableGather(in, FeatureMap(18, 7, 9), kernel);
    const FeatureMap want = ConvForward(kernel, in);
    for (size_t i = 0; i < got.values.size(); ++i) {
      EXPECT_NEAR(got.values[i], want.values[i], 1e-12);
    }
  }
}

TEST(GatherTest, MatchesBruteForce) {
  Rng rng(9);
  ConvLayer kernel(2, 2, 3, Activation::kNone);
  RandomizeLayer(rng, kernel);
  const FeatureMap in = RandomMap(rng, 2, 6, 7);
  FeatureMap off = RandomMap(rng, 18, 6, 7, -4, 4);
  const FeatureMap got = DeformableGather(in, off, kernel);
  const FeatureMap want = GatherOracle(in, off, kernel);
  for (size_t i = 0; i < got.values.size(); ++i) {
    EXPECT_NEAR(got.values[i], want.values[i], 1e-12);
  }
}

TEST(GatherTest, UniformOffsetTranslates) {
  Rng rng(4);
  ConvLayer kernel(1, 1, 3, Activation::kNone);
  RandomizeLayer(rng, kernel);
  kernel.bias = {0.0};
  const FeatureMap in = RandomMap(rng, 1, 10, 10);
  FeatureMap off(18, 10, 10);
  for (int t = 0; t < 9; ++t) {
    for (double& v : off.plane(2 * t)) v = 1.0;
    for (double& v : off.plane(2 * t + 1)) v = -2.0;
  }
  const FeatureMap moved = DeformableGather(in, off, kernel);
  const FeatureMap plain = ConvForward(kernel, in);
  for (int y = 3; y < 8; ++y) {
    for (int x = 1; x < 7; ++x) {
      EXPECT_NEAR(moved.at(0, y, x), plain.at(0, y - 2, x + 1), 1e-12);
    }
  }
}

TEST(GatherTest, LatticeOffsetConcentratesInputGradient) {
  Rng rng(5);
  ConvLayer kernel(1, 1, 1, Activation::kNone);
  kernel.weights = {1.0};
  const FeatureMap in = RandomMap(rng, 1, 5, 5);
  FeatureMap off(2, 5, 5);
  for (double& v : off.plane(0)) v = 1.0;
  for (double& v : off.plane(1)) v = -1.0;
  const FeatureMap out = DeformableGather(in, off, kernel);
  FeatureMap up(1, 5, 5);
  up.at(0, 2, 2) = 1.0;
  const GatherGrads g = DeformableGatherBackward(in, off, kernel, out, up);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      EXPECT_EQ(g.input.at(0, y, x), (y == 1 && x == 3) ? 1.0 : 0.0);
    }
  }
}

TEST(GatherTest, SaturatedCoordinatesHaveZeroGradient) {
  Rng rng(6);
  ConvLayer kernel(1, 1, 3, Activation::kNone);
  RandomizeLayer(rng, kernel);
  const FeatureMap in = RandomMap(rng, 1, 5, 5);
  FeatureMap off(18, 5, 5);
  for (int t = 0; t < 9; ++t) {
    for (double& v : off.plane(2 * t)) v = 20.5;
    for (double& v : off.plane(2 * t + 1)) v = -20.5;
  }
  const FeatureMap out = DeformableGather(in, off, kernel);
  const GatherGrads g =
      DeformableGatherBackward(in, off, kernel, out, RandomMap(rng, 1, 5, 5));
  for (double v : g.offsets.values) EXPECT_EQ(v, 0.0);
}

TEST(GatherTest, ZeroUpstreamGivesZeroGradients) {
  Rng rng(7);
  ConvLayer kernel(2, 1, 3, Activation::kNone);
  RandomizeLayer(rng, kernel);
  const FeatureMap in = RandomMap(rng, 1, 5, 5);
  const FeatureMap off = OffLatticeOffsets(rng, 9, 5, 5);
  const FeatureMap out = DeformableGather(in, off, kernel);
  const GatherGrads g =
      DeformableGatherBackward(in, off, kernel, out, FeatureMap(2, 5, 5));
  for (double v : g.weights) EXPECT_EQ(v, 0.0);
  for (double v : g.bias) EXPECT_EQ(v, 0.0);
  for (double v : g.offsets.values) EXPECT_EQ(v, 0.0);
  for (double v : g.input.values) EXPECT_EQ(v, 0.0);
}

TEST(GatherTest, RejectsBadOffsets) {
  const ConvLayer kernel(1, 1, 3, Activation::kNone);
  const FeatureMap in(1, 5, 5);
  EXPECT_THROW(DeformableGather(in, FeatureMap(9, 5, 5), kernel), Error);
  FeatureMap off(18, 5, 5);
  off.values[3] = std::nan("");
  EXPECT_THROW(DeformableGather(in, off, kernel), Error);
}

class SamplingGradTest : public ::testing::TestWithParam<int> {};

TEST_P(SamplingGradTest, Gather) {
  Rng rng(GetParam());
  ConvLayer kernel(1, 1, 3, Activation::kNone);
  RandomizeLayer(rng, kernel);
  FeatureMap in = RandomMap(rng, 1, 5, 5);
  FeatureMap off = OffLatticeOffsets(rng, 9, 5, 5);
  const FeatureMap up = RandomMap(rng, 1, 5, 5);
  const FeatureMap out = DeformableGather(in, off, kernel);
  const GatherGrads g = DeformableGatherBackward(in, off, kernel, out, up);
  auto loss = [&] { return Contract(up, DeformableGather(in, off, kernel)); };
  EXPECT_LT(MaxGradError(in.values, g.input.values, loss), kGradTolerance);
  EXPECT_LT(MaxGradError(off.values, g.offsets.values, loss), kGradTolerance);
  EXPECT_LT(MaxGradError(kernel.weights, g.weights, loss), kGradTolerance);
  EXPECT_LT(MaxGradError(kernel.bias, g.bias, loss), kGradTolerance);
}

TEST_P(SamplingGradTest, OffsetPredictorThroughGather) {
  Rng rng(GetParam());
  OffsetPredictor pred(4, 4, 9);
  RandomizeLayer(rng, pred.hidden, 0.5);
  RandomizeLayer(rng, pred.output, 0.5);
  ConvLayer kernel(1, 1, 3, Activation::kNone);
  RandomizeLayer(rng, kernel);
  FeatureMap ft = RandomMap(rng, 1, 5, 5), ftm1 = RandomMap(rng, 1, 5, 5);
  FeatureMap mv = RandomMap(rng, 2, 5, 5, -2, 2);
  const FeatureMap up = RandomMap(rng, 1, 5, 5);

  auto forward = [&](OffsetPredictorTape* tape) {
    const FeatureMap off = PredictOffsets(ft, ftm1, mv, pred, tape);
    return DeformableGather(ftm1, off, kernel);
  };
  OffsetPredictorTape tape;
  const FeatureMap out = forward(&tape);
  const GatherGrads gg =
      DeformableGatherBackward(ftm1, tape.offsets, kernel, out, up);
  const OffsetPredictorGrads pg =
      PredictOffsetsBackward(pred, tape, 1, 1, gg.offsets);
  FeatureMap d_ftm1 = gg.input;
  AddInPlace(d_ftm1, pg.features_tm1);
  auto loss = [&] { return Contract(up, forward(nullptr)); };
  EXPECT_LT(MaxGradError(ft.values, pg.features_t.values, loss), kGradTolerance);
  EXPECT_LT(MaxGradError(ftm1.values, d_ftm1.values, loss), kGradTolerance);
  EXPECT_LT(MaxGradError(mv.values, pg.motion_planes.values, loss),
            kGradTolerance);
  EXPECT_LT(MaxGradError(pred.hidden.weights, pg.hidden.weights, loss),
            kGradTolerance);
  EXPECT_LT(MaxGradError(pred.hidden.bias, pg.hidden.bias, loss),
            kGradTolerance);
  EXPECT_LT(MaxGradError(pred.output.weights, pg.output.weights, loss),
            kGradTolerance);
  EXPECT_LT(MaxGradError(pred.output.bias, pg.output.bias, loss),
            kGradTolerance);
}

INSTANTIATE_TEST_SUITE_P(Seeds, SamplingGradTest, ::testing::Range(1, 21));

}  // namespace
}  // namespace mvdr
