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


#include <algorithm>
#include <cstdlib>
#include <tuple>
#include <vector>

#include "gtest/gtest.h"
#include "mvdr/codec.h"
#include "mvdr/error.h"
#include "mvdr/fixtures.h"
#include "mvdr/metrics.h"
#include "mvdr/rng.h"
#include "mvdr/transform_quant.h"

namespace mvdr {
namespace {

// Independent exhaustive search: score every candidate, then pick the
// lexicographic minimum of (SAD, |dx|+|dy|, dy, dx).
std::tuple<int, int> BruteForceSearch(const Frame& cur, const Frame& ref,
                                      const Leaf& leaf, int radius) {
  std::vector<std::tuple<long, int, int, int>> scored;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      long sad = 0;
      for (int y = 0; y < leaf.size; ++y)
        for (int x = 0; x < leaf.size; ++x) {
          int sx = std::clamp(leaf.x + x - dx, 0, ref.width() - 1);
          int sy = std::clamp(leaf.y + y - dy, 0, ref.height() - 1);
          sad += std::abs(cur.at(leaf.x + x, leaf.y + y) - ref.at(sx, sy));
        }
      scored.emplace_back(sad, std::abs(dx) + std::abs(dy), dy, dx);
    }
  }
  auto best = *std::min_element(scored.begin(), scored.end());
  return {std::get<3>(best), std::get<2>(best)};
}

std::vector<Frame> BothFixtures(uint64_t seed, int frames) {
  auto a = MakeFixture(FixtureKind::kTranslatingPatch, seed, frames);
  auto b = MakeFixture(FixtureKind::kDeformingChecker, seed, frames);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(MotionSearchTest, FindsGlobalShift) {
  const auto seq = MakeGlobalShiftSequence(5, 2, 2, 3);
  for (int size : {16, 8, 4}) {
    for (int y = 0; y < 64; y += size) {
      for (int x = 0; x < 64; x += size) {
        if (x < 2 || y < 3) continue;  // needs samples from outside the frame
        auto r = MotionSearch(seq[1], seq[0], {x, y, size}, 8);
        EXPECT_EQ(r.dx, 2) << x << "," << y << " size " << size;
        EXPECT_EQ(r.dy, 3);
        EXPECT_EQ(r.sad, 0);
      }
    }
  }
}

TEST(MotionSearchTest, StaticAndConstantContentGiveZeroVector) {
  const auto f = MakeFixture(FixtureKind::kDeformingChecker, 1, 1).front();
  Frame flat(64, 64, 77);
  for (int y = 0; y < 64; y += 8) {
    for (int x = 0; x < 64; x += 8) {
      auto r = MotionSearch(f, f, {x, y, 8}, 8);
      EXPECT_EQ(r.dx, 0);
      EXPECT_EQ(r.dy, 0);
      auto c = MotionSearch(flat, flat, {x, y, 8}, 8);
      EXPECT_EQ(c.dx, 0);
      EXPECT_EQ(c.dy, 0);
    }
  }
}

TEST(MotionSearchTest, MatchesBruteForceIncludingTies) {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    // Coarse quantized content creates many SAD ties.
    Frame cur(32, 32), ref(32, 32);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        cur.set(x, y, static_cast<uint8_t>(rng.Below(3) * 40));
        ref.set(x, y, static_cast<uint8_t>(rng.Below(3) * 40));
      }
    const int size = trial % 2 ? 4 : 8;
    Leaf leaf{static_cast<int>(rng.Below(32 / size)) * size,
              static_cast<int>(rng.Below(32 / size)) * size, size};
    const int radius = static_cast<int>(rng.Below(5));
    auto r = MotionSearch(cur, ref, leaf, radius);
    auto [dx, dy] = BruteForceSearch(cur, ref, leaf, radius);
    EXPECT_EQ(r.dx, dx);
    EXPECT_EQ(r.dy, dy);
    EXPECT_LE(std::abs(r.dx), radius);
    EXPECT_LE(std::abs(r.dy), radius);
  }
}

TEST(PartitionTest, PerfectPredictionKeepsMacroblocks) {
  const auto f = MakeFixture(FixtureKind::kTranslatingPatch, 2, 1).front();
  const auto map = ChoosePartition(f, f, 6.0);
  EXPECT_EQ(map.leaves.size(), 16u);
  for (const Leaf& l : map.leaves) EXPECT_EQ(l.size, 16);
  ValidatePartition(map);
}

TEST(PartitionTest, SaturatedResidualSplitsToFourByFour) {
  const auto map = ChoosePartition(Frame(64, 64, 255), Frame(64, 64, 0), 6.0);
  EXPECT_EQ(map.leaves.size(), 256u);
  for (const Leaf& l : map.leaves) EXPECT_EQ(l.size, 4);
  ValidatePartition(map);
}

TEST(PartitionTest, LocalResidualSplitsOnlyItsMacroblock) {
  Frame pred(64, 64, 90);
  Frame cur = pred;
  for (int y = 16; y < 24; ++y)
    for (int x = 16; x < 24; ++x) cur.set(x, y, 190);
  const auto map = ChoosePartition(cur, pred, 6.0);
  // Rule evaluated by hand: the macroblock at (16,16) has mean residual
  // 100*64/256 = 25 > 6 and splits; its top-left 8x8 has 100 > 6 and splits
  // into 4x4s; the other three quadrants are clean.
  std::vector<Leaf> expected;
  for (int my = 0; my < 64; my += 16)
    for (int mx = 0; mx < 64; mx += 16) {
      if (mx == 16 && my == 16) {
        expected.insert(expected.end(), {{16, 16, 4}, {20, 16, 4}, {16, 20, 4}, {20, 20, 4},
                                         {24, 16, 8}, {16, 24, 8}, {24, 24, 8}});
      } else {
        expected.push_back({mx, my, 16});
      }
    }
  EXPECT_EQ(map.leaves, expected);
}

TEST(PredictionTest, IntraTopLeftFallsBackTo128) {
  Frame decoded(64, 64, 0), pred(64, 64);
  PredictLeaf({0, 0, 16}, {true, 0, 0}, nullptr, decoded, pred);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) EXPECT_EQ(pred.at(x, y), 128);
}

TEST(PredictionTest, IntraDcAveragesNeighbors) {
  Frame decoded(64, 64, 50), pred(64, 64);
  PredictLeaf({16, 16, 8}, {true, 0, 0}, nullptr, decoded, pred);
  for (int y = 16; y < 24; ++y)
    for (int x = 16; x < 24; ++x) EXPECT_EQ(pred.at(x, y), 50);
  // Rounds half away from zero: 8 samples of 1 and 8 of 2 average to 1.5.
  Frame mixed(64, 64, 0);
  for (int y = 16; y < 24; ++y) mixed.set(15, y, 1);
  for (int x = 16; x < 24; ++x) mixed.set(x, 15, 2);
  EXPECT_EQ(IntraDcValue(mixed, {16, 16, 8}), 2);
  // Only the top row exists on the left border.
  EXPECT_EQ(IntraDcValue(mixed, {0, 16, 4}), 0);
}

TEST(PredictionTest, InterZeroVectorCopiesReference) {
  const auto ref = MakeFixture(FixtureKind::kDeformingChecker, 4, 1).front();
  Frame decoded(64, 64), pred(64, 64);
  PredictLeaf({32, 16, 16}, {false, 0, 0}, &ref, decoded, pred);
  for (int y = 16; y < 32; ++y)
    for (int x = 32; x < 48; ++x) EXPECT_EQ(pred.at(x, y), ref.at(x, y));
  EXPECT_THROW(PredictLeaf({0, 0, 16}, {false, 1, 1}, nullptr, decoded, pred), Error);
  EXPECT_THROW(PredictFrame(false, nullptr, {}, {64, 64, {}}, decoded), Error);
}

TEST(EncoderTest, DeterministicBytes) {
  const auto frames = BothFixtures(1, 5);
  CodecConfig config;
  config.qp = 28;
  EXPECT_EQ(EncodeSequence(frames, config).bytes, EncodeSequence(frames, config).bytes);
}

TEST(EncoderTest, ConstantFramesAreLosslessAtQpZero) {
  std::vector<Frame> frames = {Frame(64, 64, 17), Frame(64, 64, 200), Frame(64, 64, 200),
                               Frame(64, 64, 3)};
  CodecConfig config;
  config.qp = 0;
  const auto decoded = DecodeSequence(EncodeSequence(frames, config));
  EXPECT_EQ(decoded.frames, frames);
}

TEST(EncoderTest, HigherQpIsSmallerAndWorse) {
  const auto frames = MakeFixture(FixtureKind::kTranslatingPatch, 3, 5);
  CodecConfig lo, hi;
  lo.qp = 20;
  hi.qp = 40;
  const auto s_lo = EncodeSequence(frames, lo);
  const auto s_hi = EncodeSequence(frames, hi);
  EXPECT_LT(s_hi.bytes.size(), s_lo.bytes.size());
  const auto d_lo = DecodeSequence(s_lo).frames;
  const auto d_hi = DecodeSequence(s_hi).frames;
  double p_lo = 0, p_hi = 0;
  for (size_t i = 0; i < frames.size(); ++i) {
    p_lo += Psnr(frames[i], d_lo[i]);
    p_hi += Psnr(frames[i], d_hi[i]);
  }
  EXPECT_LT(p_hi, p_lo);
}

TEST(EncoderTest, RejectsBadInput) {
  CodecConfig config;
  EXPECT_THROW(EncodeSequence({}, config), Error);
  EXPECT_THROW(EncodeSequence({Frame(64, 64), Frame(32, 32)}, config), Error);
  config.qp = 60;
  EXPECT_THROW(EncodeSequence({Frame(64, 64)}, config), Error);
}

TEST(EncoderTest, GopInsertsIntraFrames) {
  const auto frames = MakeFixture(FixtureKind::kDeformingChecker, 2, 7);
  CodecConfig config;
  config.gop = 3;
  const auto side = DecodeSequence(EncodeSequence(frames, config)).side_info;
  for (size_t t = 0; t < side.size(); ++t) EXPECT_EQ(side[t].intra_frame, t % 3 == 0);
}

class ClosedLoopTest : public ::testing::TestWithParam<int> {};

TEST_P(ClosedLoopTest, DecoderMatchesEncoderState) {
  const auto frames = BothFixtures(7, 5);
  CodecConfig config;
  config.qp = GetParam();
  const auto enc = EncodeSequenceDetailed(frames, config);
  const auto dec = DecodeSequence(enc.stream);
  ASSERT_EQ(dec.frames.size(), frames.size());
  EXPECT_EQ(dec.frames, enc.reconstructions);
  EXPECT_EQ(dec.side_info, enc.side_info);
  for (size_t t = 0; t < frames.size(); ++t) {
    const SideInfo& side = dec.side_info[t];
    ValidateSideInfo(side);
    EXPECT_EQ(side.qp, GetParam());
    EXPECT_EQ(ReconstructFromSideInfo(side), dec.frames[t]);
    const Frame* ref = side.intra_frame ? nullptr : &dec.frames[t - 1];
    EXPECT_EQ(PredictFrame(side.intra_frame, ref, side.motion, side.partition, dec.frames[t]),
              side.prediction);
    for (const auto& m : side.motion.leaves) {
      if (side.intra_frame) {
        EXPECT_TRUE(m.intra);
      }
      EXPECT_LE(std::abs(m.dx), config.search_radius);
      EXPECT_LE(std::abs(m.dy), config.search_radius);
    }
  }
}

// The load-bearing property of back projection: the residual coefficients of
// the original frame against the decoder's prediction lie inside [L, U].
TEST_P(ClosedLoopTest, TrueCoefficientsLieInsideBounds) {
  const auto frames = BothFixtures(8, 5);
  CodecConfig config;
  config.qp = GetParam();
  const auto dec = DecodeSequence(EncodeSequence(frames, config));
  const QuantTable q(config.qp);
  for (size_t t = 0; t < frames.size(); ++t) {
    const SideInfo& side = dec.side_info[t];
    for (size_t i = 0; i < side.partition.leaves.size(); ++i) {
      const auto blocks = TransformBlocksOfLeaf(side.partition.leaves[i]);
      for (size_t b = 0; b < blocks.size(); ++b) {
        const Leaf& tb = blocks[b];
        std::vector<double> e(tb.size * tb.size);
        for (int y = 0; y < tb.size; ++y)
          for (int x = 0; x < tb.size; ++x)
            e[y * tb.size + x] = static_cast<double>(frames[t].at(tb.x + x, tb.y + y)) -
                                 side.prediction.at(tb.x + x, tb.y + y);
        const auto coeffs = Dct2d(e, tb.size);
        const auto bounds = ComputeCoeffBounds(Dequantize(side.decoded_levels[i][b], q), q);
        for (size_t k = 0; k < coeffs.coeffs.size(); ++k) {
          ASSERT_LE(bounds.lower[k], coeffs.coeffs[k]);
          ASSERT_LE(coeffs.coeffs[k], bounds.upper[k]);
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Qps, ClosedLoopTest, ::testing::Values(0, 8, 24, 36, 40, 51));

TEST(DecoderTest, SyntaxRoundTripIsByteIdentical) {
  const auto frames = BothFixtures(3, 4);
  CodecConfig config;
  config.qp = 30;
  config.split_threshold = 4.5;
  const auto stream = EncodeSequence(frames, config);
  const auto dec = DecodeSequence(stream);
  BitWriter w;
  WriteStreamHeader(w, dec.header);
  for (const auto& side : dec.side_info) WriteFrameSyntax(w, side);
  EXPECT_EQ(w.bytes(), stream.bytes);
  EXPECT_EQ(dec.header.split_threshold_x10, 45);
  EXPECT_EQ(dec.header.search_radius, 8);
  EXPECT_EQ(dec.header.frame_count, frames.size());
}

TEST(DecoderTest, HeaderLayout) {
  const auto stream = EncodeSequence({Frame(64, 48, 9)}, CodecConfig{});
  ASSERT_GE(stream.bytes.size(), kStreamHeaderBytes);
  const std::vector<uint8_t> head(stream.bytes.begin(), stream.bytes.begin() + 18);
  const std::vector<uint8_t> expected = {'M', 'V', 'C', '1', 1, 0, 64, 0, 48, 0,
                                         1,   0,   0,   0,   32, 8, 60, 0};
  EXPECT_EQ(head, expected);
}

TEST(DecoderTest, BadMagicProducesNoOutput) {
  auto stream = EncodeSequence(MakeFixture(FixtureKind::kTranslatingPatch, 1, 2), CodecConfig{});
  std::copy_n("XXXX", 4, stream.bytes.begin());
  try {
    DecodeSequence(stream);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(DecoderTest, TruncationAndTrailingData) {
  const auto stream = EncodeSequence(MakeFixture(FixtureKind::kTranslatingPatch, 1, 3), CodecConfig{});
  for (size_t cut : {size_t{3}, size_t{10}, size_t{19}, stream.bytes.size() / 2,
                     stream.bytes.size() - 1}) {
    Bitstream t{{stream.bytes.begin(), stream.bytes.begin() + cut}};
    try {
      DecodeSequence(t);
      FAIL() << cut;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("truncated payload"), std::string::npos) << e.what();
    }
  }
  Bitstream extra = stream;
  extra.bytes.push_back(0);
  EXPECT_THROW(DecodeSequence(extra), Error);
}

TEST(DecoderTest, RejectsNonMacroblockHeader) {
  auto stream = EncodeSequence({Frame(64, 64, 9)}, CodecConfig{});
  stream.bytes[6] = 60;
  try {
    DecodeSequence(stream);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("partition"), std::string::npos);
  }
}

TEST(ExtractTest, MotionFieldOfGlobalShift) {
  const auto frames = MakeGlobalShiftSequence(11, 3, 2, 3);
  CodecConfig config;
  config.qp = 8;
  const auto dec = DecodeSequence(EncodeSequence(frames, config));
  const auto side = ExtractSideInfo(EncodeSequence(frames, config));
  EXPECT_EQ(side, dec.side_info);
  for (const auto& s : side) EXPECT_EQ(s.qp, 8);
  for (const auto& m : side[0].motion.leaves) EXPECT_TRUE(m.intra);
  int interior = 0;
  for (size_t t = 1; t < side.size(); ++t) {
    for (size_t i = 0; i < side[t].partition.leaves.size(); ++i) {
      const Leaf& leaf = side[t].partition.leaves[i];
      if (leaf.x < 2 || leaf.y < 3) continue;
      const auto [dx, dy] = BruteForceSearch(frames[t], dec.frames[t - 1], leaf, 8);
      ASSERT_FALSE(side[t].motion.leaves[i].intra);
      EXPECT_EQ(side[t].motion.leaves[i].dx, dx);
      EXPECT_EQ(side[t].motion.leaves[i].dy, dy);
      EXPECT_EQ(dx, 2);
      EXPECT_EQ(dy, 3);
      ++interior;
    }
  }
  EXPECT_GT(interior, 10);
}

TEST(RateTest, MonotoneOverQp) {
  for (auto kind : {FixtureKind::kTranslatingPatch, FixtureKind::kDeformingChecker}) {
    const auto frames = MakeFixture(kind, 1, 5);
    size_t prev_size = SIZE_MAX;
    double prev_psnr = 1e9;
    for (int qp : {8, 16, 24, 32, 40}) {
      CodecConfig config;
      config.qp = qp;
      const auto stream = EncodeSequence(frames, config);
      const auto dec = DecodeSequence(stream);
      double psnr = 0;
      for (size_t i = 0; i < frames.size(); ++i) psnr += Psnr(frames[i], dec.frames[i]);
      psnr /= frames.size();
      EXPECT_LT(stream.bytes.size(), prev_size) << "qp " << qp;
      EXPECT_LT(psnr, prev_psnr) << "qp " << qp;
      prev_size = stream.bytes.size();
      prev_psnr = psnr;
    }
  }
}

}  // namespace
}  // namespace mvdr
