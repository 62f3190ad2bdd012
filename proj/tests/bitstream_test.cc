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


#include <cstdint>

#include "gtest/gtest.h"
#include "mvdr/bitstream.h"
#include "mvdr/error.h"
#include "mvdr/rng.h"

namespace mvdr {
namespace {

TEST(ExpGolombTest, CodeWords) {
  EXPECT_EQ(UeGolombBits(0), "1");
  EXPECT_EQ(UeGolombBits(1), "010");
  EXPECT_EQ(UeGolombBits(2), "011");
  EXPECT_EQ(UeGolombBits(4), "00101");
  EXPECT_EQ(UeGolombDecode("00101"), 4u);
}

TEST(ExpGolombTest, TruncatedCodeIsRejected) {
  EXPECT_THROW(UeGolombDecode("001"), Error);
  EXPECT_THROW(UeGolombDecode(""), Error);
}

TEST(ExpGolombTest, ExhaustiveRoundTrip) {
  BitWriter w;
  for (uint32_t v = 0; v <= 100000; ++v) w.PutUe(v);
  BitReader r(w.bytes(), w.bit_count());
  for (uint32_t v = 0; v <= 100000; ++v) ASSERT_EQ(r.GetUe(), v);
  EXPECT_EQ(r.bits_left(), 0u);
  EXPECT_THROW(r.GetBit(), Error);
}

TEST(ExpGolombTest, SignedMapping) {
  EXPECT_EQ(SignedToUnsigned(0), 0u);
  EXPECT_EQ(SignedToUnsigned(1), 2u);
  EXPECT_EQ(SignedToUnsigned(-1), 1u);
  EXPECT_EQ(SignedToUnsigned(-3), 5u);
  BitWriter w;
  for (int32_t v = -50000; v <= 50000; ++v) w.PutSe(v);
  BitReader r(w.bytes());
  for (int32_t v = -50000; v <= 50000; ++v) ASSERT_EQ(r.GetSe(), v);
}

TEST(ExpGolombTest, LargeValues) {
  BitWriter w;
  w.PutUe(UINT32_MAX - 1);
  w.PutSe(INT32_MAX);
  w.PutSe(-INT32_MAX);
  BitReader r(w.bytes());
  EXPECT_EQ(r.GetUe(), UINT32_MAX - 1);
  EXPECT_EQ(r.GetSe(), INT32_MAX);
  EXPECT_EQ(r.GetSe(), -INT32_MAX);
}

TEST(BitWriterTest, MsbFirstPackingAndAlignment) {
  BitWriter w;
  w.PutBits(0b101, 3);
  w.AlignToByte();
  w.PutBits(0xA5, 8);
  ASSERT_EQ(w.bytes().size(), 2u);
  EXPECT_EQ(w.bytes()[0], 0b10100000);
  EXPECT_EQ(w.bytes()[1], 0xA5);
  EXPECT_EQ(w.bit_count(), 16u);
}

// Mixed syntax sequences survive a write/read cycle.
TEST(BitWriterTest, RandomSyntaxRoundTrip) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<std::pair<int, int64_t>> syntax;
    BitWriter w;
    for (int i = 0; i < 500; ++i) {
      int kind = static_cast<int>(rng.Below(3));
      int64_t v = 0;
      if (kind == 0) {
        v = static_cast<int64_t>(rng.Below(2));
        w.PutBit(v != 0);
      } else if (kind == 1) {
        v = static_cast<int64_t>(rng.Below(1 << 20));
        w.PutUe(static_cast<uint32_t>(v));
      } else {
        v = static_cast<int64_t>(rng.Below(1 << 16)) - (1 << 15);
        w.PutSe(static_cast<int32_t>(v));
      }
      syntax.emplace_back(kind, v);
    }
    BitReader r(w.bytes());
    for (auto [kind, v] : syntax) {
      switch (kind) {
        case 0:
          ASSERT_EQ(r.GetBit(), v != 0);
          break;
        case 1:
          ASSERT_EQ(r.GetUe(), static_cast<uint32_t>(v));
          break;
        default:
          ASSERT_EQ(r.GetSe(), static_cast<int32_t>(v));
      }
    }
  }
}

}  // namespace
}  // namespace mvdr
