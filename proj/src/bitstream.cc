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


#include "mvdr/bitstream.h"

#include <bit>

#include "mvdr/error.h"

namespace mvdr {

void BitWriter::PutBit(bool bit) {
  if (used_ == 8) {
    bytes_.push_back(0);
    used_ = 0;
  }
  if (bit) bytes_.back() |= static_cast<uint8_t>(0x80 >> used_);
  ++used_;
}

void BitWriter::PutBits(uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) PutBit((value >> i) & 1);
}

void BitWriter::PutUe(uint32_t value) {
  const uint64_t v = static_cast<uint64_t>(value) + 1;
  const int bits = std::bit_width(v);
  PutBits(0, bits - 1);
  PutBits(v, bits);
}

void BitWriter::PutSe(int32_t value) { PutUe(SignedToUnsigned(value)); }

void BitWriter::AlignToByte() { used_ = 8; }

bool BitReader::GetBit() {
  if (pos_ >= limit_) {
    ThrowInvalid("truncated payload: read past end of bitstream");
  }
  bool bit = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
  ++pos_;
  return bit;
}

uint64_t BitReader::GetBits(int count) {
  uint64_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | (GetBit() ? 1 : 0);
  return v;
}

uint32_t BitReader::GetUe() {
  int zeros = 0;
  while (!GetBit()) {
    if (++zeros > 32) ThrowInvalid("malformed exp-Golomb code");
  }
  uint64_t v = (uint64_t{1} << zeros) | GetBits(zeros);
  if (v - 1 > UINT32_MAX) ThrowInvalid("malformed exp-Golomb code");
  return static_cast<uint32_t>(v - 1);
}

int32_t BitReader::GetSe() { return UnsignedToSigned(GetUe()); }

void BitReader::AlignToByte() { pos_ = (pos_ + 7) / 8 * 8; }

uint32_t SignedToUnsigned(int32_t v) {
  return v >= 0 ? 2 * static_cast<uint32_t>(v)
                : 2 * static_cast<uint32_t>(-static_cast<int64_t>(v)) - 1;
}

int32_t UnsignedToSigned(uint32_t u) {
  return (u & 1) ? -static_cast<int32_t>((u + 1) / 2)
                 : static_cast<int32_t>(u / 2);
}

std::string UeGolombBits(uint32_t value) {
  BitWriter w;
  w.PutUe(value);
  std::string bits;
  BitReader r(w.bytes());
  const size_t n = w.bit_count();
  for (size_t i = 0; i < n; ++i) bits.push_back(r.GetBit() ? '1' : '0');
  return bits;
}

uint32_t UeGolombDecode(const std::string& bits) {
  BitWriter w;
  for (char c : bits) w.PutBit(c == '1');
  BitReader r(w.bytes(), bits.size());
  uint32_t v = r.GetUe();
  if (r.bit_position() != bits.size()) {
    ThrowInvalid("trailing bits after exp-Golomb code");
  }
  return v;
}

}  // namespace mvdr
