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


#ifndef MVDR_BITSTREAM_H_
#define MVDR_BITSTREAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvdr {

// MSB-first bit packer.
class BitWriter {
 public:
  void PutBit(bool bit);
  void PutBits(uint64_t value, int count);
  // Order-0 exp-Golomb: k zeros, then the (k+1)-bit binary of value + 1.
  void PutUe(uint32_t value);
  // Signed mapping v >= 0 -> 2v, v < 0 -> -2v - 1, then PutUe.
  void PutSe(int32_t value);
  // Zero-pads to the next byte boundary.
  void AlignToByte();

  size_t bit_count() const { return bytes_.size() * 8 - (8 - used_) % 8; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> TakeBytes() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
  int used_ = 8;  // bits used in the last byte
};

// Throws Error(kInvalidInput, "truncated payload ...") on reading past the end.
class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> data)
      : data_(data), limit_(data.size() * 8) {}
  BitReader(std::span<const uint8_t> data, size_t bit_limit)
      : data_(data), limit_(bit_limit) {}

  bool GetBit();
  uint64_t GetBits(int count);
  uint32_t GetUe();
  int32_t GetSe();
  void AlignToByte();

  size_t bit_position() const { return pos_; }
  size_t bits_left() const { return limit_ - pos_; }

 private:
  std::span<const uint8_t> data_;
  size_t limit_;
  size_t pos_ = 0;
};

uint32_t SignedToUnsigned(int32_t v);
int32_t UnsignedToSigned(uint32_t u);

// Bit string ("010") of the exp-Golomb code for `value`; for tests and docs.
std::string UeGolombBits(uint32_t value);
uint32_t UeGolombDecode(const std::string& bits);

}  // namespace mvdr

#endif  // MVDR_BITSTREAM_H_
