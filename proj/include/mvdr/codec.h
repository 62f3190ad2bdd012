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

// Deterministic hybrid block codec: IPPP frame structure, per-macroblock
// quadtree partitions (16/8/4), integer-pel motion compensation, DC intra
// prediction, orthonormal DCT with flat quantization, and an exp-Golomb
// bitstream. The decoder exposes the full closed-loop state as SideInfo.

#ifndef MVDR_CODEC_H_
#define MVDR_CODEC_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvdr/bitstream.h"
#include "mvdr/frame.h"

namespace mvdr {

inline constexpr char kStreamMagic[4] = {'M', 'V', 'C', '1'};
inline constexpr uint16_t kStreamVersion = 1;
inline constexpr size_t kStreamHeaderBytes = 18;

struct CodecConfig {
  int qp = 32;
  int search_radius = 8;
  // Mean absolute prediction residual per pixel above which a node splits.
  double split_threshold = 6.0;
  // Intra period; 0 codes only frame 0 as intra.
  int gop = 0;

  void Validate() const;
};

struct StreamHeader {
  uint16_t version = kStreamVersion;
  uint16_t width = 0;
  uint16_t height = 0;
  uint32_t frame_count = 0;
  uint8_t qp = 0;
  uint8_t search_radius = 0;
  uint16_t split_threshold_x10 = 0;
};

struct Bitstream {
  std::vector<uint8_t> bytes;

  size_t size_bits() const { return bytes.size() * 8; }
};

void WriteStreamHeader(BitWriter& writer, const StreamHeader& header);
// Throws "bad magic" / "truncated payload" errors.
StreamHeader ReadStreamHeader(std::span<const uint8_t> bytes);

Bitstream ReadBitstreamFile(const std::filesystem::path& path);
void WriteBitstreamFile(const std::filesystem::path& path,
                        const Bitstream& stream);

struct MotionSearchResult {
  int dx = 0;
  int dy = 0;
  int64_t sad = 0;
};

// Full search over [-radius, radius]^2. The prediction for motion (dx, dy)
// is reference(x - dx, y - dy) with clamp-to-edge padding, i.e. the vector is
// the displacement of the content from the reference to the current frame.
// Ties prefer smaller |dx| + |dy|, then smaller dy, then smaller dx.
MotionSearchResult MotionSearch(const Frame& current, const Frame& reference,
                                const Leaf& leaf, int radius);

// True when the node's mean absolute residual against `prediction` exceeds
// tau and the node is larger than 4x4.
bool NeedsSplit(const Frame& current, const Frame& prediction,
                const Leaf& node, double tau);

// Quadtree partition of every macroblock against a fixed prediction frame.
PartitionMap ChoosePartition(const Frame& current, const Frame& prediction,
                             double tau);

// DC intra value from the decoded left column and top row, 128 when neither
// exists.
uint8_t IntraDcValue(const Frame& decoded, const Leaf& leaf);

// Writes the prediction of one leaf into `prediction`. Intra leaves read the
// decoded neighbors from `decoded`; inter leaves need `reference`.
void PredictLeaf(const Leaf& leaf, const LeafMotion& motion,
                 const Frame* reference, const Frame& decoded,
                 Frame& prediction);

// Prediction of a whole frame. Leaves are visited in coding order; intra
// leaves read neighbors from `decoded_so_far`, which must already hold the
// decoded pixels of every earlier leaf.
Frame PredictFrame(bool intra_frame, const Frame* reference,
                   const MotionField& motion, const PartitionMap& partition,
                   const Frame& decoded_so_far);

// Throws unless the side info carries one motion entry and one correctly
// shaped level set per leaf, a valid partition and a matching prediction.
void ValidateSideInfo(const SideInfo& side);

// Prediction plus dequantized, inverse-transformed residual, before rounding
// and clipping.
Plane PreClipReconstruction(const SideInfo& side);
// The dequantized residual image alone.
Plane ResidualImage(const SideInfo& side);
// RoundClip(PreClipReconstruction(side)).
Frame ReconstructFromSideInfo(const SideInfo& side);

struct EncodeResult {
  Bitstream stream;
  std::vector<Frame> reconstructions;  // the encoder's closed-loop frames
  std::vector<SideInfo> side_info;
};

EncodeResult EncodeSequenceDetailed(const std::vector<Frame>& frames,
                                    const CodecConfig& config);
Bitstream EncodeSequence(const std::vector<Frame>& frames,
                         const CodecConfig& config);

struct DecodeResult {
  StreamHeader header;
  std::vector<Frame> frames;
  std::vector<SideInfo> side_info;
};

DecodeResult DecodeSequence(const Bitstream& stream);
std::vector<SideInfo> ExtractSideInfo(const Bitstream& stream);

// Frame-level syntax without pixel reconstruction. ParseFrameSyntax fills
// partition, motion, levels and frame type; prediction is left empty.
void WriteFrameSyntax(BitWriter& writer, const SideInfo& side);
SideInfo ParseFrameSyntax(BitReader& reader, const StreamHeader& header,
                          int frame_index);

}  // namespace mvdr

#endif  // MVDR_CODEC_H_
