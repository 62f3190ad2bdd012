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


#include "mvdr/codec.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "mvdr/error.h"
#include "mvdr/transform_quant.h"

namespace mvdr {
namespace {

void PutLe(BitWriter& w, uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) w.PutBits((value >> (8 * i)) & 0xff, 8);
}

uint64_t GetLe(std::span<const uint8_t> bytes, size_t offset, int count) {
  uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    v |= static_cast<uint64_t>(bytes[offset + i]) << (8 * i);
  }
  return v;
}

int64_t BlockSad(const Frame& current, const Leaf& leaf, const Frame& source,
                 int dx, int dy) {
  int64_t sad = 0;
  for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
    for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
      sad += std::abs(static_cast<int>(current.at(x, y)) -
                      source.clamped(x - dx, y - dy));
    }
  }
  return sad;
}

int64_t ConstantSad(const Frame& current, const Leaf& leaf, int value) {
  int64_t sad = 0;
  for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
    for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
      sad += std::abs(static_cast<int>(current.at(x, y)) - value);
    }
  }
  return sad;
}

// Adds the dequantized residual of one leaf to its prediction and stores the
// rounded, clipped result in `decoded`.
void ReconstructLeaf(const Leaf& leaf, const std::vector<QuantLevels>& levels,
                     const QuantTable& q, const Frame& prediction,
                     Frame& decoded) {
  const auto blocks = TransformBlocksOfLeaf(leaf);
  for (size_t b = 0; b < blocks.size(); ++b) {
    const Leaf& tb = blocks[b];
    const auto residual = Idct2d(Dequantize(levels[b], q));
    for (int y = 0; y < tb.size; ++y) {
      for (int x = 0; x < tb.size; ++x) {
        double v = static_cast<double>(prediction.at(tb.x + x, tb.y + y)) +
                   residual[y * tb.size + x];
        decoded.set(tb.x + x, tb.y + y, RoundClipPixel(v));
      }
    }
  }
}

void CheckLevelsShape(const SideInfo& side) {
  if (side.decoded_levels.size() != side.partition.leaves.size() ||
      side.motion.leaves.size() != side.partition.leaves.size()) {
    ThrowInvalid("side info must carry one motion and level entry per leaf");
  }
  for (size_t i = 0; i < side.partition.leaves.size(); ++i) {
    const Leaf& leaf = side.partition.leaves[i];
    const auto& levels = side.decoded_levels[i];
    if (levels.size() != TransformBlocksOfLeaf(leaf).size()) {
      ThrowInvalid("leaf carries the wrong number of transform blocks");
    }
    for (const auto& block : levels) {
      if (block.size != TransformSizeForLeaf(leaf.size)) {
        ThrowInvalid("transform block size does not match its leaf");
      }
    }
  }
}

// Reconstructs one frame from parsed syntax, filling side.prediction.
Frame ReconstructFrame(SideInfo& side, const Frame* reference) {
  CheckLevelsShape(side);
  const QuantTable q(side.qp);
  Frame decoded(side.partition.width, side.partition.height);
  side.prediction = Frame(side.partition.width, side.partition.height);
  for (size_t i = 0; i < side.partition.leaves.size(); ++i) {
    const Leaf& leaf = side.partition.leaves[i];
    PredictLeaf(leaf, side.motion.leaves[i], reference, decoded,
                side.prediction);
    ReconstructLeaf(leaf, side.decoded_levels[i], q, side.prediction, decoded);
  }
  return decoded;
}

// Run-level coding in zigzag order: each nonzero level is preceded by
// ue(run + 1); ue(0) ends the block.
void WriteBlockLevels(BitWriter& w, const QuantLevels& block) {
  const auto order = ZigzagOrder(block.size);
  int run = 0;
  for (int idx : order) {
    int level = block.levels[idx];
    if (level == 0) {
      ++run;
      continue;
    }
    w.PutUe(static_cast<uint32_t>(run + 1));
    w.PutSe(level);
    run = 0;
  }
  w.PutUe(0);
}

QuantLevels ReadBlockLevels(BitReader& r, int size) {
  QuantLevels block(size);
  const auto order = ZigzagOrder(size);
  size_t pos = 0;
  while (true) {
    uint32_t code = r.GetUe();
    if (code == 0) break;
    pos += code - 1;
    if (pos >= order.size()) ThrowInvalid("coefficient run exceeds block");
    int32_t level = r.GetSe();
    if (level == 0 || level > std::numeric_limits<int16_t>::max() ||
        level < std::numeric_limits<int16_t>::min()) {
      ThrowInvalid("malformed coefficient level");
    }
    block.levels[order[pos]] = level;
    ++pos;
  }
  return block;
}

struct SyntaxWalker {
  const SideInfo& side;
  BitWriter& w;
  size_t next = 0;

  void Node(int x, int y, int size) {
    if (next >= side.partition.leaves.size()) {
      ThrowInvalid("partition does not cover the frame");
    }
    const Leaf& leaf = side.partition.leaves[next];
    if (leaf.x == x && leaf.y == y && leaf.size == size) {
      if (size > 4) w.PutBit(false);
      LeafBody(next++);
      return;
    }
    if (size == 4) ThrowInvalid("partition is not a 16/8/4 quadtree");
    w.PutBit(true);
    const int h = size / 2;
    Node(x, y, h);
    Node(x + h, y, h);
    Node(x, y + h, h);
    Node(x + h, y + h, h);
  }

  void LeafBody(size_t i) {
    const LeafMotion& m = side.motion.leaves[i];
    if (!side.intra_frame) {
      w.PutBit(m.intra);
      if (!m.intra) {
        w.PutSe(m.dx);
        w.PutSe(m.dy);
      }
    } else if (!m.intra) {
      ThrowInvalid("intra frame carries an inter leaf");
    }
    for (const auto& block : side.decoded_levels[i]) WriteBlockLevels(w, block);
  }
};

struct SyntaxParser {
  BitReader& r;
  const StreamHeader& header;
  SideInfo& side;

  void Node(int x, int y, int size) {
    if (size > 4 && r.GetBit()) {
      const int h = size / 2;
      Node(x, y, h);
      Node(x + h, y, h);
      Node(x, y + h, h);
      Node(x + h, y + h, h);
      return;
    }
    const Leaf leaf{x, y, size};
    LeafMotion m;
    if (side.intra_frame || r.GetBit()) {
      m.intra = true;
    } else {
      m.dx = r.GetSe();
      m.dy = r.GetSe();
      if (std::abs(m.dx) > header.search_radius ||
          std::abs(m.dy) > header.search_radius) {
        ThrowInvalid("motion vector exceeds the search radius");
      }
    }
    std::vector<QuantLevels> levels;
    for (size_t b = 0; b < TransformBlocksOfLeaf(leaf).size(); ++b) {
      levels.push_back(ReadBlockLevels(r, TransformSizeForLeaf(size)));
    }
    side.partition.leaves.push_back(leaf);
    side.motion.leaves.push_back(m);
    side.decoded_levels.push_back(std::move(levels));
  }
};

class FrameEncoder {
 public:
  FrameEncoder(const Frame& current, const Frame* reference, bool intra_frame,
               const CodecConfig& config, int frame_index)
      : current_(current),
        reference_(reference),
        config_(config),
        q_(config.qp),
        decoded_(current.width(), current.height()),
        prediction_(current.width(), current.height()) {
    side_.frame_index = frame_index;
    side_.qp = config.qp;
    side_.intra_frame = intra_frame;
    side_.partition.width = current.width();
    side_.partition.height = current.height();
  }

  void Run() {
    for (int y = 0; y < current_.height(); y += kMacroblockSize) {
      for (int x = 0; x < current_.width(); x += kMacroblockSize) {
        Node({x, y, kMacroblockSize});
      }
    }
    side_.prediction = prediction_;
  }

  SideInfo& side() { return side_; }
  const Frame& decoded() const { return decoded_; }

 private:
  void Node(const Leaf& node) {
    LeafMotion motion;
    if (side_.intra_frame) {
      motion.intra = true;
    } else {
      const auto best =
          MotionSearch(current_, *reference_, node, config_.search_radius);
      const int64_t intra_sad =
          ConstantSad(current_, node, IntraDcValue(decoded_, node));
      if (intra_sad < best.sad) {
        motion.intra = true;
      } else {
        motion.dx = best.dx;
        motion.dy = best.dy;
      }
    }
    PredictLeaf(node, motion, reference_, decoded_, prediction_);
    if (NeedsSplit(current_, prediction_, node, config_.split_threshold)) {
      const int h = node.size / 2;
      Node({node.x, node.y, h});
      Node({node.x + h, node.y, h});
      Node({node.x, node.y + h, h});
      Node({node.x + h, node.y + h, h});
      return;
    }
    std::vector<QuantLevels> levels;
    for (const Leaf& tb : TransformBlocksOfLeaf(node)) {
      std::vector<double> residual(static_cast<size_t>(tb.size) * tb.size);
      for (int y = 0; y < tb.size; ++y) {
        for (int x = 0; x < tb.size; ++x) {
          residual[y * tb.size + x] =
              static_cast<double>(current_.at(tb.x + x, tb.y + y)) -
              prediction_.at(tb.x + x, tb.y + y);
        }
      }
      levels.push_back(Quantize(Dct2d(residual, tb.size), q_));
    }
    ReconstructLeaf(node, levels, q_, prediction_, decoded_);
    side_.partition.leaves.push_back(node);
    side_.motion.leaves.push_back(motion);
    side_.decoded_levels.push_back(std::move(levels));
  }

  const Frame& current_;
  const Frame* reference_;
  const CodecConfig& config_;
  QuantTable q_;
  Frame decoded_;
  Frame prediction_;
  SideInfo side_;
};

}  // namespace

void ValidateSideInfo(const SideInfo& side) {
  ValidatePartition(side.partition);
  CheckLevelsShape(side);
  if (side.prediction.width() != side.partition.width ||
      side.prediction.height() != side.partition.height) {
    ThrowInvalid("side info prediction does not match the partition size");
  }
  if (side.qp < 0 || side.qp > kMaxQp) ThrowInvalid("side info qp outside [0, 51]");
}

void CodecConfig::Validate() const {
  if (qp < 0 || qp > 51) {
    ThrowInvalid("qp " + std::to_string(qp) + " outside [0, 51]");
  }
  if (search_radius < 0 || search_radius > 255) {
    ThrowInvalid("search radius outside [0, 255]");
  }
  if (!(split_threshold >= 0) || split_threshold * 10 > 65535) {
    ThrowInvalid("split threshold outside [0, 6553.5]");
  }
  if (gop < 0) ThrowInvalid("gop must be non-negative");
}

void WriteStreamHeader(BitWriter& w, const StreamHeader& header) {
  for (char c : kStreamMagic) w.PutBits(static_cast<uint8_t>(c), 8);
  PutLe(w, header.version, 2);
  PutLe(w, header.width, 2);
  PutLe(w, header.height, 2);
  PutLe(w, header.frame_count, 4);
  PutLe(w, header.qp, 1);
  PutLe(w, header.search_radius, 1);
  PutLe(w, header.split_threshold_x10, 2);
}

StreamHeader ReadStreamHeader(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4,
                                      std::begin(kStreamMagic))) {
    if (bytes.size() < 4) ThrowInvalid("truncated payload: missing header");
    ThrowInvalid("bad magic: not an MVC1 bitstream");
  }
  if (bytes.size() < kStreamHeaderBytes) {
    ThrowInvalid("truncated payload: incomplete header");
  }
  StreamHeader h;
  h.version = static_cast<uint16_t>(GetLe(bytes, 4, 2));
  h.width = static_cast<uint16_t>(GetLe(bytes, 6, 2));
  h.height = static_cast<uint16_t>(GetLe(bytes, 8, 2));
  h.frame_count = static_cast<uint32_t>(GetLe(bytes, 10, 4));
  h.qp = static_cast<uint8_t>(GetLe(bytes, 14, 1));
  h.search_radius = static_cast<uint8_t>(GetLe(bytes, 15, 1));
  h.split_threshold_x10 = static_cast<uint16_t>(GetLe(bytes, 16, 2));
  if (h.version != kStreamVersion) {
    ThrowInvalid("unsupported bitstream version " + std::to_string(h.version));
  }
  if (h.qp > kMaxQp) ThrowInvalid("header qp outside [0, 51]");
  if (h.width == 0 || h.height == 0 || h.width % kMacroblockSize != 0 ||
      h.height % kMacroblockSize != 0) {
    ThrowInvalid(
        "partition bits inconsistent with frame size: frame is not a whole "
        "number of macroblocks");
  }
  return h;
}

Bitstream ReadBitstreamFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open bitstream: " + path.string());
  Bitstream stream;
  stream.bytes.assign(std::istreambuf_iterator<char>(in), {});
  return stream;
}

void WriteBitstreamFile(const std::filesystem::path& path,
                        const Bitstream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot write bitstream: " + path.string());
  out.write(reinterpret_cast<const char*>(stream.bytes.data()),
            static_cast<std::streamsize>(stream.bytes.size()));
  if (!out) ThrowIo("failed writing bitstream: " + path.string());
}

MotionSearchResult MotionSearch(const Frame& current, const Frame& reference,
                                const Leaf& leaf, int radius) {
  MotionSearchResult best;
  best.sad = std::numeric_limits<int64_t>::max();
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int64_t sad = BlockSad(current, leaf, reference, dx, dy);
      bool better = sad < best.sad;
      if (sad == best.sad) {
        const int mag = std::abs(dx) + std::abs(dy);
        const int best_mag = std::abs(best.dx) + std::abs(best.dy);
        better = mag < best_mag ||
                 (mag == best_mag && (dy < best.dy ||
                                      (dy == best.dy && dx < best.dx)));
      }
      if (better) best = {dx, dy, sad};
    }
  }
  return best;
}

bool NeedsSplit(const Frame& current, const Frame& prediction,
                const Leaf& node, double tau) {
  if (node.size <= 4) return false;
  const int64_t sad = BlockSad(current, node, prediction, 0, 0);
  return static_cast<double>(sad) / (node.size * node.size) > tau;
}

PartitionMap ChoosePartition(const Frame& current, const Frame& prediction,
                             double tau) {
  if (current.width() != prediction.width() ||
      current.height() != prediction.height()) {
    ThrowInvalid("partition inputs differ in dimensions");
  }
  PartitionMap map{current.width(), current.height(), {}};
  auto visit = [&](auto&& self, const Leaf& node) -> void {
    if (!NeedsSplit(current, prediction, node, tau)) {
      map.leaves.push_back(node);
      return;
    }
    const int h = node.size / 2;
    self(self, {node.x, node.y, h});
    self(self, {node.x + h, node.y, h});
    self(self, {node.x, node.y + h, h});
    self(self, {node.x + h, node.y + h, h});
  };
  for (int y = 0; y < current.height(); y += kMacroblockSize) {
    for (int x = 0; x < current.width(); x += kMacroblockSize) {
      visit(visit, {x, y, kMacroblockSize});
    }
  }
  return map;
}

uint8_t IntraDcValue(const Frame& decoded, const Leaf& leaf) {
  int sum = 0;
  int count = 0;
  if (leaf.x > 0) {
    for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
      sum += decoded.at(leaf.x - 1, y);
    }
    count += leaf.size;
  }
  if (leaf.y > 0) {
    for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
      sum += decoded.at(x, leaf.y - 1);
    }
    count += leaf.size;
  }
  if (count == 0) return 128;
  return static_cast<uint8_t>((sum + count / 2) / count);
}

void PredictLeaf(const Leaf& leaf, const LeafMotion& motion,
                 const Frame* reference, const Frame& decoded,
                 Frame& prediction) {
  if (motion.intra) {
    const uint8_t dc = IntraDcValue(decoded, leaf);
    for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
      for (int x = leaf.x; x < leaf.x + leaf.size; ++x) prediction.set(x, y, dc);
    }
    return;
  }
  if (reference == nullptr) {
    ThrowInvalid("inter prediction requires a reference frame");
  }
  for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
    for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
      prediction.set(x, y, reference->clamped(x - motion.dx, y - motion.dy));
    }
  }
}

Frame PredictFrame(bool intra_frame, const Frame* reference,
                   const MotionField& motion, const PartitionMap& partition,
                   const Frame& decoded_so_far) {
  if (motion.leaves.size() != partition.leaves.size()) {
    ThrowInvalid("motion field does not match the partition");
  }
  if (!intra_frame && reference == nullptr) {
    ThrowInvalid("missing reference frame for inter prediction");
  }
  Frame prediction(partition.width, partition.height);
  for (size_t i = 0; i < partition.leaves.size(); ++i) {
    LeafMotion m = motion.leaves[i];
    if (intra_frame) m.intra = true;
    PredictLeaf(partition.leaves[i], m, reference, decoded_so_far, prediction);
  }
  return prediction;
}

Plane ResidualImage(const SideInfo& side) {
  CheckLevelsShape(side);
  const QuantTable q(side.qp);
  Plane out(side.partition.width, side.partition.height);
  for (size_t i = 0; i < side.partition.leaves.size(); ++i) {
    const auto blocks = TransformBlocksOfLeaf(side.partition.leaves[i]);
    for (size_t b = 0; b < blocks.size(); ++b) {
      const Leaf& tb = blocks[b];
      const auto residual = Idct2d(Dequantize(side.decoded_levels[i][b], q));
      for (int y = 0; y < tb.size; ++y) {
        for (int x = 0; x < tb.size; ++x) {
          out.at(tb.x + x, tb.y + y) = residual[y * tb.size + x];
        }
      }
    }
  }
  return out;
}

Plane PreClipReconstruction(const SideInfo& side) {
  Plane out = ResidualImage(side);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = static_cast<double>(side.prediction.at(x, y)) + out.at(x, y);
    }
  }
  return out;
}

Frame ReconstructFromSideInfo(const SideInfo& side) {
  return RoundClip(PreClipReconstruction(side));
}

EncodeResult EncodeSequenceDetailed(const std::vector<Frame>& frames,
                                    const CodecConfig& config) {
  config.Validate();
  if (frames.empty()) ThrowInvalid("cannot encode an empty sequence");
  const int width = frames.front().width();
  const int height = frames.front().height();
  if (width > 65535 || height > 65535) {
    ThrowInvalid("frame dimensions exceed the 16-bit header fields");
  }
  for (const Frame& f : frames) {
    if (f.width() != width || f.height() != height) {
      ThrowInvalid("all frames of a sequence must share dimensions");
    }
  }

  EncodeResult result;
  BitWriter writer;
  StreamHeader header;
  header.width = static_cast<uint16_t>(width);
  header.height = static_cast<uint16_t>(height);
  header.frame_count = static_cast<uint32_t>(frames.size());
  header.qp = static_cast<uint8_t>(config.qp);
  header.search_radius = static_cast<uint8_t>(config.search_radius);
  header.split_threshold_x10 =
      static_cast<uint16_t>(std::lround(config.split_threshold * 10));
  WriteStreamHeader(writer, header);

  for (size_t t = 0; t < frames.size(); ++t) {
    const bool intra =
        t == 0 || (config.gop > 0 && t % static_cast<size_t>(config.gop) == 0);
    const Frame* reference = intra ? nullptr : &result.reconstructions.back();
    FrameEncoder encoder(frames[t], reference, intra, config,
                         static_cast<int>(t));
    encoder.Run();
    WriteFrameSyntax(writer, encoder.side());
    result.reconstructions.push_back(encoder.decoded());
    result.side_info.push_back(std::move(encoder.side()));
  }
  result.stream.bytes = writer.TakeBytes();
  return result;
}

Bitstream EncodeSequence(const std::vector<Frame>& frames,
                         const CodecConfig& config) {
  return EncodeSequenceDetailed(frames, config).stream;
}

void WriteFrameSyntax(BitWriter& writer, const SideInfo& side) {
  CheckLevelsShape(side);
  writer.PutBit(side.intra_frame);
  SyntaxWalker walker{side, writer};
  for (int y = 0; y < side.partition.height; y += kMacroblockSize) {
    for (int x = 0; x < side.partition.width; x += kMacroblockSize) {
      walker.Node(x, y, kMacroblockSize);
    }
  }
  if (walker.next != side.partition.leaves.size()) {
    ThrowInvalid("partition has leaves outside the macroblock grid");
  }
  writer.AlignToByte();
}

SideInfo ParseFrameSyntax(BitReader& reader, const StreamHeader& header,
                          int frame_index) {
  SideInfo side;
  side.frame_index = frame_index;
  side.qp = header.qp;
  side.partition.width = header.width;
  side.partition.height = header.height;
  side.intra_frame = reader.GetBit();
  if (frame_index == 0 && !side.intra_frame) {
    ThrowInvalid("first frame of a stream must be intra");
  }
  SyntaxParser parser{reader, header, side};
  for (int y = 0; y < header.height; y += kMacroblockSize) {
    for (int x = 0; x < header.width; x += kMacroblockSize) {
      parser.Node(x, y, kMacroblockSize);
    }
  }
  reader.AlignToByte();
  return side;
}

DecodeResult DecodeSequence(const Bitstream& stream) {
  DecodeResult result;
  result.header = ReadStreamHeader(stream.bytes);
  std::span<const uint8_t> payload(stream.bytes);
  BitReader reader(payload.subspan(kStreamHeaderBytes));
  // Parse everything first so malformed streams produce no partial output.
  std::vector<SideInfo> sides;
  for (uint32_t t = 0; t < result.header.frame_count; ++t) {
    sides.push_back(ParseFrameSyntax(reader, result.header, static_cast<int>(t)));
  }
  if (reader.bits_left() != 0) {
    ThrowInvalid("trailing data after the last frame");
  }
  for (auto& side : sides) {
    const Frame* reference =
        side.intra_frame ? nullptr : &result.frames.back();
    result.frames.push_back(ReconstructFrame(side, reference));
  }
  result.side_info = std::move(sides);
  return result;
}

std::vector<SideInfo> ExtractSideInfo(const Bitstream& stream) {
  return DecodeSequence(stream).side_info;
}

}  // namespace mvdr
