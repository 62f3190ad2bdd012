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

// Pixel-domain data model shared by the codec, the back-projection stage and
// the restorer: 8-bit luma frames, real-valued planes, quadtree partitions,
// per-leaf motion and the per-frame side information a decoder can expose.

#ifndef MVDR_FRAME_H_
#define MVDR_FRAME_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mvdr {

inline constexpr int kMacroblockSize = 16;

// One 8-bit luma image. Width and height are positive multiples of 16.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, uint8_t fill = 0);
  Frame(int width, int height, std::vector<uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }

  uint8_t at(int x, int y) const { return samples_[y * width_ + x]; }
  void set(int x, int y, uint8_t v) { samples_[y * width_ + x] = v; }

  // Clamp-to-edge access used by motion compensation.
  uint8_t clamped(int x, int y) const;

  std::span<const uint8_t> samples() const { return samples_; }

  bool operator==(const Frame&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> samples_;
};

// Real-valued single-channel image, e.g. the unrounded restorer output.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return values[static_cast<size_t>(y) * width + x];
  }

  static Plane FromFrame(const Frame& frame);
};

// Rounds half away from zero and clips to [0, 255].
uint8_t RoundClipPixel(double v);
Frame RoundClip(const Plane& plane);

// A square quadtree leaf. Size is 16, 8 or 4 and the origin is aligned to it.
struct Leaf {
  int x = 0;
  int y = 0;
  int size = 0;

  bool operator==(const Leaf&) const = default;
};

// Leaves in coding order: macroblocks in raster order, quadtree children in
// Z order (top-left, top-right, bottom-left, bottom-right).
struct PartitionMap {
  int width = 0;
  int height = 0;
  std::vector<Leaf> leaves;

  bool operator==(const PartitionMap&) const = default;
};

// Throws if the leaves do not tile every macroblock exactly.
void ValidatePartition(const PartitionMap& partition);

struct LeafMotion {
  bool intra = false;
  int dx = 0;
  int dy = 0;

  bool operator==(const LeafMotion&) const = default;
};

// One entry per partition leaf, parallel to PartitionMap::leaves.
struct MotionField {
  std::vector<LeafMotion> leaves;

  bool operator==(const MotionField&) const = default;
};

// Real DCT-domain coefficients of one square residual block (4x4 or 8x8).
struct CoeffBlock {
  int size = 0;
  std::vector<double> coeffs;  // row-major, coeffs[v * size + u]

  CoeffBlock() = default;
  explicit CoeffBlock(int n) : size(n), coeffs(static_cast<size_t>(n) * n) {}

  double& at(int u, int v) { return coeffs[static_cast<size_t>(v) * size + u]; }
  double at(int u, int v) const {
    return coeffs[static_cast<size_t>(v) * size + u];
  }
};

// Integer quantization levels of one transform block.
struct QuantLevels {
  int size = 0;
  std::vector<int32_t> levels;  // row-major

  QuantLevels() = default;
  explicit QuantLevels(int n) : size(n), levels(static_cast<size_t>(n) * n) {}

  bool operator==(const QuantLevels&) const = default;
};

// Transform block size used inside a leaf: 16x16 leaves carry four 8x8
// transform blocks in Z order, smaller leaves one block of their own size.
int TransformSizeForLeaf(int leaf_size);
std::vector<Leaf> TransformBlocksOfLeaf(const Leaf& leaf);

// Decoder-visible codec priors for one frame.
struct SideInfo {
  int frame_index = 0;
  int qp = 0;
  bool intra_frame = false;
  PartitionMap partition;
  MotionField motion;
  Frame prediction;
  // decoded_levels[leaf][block]: one entry per partition leaf, each holding
  // the leaf's transform blocks in Z order.
  std::vector<std::vector<QuantLevels>> decoded_levels;

  bool operator==(const SideInfo&) const = default;
};

struct FrameSequenceManifest {
  int width = 0;
  int height = 0;
  double fps = 25.0;
  std::vector<std::filesystem::path> frames;  // resolved paths
};

// Reads "W H FPS" then one frame path per line, relative to the manifest.
FrameSequenceManifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const FrameSequenceManifest& manifest);

Frame ReadPgm(const std::filesystem::path& path);
void WritePgm(const std::filesystem::path& path, const Frame& frame);

std::vector<Frame> LoadSequence(const FrameSequenceManifest& manifest);

// Writes frame_%04d.pgm files plus "manifest.txt" into `dir` and returns the
// manifest path.
std::filesystem::path WriteSequence(const std::filesystem::path& dir,
                                    const std::vector<Frame>& frames,
                                    double fps = 25.0);

}  // namespace mvdr

#endif  // MVDR_FRAME_H_
