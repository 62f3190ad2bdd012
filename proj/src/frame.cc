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


#include "mvdr/frame.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mvdr/error.h"

namespace mvdr {
namespace {

void CheckDimensions(int width, int height) {
  if (width <= 0 || height <= 0 || width % kMacroblockSize != 0 ||
      height % kMacroblockSize != 0) {
    ThrowInvalid("frame dimensions " + std::to_string(width) + "x" +
                 std::to_string(height) +
                 " are not positive multiples of 16");
  }
}

// Skips whitespace and '#' comments in a PGM header.
void SkipPgmSpace(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

int ReadPgmInt(std::istream& in, const std::filesystem::path& path) {
  SkipPgmSpace(in);
  int value = 0;
  if (!(in >> value)) {
    ThrowInvalid("malformed PGM header: " + path.string());
  }
  return value;
}

}  // namespace

Frame::Frame(int width, int height, uint8_t fill)
    : width_(width), height_(height) {
  CheckDimensions(width, height);
  samples_.assign(static_cast<size_t>(width) * height, fill);
}

Frame::Frame(int width, int height, std::vector<uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  CheckDimensions(width, height);
  if (samples_.size() != static_cast<size_t>(width) * height) {
    ThrowInvalid("frame sample count does not match dimensions");
  }
}

uint8_t Frame::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return samples_[y * width_ + x];
}

Plane Plane::FromFrame(const Frame& frame) {
  Plane plane(frame.width(), frame.height());
  auto samples = frame.samples();
  std::copy(samples.begin(), samples.end(), plane.values.begin());
  return plane;
}

uint8_t RoundClipPixel(double v) {
  double r = std::round(v);  // half away from zero
  return static_cast<uint8_t>(std::clamp(r, 0.0, 255.0));
}

Frame RoundClip(const Plane& plane) {
  std::vector<uint8_t> samples(plane.values.size());
  std::transform(plane.values.begin(), plane.values.end(), samples.begin(),
                 RoundClipPixel);
  return Frame(plane.width, plane.height, std::move(samples));
}

void ValidatePartition(const PartitionMap& partition) {
  CheckDimensions(partition.width, partition.height);
  std::vector<uint8_t> covered(
      static_cast<size_t>(partition.width) * partition.height, 0);
  for (const Leaf& leaf : partition.leaves) {
    if (leaf.size != 16 && leaf.size != 8 && leaf.size != 4) {
      ThrowInvalid("partition leaf size must be 16, 8 or 4");
    }
    if (leaf.x % leaf.size != 0 || leaf.y % leaf.size != 0 || leaf.x < 0 ||
        leaf.y < 0 || leaf.x + leaf.size > partition.width ||
        leaf.y + leaf.size > partition.height) {
      ThrowInvalid("partition leaf misaligned or outside the frame");
    }
    for (int y = leaf.y; y < leaf.y + leaf.size; ++y) {
      for (int x = leaf.x; x < leaf.x + leaf.size; ++x) {
        uint8_t& c = covered[static_cast<size_t>(y) * partition.width + x];
        if (c) ThrowInvalid("partition leaves overlap");
        c = 1;
      }
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    ThrowInvalid("partition leaves do not cover the frame");
  }
}

int TransformSizeForLeaf(int leaf_size) { return leaf_size == 4 ? 4 : 8; }

std::vector<Leaf> TransformBlocksOfLeaf(const Leaf& leaf) {
  if (leaf.size != 16) return {leaf};
  return {{leaf.x, leaf.y, 8},
          {leaf.x + 8, leaf.y, 8},
          {leaf.x, leaf.y + 8, 8},
          {leaf.x + 8, leaf.y + 8, 8}};
}

Frame ReadPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open frame file: " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    ThrowInvalid("malformed PGM header (expected P5): " + path.string());
  }
  int width = ReadPgmInt(in, path);
  int height = ReadPgmInt(in, path);
  int maxval = ReadPgmInt(in, path);
  if (maxval != 255) {
    ThrowInvalid("unsupported PGM maxval (expected 255): " + path.string());
  }
  // Exactly one whitespace byte separates the header from the raster.
  int sep = in.get();
  if (sep != ' ' && sep != '\n' && sep != '\r' && sep != '\t') {
    ThrowInvalid("malformed PGM header: " + path.string());
  }
  if (width <= 0 || height <= 0) {
    ThrowInvalid("malformed PGM dimensions: " + path.string());
  }
  std::vector<uint8_t> samples(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(samples.data()),
          static_cast<std::streamsize>(samples.size()));
  if (static_cast<size_t>(in.gcount()) != samples.size()) {
    ThrowInvalid("truncated PGM raster: " + path.string());
  }
  try {
    return Frame(width, height, std::move(samples));
  } catch (const Error& e) {
    ThrowInvalid(std::string(e.what()) + ": " + path.string());
  }
}

void WritePgm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot write frame file: " + path.string());
  out << "P5\n" << frame.width() << " " << frame.height() << "\n255\n";
  auto samples = frame.samples();
  out.write(reinterpret_cast<const char*>(samples.data()),
            static_cast<std::streamsize>(samples.size()));
  if (!out) ThrowIo("failed writing frame file: " + path.string());
}

FrameSequenceManifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot open manifest: " + path.string());
  FrameSequenceManifest manifest;
  std::string line;
  if (!std::getline(in, line)) {
    ThrowInvalid("empty manifest: " + path.string());
  }
  std::istringstream header(line);
  if (!(header >> manifest.width >> manifest.height >> manifest.fps) ||
      manifest.fps <= 0) {
    ThrowInvalid("malformed manifest header (expected \"W H FPS\"): " +
                 path.string());
  }
  CheckDimensions(manifest.width, manifest.height);
  const std::filesystem::path base = path.parent_path();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    manifest.frames.push_back(base / line);
  }
  return manifest;
}

void WriteManifest(const std::filesystem::path& path,
                   const FrameSequenceManifest& manifest) {
  std::ofstream out(path);
  if (!out) ThrowIo("cannot write manifest: " + path.string());
  out << manifest.width << " " << manifest.height << " " << manifest.fps
      << "\n";
  const std::filesystem::path base = path.parent_path();
  for (const auto& frame : manifest.frames) {
    out << frame.lexically_relative(base).generic_string() << "\n";
  }
  if (!out) ThrowIo("failed writing manifest: " + path.string());
}

std::vector<Frame> LoadSequence(const FrameSequenceManifest& manifest) {
  std::vector<Frame> frames;
  frames.reserve(manifest.frames.size());
  for (const auto& path : manifest.frames) {
    if (!std::filesystem::exists(path)) {
      ThrowIo("missing frame file: " + path.string());
    }
    Frame frame = ReadPgm(path);
    if (frame.width() != manifest.width || frame.height() != manifest.height) {
      ThrowInvalid("dimension mismatch: " + path.string() + " is " +
                   std::to_string(frame.width()) + "x" +
                   std::to_string(frame.height()) + ", manifest says " +
                   std::to_string(manifest.width) + "x" +
                   std::to_string(manifest.height));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::filesystem::path WriteSequence(const std::filesystem::path& dir,
                                    const std::vector<Frame>& frames,
                                    double fps) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) ThrowIo("cannot create directory: " + dir.string());
  FrameSequenceManifest manifest;
  manifest.fps = fps;
  if (!frames.empty()) {
    manifest.width = frames.front().width();
    manifest.height = frames.front().height();
  }
  for (size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.pgm", i);
    WritePgm(dir / name, frames[i]);
    manifest.frames.push_back(dir / name);
  }
  const auto manifest_path = dir / "manifest.txt";
  WriteManifest(manifest_path, manifest);
  return manifest_path;
}

}  // namespace mvdr
