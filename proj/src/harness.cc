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


#include "mvdr/harness.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mvdr/error.h"
#include "mvdr/fixtures.h"
#include "mvdr/metrics.h"
#include "mvdr/transform_quant.h"

namespace mvdr {
namespace {

double Mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<RestorerInput> PrepareSequenceInputs(const DecodeResult& decoded,
                                                 int window_radius) {
  const int count = static_cast<int>(decoded.frames.size());
  if (decoded.side_info.size() != decoded.frames.size()) {
    ThrowInvalid("side info count does not match the decoded frames");
  }
  std::vector<RestorerInput> inputs;
  inputs.reserve(count);
  for (int t = 0; t < count; ++t) {
    const std::vector<int> idx = WindowIndices(t, count, window_radius);
    std::vector<Frame> window;
    std::vector<int> offsets;
    for (int i : idx) {
      window.push_back(decoded.frames[i]);
      offsets.push_back(i - t);
    }
    inputs.push_back(PrepareRestorerInput(window, offsets, decoded.side_info[t]));
  }
  return inputs;
}

std::vector<TrainingSample> BuildTrainingSamples(
    const std::vector<std::vector<Frame>>& originals, const CodecConfig& config,
    int window_radius) {
  std::vector<TrainingSample> samples;
  for (const std::vector<Frame>& seq : originals) {
    const DecodeResult decoded = DecodeSequence(EncodeSequence(seq, config));
    std::vector<RestorerInput> inputs = PrepareSequenceInputs(decoded, window_radius);
    for (size_t t = 0; t < seq.size(); ++t) {
      samples.push_back({std::move(inputs[t]), seq[t]});
    }
  }
  if (samples.empty()) ThrowInvalid("empty training dataset");
  return samples;
}

RestoreOutput RestoreSequence(const DecodeResult& decoded,
                              const RestorerModel& model, bool back_projection) {
  const std::vector<RestorerInput> inputs =
      PrepareSequenceInputs(decoded, model.shape.window_radius);
  RestoreOutput out;
  for (size_t t = 0; t < inputs.size(); ++t) {
    out.raw.push_back(RestorerForward(model, inputs[t]));
    if (back_projection) {
      ProjectionReport report;
      out.frames.push_back(BackProjectFrame(out.raw.back(), decoded.side_info[t], &report));
      out.reports.push_back(report);
    } else {
      out.frames.push_back(RoundClip(out.raw.back()));
    }
  }
  return out;
}

SeriesMetrics MeasureSeries(const std::vector<Frame>& reference,
                            const std::vector<Frame>& test) {
  if (reference.size() != test.size()) {
    ThrowInvalid("frame count mismatch: " + std::to_string(reference.size()) +
                 " reference vs " + std::to_string(test.size()) + " test");
  }
  SeriesMetrics m;
  for (size_t i = 0; i < reference.size(); ++i) {
    m.psnr.push_back(Psnr(reference[i], test[i]));
    m.ssim.push_back(Ssim(reference[i], test[i]));
  }
  m.mean_psnr = Mean(m.psnr);
  m.mean_ssim = Mean(m.ssim);
  return m;
}

nlohmann::json MetricsReport::ToJson() const {
  nlohmann::json j;
  j["frame_count"] = frame_count;
  nlohmann::json s = nlohmann::json::object();
  for (const auto& [name, m] : series) {
    s[name] = {{"psnr", m.psnr},
               {"ssim", m.ssim},
               {"mean_psnr", m.mean_psnr},
               {"mean_ssim", m.mean_ssim}};
  }
  j["series"] = s;
  if (bits >= 0) {
    j["bits"] = bits;
    j["bpp"] = bpp;
  }
  return j;
}

nlohmann::json SideInfoToJson(const StreamHeader& header,
                              const std::vector<SideInfo>& side_info) {
  nlohmann::json frames = nlohmann::json::array();
  for (const SideInfo& side : side_info) {
    nlohmann::json leaves = nlohmann::json::array();
    for (size_t i = 0; i < side.partition.leaves.size(); ++i) {
      const Leaf& leaf = side.partition.leaves[i];
      const LeafMotion& m = side.motion.leaves[i];
      std::vector<int32_t> levels;
      for (const QuantLevels& block : side.decoded_levels[i]) {
        for (int pos : ZigzagOrder(block.size)) levels.push_back(block.levels[pos]);
      }
      leaves.push_back({{"x", leaf.x},
                        {"y", leaf.y},
                        {"size", leaf.size},
                        {"intra", m.intra},
                        {"mv", {m.dx, m.dy}},
                        {"levels", levels}});
    }
    frames.push_back({{"index", side.frame_index},
                      {"intra_frame", side.intra_frame},
                      {"qp", side.qp},
                      {"leaves", leaves}});
  }
  return {{"width", header.width},
          {"height", header.height},
          {"frame_count", side_info.size()},
          {"frames", frames}};
}

double BitsPerPixel(int64_t bits, int width, int height, size_t frames) {
  return static_cast<double>(bits) /
         (static_cast<double>(width) * height * static_cast<double>(frames));
}

std::vector<RdPoint> ComputeRdCurve(const std::vector<Frame>& frames,
                                    std::vector<int> qps,
                                    const CodecConfig& base,
                                    const RestorerModel* model) {
  if (frames.empty()) ThrowInvalid("empty sequence");
  if (qps.empty()) ThrowInvalid("empty qp list");
  std::sort(qps.begin(), qps.end());
  if (std::adjacent_find(qps.begin(), qps.end()) != qps.end()) {
    ThrowInvalid("duplicate qp in list");
  }
  std::vector<RdPoint> points;
  for (int qp : qps) {
    CodecConfig config = base;
    config.qp = qp;
    const Bitstream stream = EncodeSequence(frames, config);
    const DecodeResult decoded = DecodeSequence(stream);
    RdPoint p;
    p.qp = qp;
    p.bpp = BitsPerPixel(static_cast<int64_t>(stream.bytes.size()) * 8,
                         frames[0].width(), frames[0].height(), frames.size());
    const SeriesMetrics dec = MeasureSeries(frames, decoded.frames);
    p.psnr_decoded = p.psnr_restored = dec.mean_psnr;
    p.ssim_decoded = p.ssim_restored = dec.mean_ssim;
    if (model) {
      const RestoreOutput r = RestoreSequence(decoded, *model, true);
      const SeriesMetrics rest = MeasureSeries(frames, r.frames);
      p.psnr_restored = rest.mean_psnr;
      p.ssim_restored = rest.mean_ssim;
    }
    points.push_back(p);
  }
  return points;
}

std::string RdCurveCsv(const std::vector<RdPoint>& points) {
  std::ostringstream out;
  out << "qp,bpp,psnr_dec,psnr_rest,ssim_dec,ssim_rest\n";
  char line[256];
  for (const RdPoint& p : points) {
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", p.qp,
                  p.bpp, p.psnr_decoded, p.psnr_restored, p.ssim_decoded,
                  p.ssim_restored);
    out << line;
  }
  return out.str();
}

std::vector<std::filesystem::path> ReadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot open dataset " + path.string());
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(in, line)) {
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty() || line[0] == '#') continue;
    out.push_back(path.parent_path() / line);
  }
  if (out.empty()) ThrowInvalid("empty training dataset: " + path.string());
  return out;
}

std::filesystem::path WriteFixtureSet(const std::filesystem::path& dir,
                                      uint64_t seed, int frames) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, FixtureKind> kinds[] = {
      {"patch", FixtureKind::kTranslatingPatch},
      {"checker", FixtureKind::kDeformingChecker}};
  const std::filesystem::path dataset = dir / "dataset.txt";
  std::ofstream out(dataset);
  if (!out) ThrowIo("cannot write " + dataset.string());
  for (const auto& [name, kind] : kinds) {
    WriteSequence(dir / name, MakeFixture(kind, seed, frames), 25.0);
    out << name << "/manifest.txt\n";
  }
  if (!out) ThrowIo("failed writing " + dataset.string());
  return dataset;
}

}  // namespace mvdr
