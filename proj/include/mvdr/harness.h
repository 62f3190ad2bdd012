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

// Evaluation pipeline shared by the command-line tool and the acceptance
// suite: training-set construction, windowed restoration, metrics reports
// and rate-distortion sweeps.

#ifndef MVDR_HARNESS_H_
#define MVDR_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mvdr/backprojection.h"
#include "mvdr/codec.h"
#include "mvdr/frame.h"
#include "mvdr/restorer.h"
#include "mvdr/train.h"

namespace mvdr {

// Restorer inputs for every frame of a decoded stream, windows padded by
// repeating the first and last frames.
std::vector<RestorerInput> PrepareSequenceInputs(const DecodeResult& decoded,
                                                 int window_radius);

// Encodes and decodes each original sequence at `config` and pairs every
// decoded window with its original center frame.
std::vector<TrainingSample> BuildTrainingSamples(
    const std::vector<std::vector<Frame>>& originals, const CodecConfig& config,
    int window_radius);

struct RestoreOutput {
  std::vector<Plane> raw;       // unrounded restorer output
  std::vector<Frame> frames;    // final 8-bit frames
  std::vector<ProjectionReport> reports;  // empty without back projection
};

RestoreOutput RestoreSequence(const DecodeResult& decoded,
                              const RestorerModel& model, bool back_projection);

struct SeriesMetrics {
  std::vector<double> psnr;
  std::vector<double> ssim;
  double mean_psnr = 0;
  double mean_ssim = 0;
};

SeriesMetrics MeasureSeries(const std::vector<Frame>& reference,
                            const std::vector<Frame>& test);

struct MetricsReport {
  int frame_count = 0;
  std::vector<std::pair<std::string, SeriesMetrics>> series;
  int64_t bits = -1;  // negative when no stream is involved
  double bpp = 0;

  nlohmann::json ToJson() const;
};

struct RdPoint {
  int qp = 0;
  double bpp = 0;
  double psnr_decoded = 0;
  double psnr_restored = 0;
  double ssim_decoded = 0;
  double ssim_restored = 0;
};

// Without a model the restored columns repeat the decoded ones.
std::vector<RdPoint> ComputeRdCurve(const std::vector<Frame>& frames,
                                    std::vector<int> qps,
                                    const CodecConfig& base,
                                    const RestorerModel* model);

std::string RdCurveCsv(const std::vector<RdPoint>& points);

// frames -> {qp, leaves: [{x, y, size, intra, mv: [dx, dy], levels}]} where
// levels concatenates each transform block's zigzag scan in Z order.
nlohmann::json SideInfoToJson(const StreamHeader& header,
                              const std::vector<SideInfo>& side_info);

double BitsPerPixel(int64_t bits, int width, int height, size_t frames);

// One sequence-manifest path per line, relative to the dataset file. Blank
// lines and lines starting with '#' are skipped.
std::vector<std::filesystem::path> ReadDataset(const std::filesystem::path& path);

// Writes the two bundled fixture sequences plus a dataset file listing them
// and returns the dataset path.
std::filesystem::path WriteFixtureSet(const std::filesystem::path& dir,
                                      uint64_t seed, int frames);

}  // namespace mvdr

#endif  // MVDR_HARNESS_H_
