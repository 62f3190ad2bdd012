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


// Command-line front end: encode, decode, extract, restore, metrics,
// rdcurve, train and fixtures.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input or usage,
// 3 numerical abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvdr/codec.h"
#include "mvdr/error.h"
#include "mvdr/frame.h"
#include "mvdr/harness.h"
#include "mvdr/restorer.h"
#include "mvdr/train.h"

namespace fs = std::filesystem;

namespace mvdr {
namespace {

struct CodecFlags {
  int qp = 32;
  int radius = 8;
  double tau = 6.0;
  int gop = 0;

  void Add(CLI::App* cmd) {
    cmd->add_option("--qp", qp, "Quantization parameter, 0..51")->capture_default_str();
    cmd->add_option("--radius", radius, "Motion search radius, 0..64")->capture_default_str();
    cmd->add_option("--tau", tau, "Split threshold, mean |residual| per pixel")
        ->capture_default_str();
    cmd->add_option("--gop", gop, "Intra period, 0 = first frame only")->capture_default_str();
  }

  CodecConfig Config() const {
    CodecConfig c;
    c.qp = qp;
    c.search_radius = radius;
    c.split_threshold = tau;
    c.gop = gop;
    c.Validate();
    return c;
  }
};

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) ThrowIo("failed writing " + path.string());
}

std::vector<Frame> LoadManifest(const fs::path& path) {
  return LoadSequence(ReadManifest(path));
}

std::vector<int> ParseQpList(const std::string& text) {
  std::vector<int> qps;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t used = 0;
    int qp = 0;
    try {
      qp = std::stoi(item, &used);
    } catch (const std::exception&) {
      ThrowInvalid("bad qp list entry '" + item + "'");
    }
    if (used != item.size()) ThrowInvalid("bad qp list entry '" + item + "'");
    qps.push_back(qp);
  }
  return qps;
}

int RunEncode(const fs::path& manifest, const CodecFlags& flags,
              const fs::path& out) {
  const CodecConfig config = flags.Config();
  const std::vector<Frame> frames = LoadManifest(manifest);
  const Bitstream stream = EncodeSequence(frames, config);
  WriteBitstreamFile(out, stream);
  const int64_t bits = static_cast<int64_t>(stream.bytes.size()) * 8;
  std::printf("bits=%lld bpp=%.6f\n", static_cast<long long>(bits),
              BitsPerPixel(bits, frames[0].width(), frames[0].height(), frames.size()));
  return 0;
}

int RunDecode(const fs::path& in, const fs::path& out) {
  const DecodeResult decoded = DecodeSequence(ReadBitstreamFile(in));
  WriteSequence(out, decoded.frames);
  std::printf("frames=%zu\n", decoded.frames.size());
  return 0;
}

int RunExtract(const fs::path& in, const fs::path& out,
               const std::optional<fs::path>& pred_dir) {
  const DecodeResult decoded = DecodeSequence(ReadBitstreamFile(in));
  WriteText(out, SideInfoToJson(decoded.header, decoded.side_info).dump(1) + "\n");
  if (pred_dir) {
    std::vector<Frame> predictions;
    for (const SideInfo& s : decoded.side_info) predictions.push_back(s.prediction);
    WriteSequence(*pred_dir, predictions);
  }
  return 0;
}

int RunRestore(const fs::path& in, const fs::path& model_path,
               const fs::path& out, bool no_bp,
               const std::optional<fs::path>& reference,
               const std::optional<fs::path>& report_path) {
  const Bitstream stream = ReadBitstreamFile(in);
  const DecodeResult decoded = DecodeSequence(stream);
  const RestorerModel model = LoadModel(model_path);
  const RestoreOutput restored = RestoreSequence(decoded, model, !no_bp);
  WriteSequence(out, restored.frames);
  if (reference) {
    const std::vector<Frame> originals = LoadManifest(*reference);
    if (!originals.empty() && (originals[0].width() != decoded.header.width ||
                               originals[0].height() != decoded.header.height)) {
      ThrowInvalid("dimension mismatch between reference and stream");
    }
    MetricsReport report;
    report.frame_count = static_cast<int>(decoded.frames.size());
    report.series.emplace_back("decoded", MeasureSeries(originals, decoded.frames));
    report.series.emplace_back("restored", MeasureSeries(originals, restored.frames));
    report.bits = static_cast<int64_t>(stream.bytes.size()) * 8;
    report.bpp = BitsPerPixel(report.bits, decoded.header.width,
                              decoded.header.height, decoded.frames.size());
    const std::string json = report.ToJson().dump(1) + "\n";
    if (report_path) {
      WriteText(*report_path, json);
    } else {
      std::cout << json;
    }
  }
  return 0;
}

int RunMetrics(const fs::path& reference, const fs::path& test,
               const fs::path& out) {
  const std::vector<Frame> ref = LoadManifest(reference);
  const std::vector<Frame> tst = LoadManifest(test);
  if (!ref.empty() && !tst.empty() &&
      (ref[0].width() != tst[0].width() || ref[0].height() != tst[0].height())) {
    ThrowInvalid("dimension mismatch between reference and test");
  }
  MetricsReport report;
  report.frame_count = static_cast<int>(ref.size());
  report.series.emplace_back("test", MeasureSeries(ref, tst));
  WriteText(out, report.ToJson().dump(1) + "\n");
  return 0;
}

int RunRdCurve(const fs::path& manifest, const std::string& qps,
               const std::optional<fs::path>& model_path,
               const CodecFlags& flags, const fs::path& out) {
  const CodecConfig base = flags.Config();
  const std::vector<int> qp_list = ParseQpList(qps);
  for (int qp : qp_list) {
    CodecConfig c = base;
    c.qp = qp;
    c.Validate();
  }
  std::optional<RestorerModel> model;
  if (model_path) model = LoadModel(*model_path);
  const std::vector<RdPoint> points = ComputeRdCurve(
      LoadManifest(manifest), qp_list, base, model ? &*model : nullptr);
  WriteText(out, RdCurveCsv(points));
  return 0;
}

int RunTrain(const fs::path& dataset, const CodecFlags& flags,
             const TrainConfig& config, const RestorerShape& shape,
             const fs::path& out, std::optional<fs::path> loss_path,
             bool verbose) {
  config.Validate();
  shape.Validate();
  const CodecConfig codec = flags.Config();
  std::vector<std::vector<Frame>> originals;
  for (const fs::path& manifest : ReadDataset(dataset)) {
    originals.push_back(LoadManifest(manifest));
  }
  const std::vector<TrainingSample> samples =
      BuildTrainingSamples(originals, codec, shape.window_radius);
  auto progress = [&](int it, double loss) {
    if (verbose && (it % 100 == 0 || it + 1 == config.iterations)) {
      std::fprintf(stderr, "iteration %d loss %.6f\n", it, loss);
    }
  };
  const TrainResult result = TrainRestorer(samples, shape, config, progress);
  SaveModel(out, result.model);
  std::string csv = "iteration,loss\n";
  char line[64];
  for (size_t i = 0; i < result.loss_trace.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", i, result.loss_trace[i]);
    csv += line;
  }
  if (!loss_path) loss_path = fs::path(out.string() + ".loss.csv");
  WriteText(*loss_path, csv);
  std::printf("samples=%zu parameters=%zu final_loss=%.6f\n", samples.size(),
              result.model.parameter_count(),
              result.loss_trace.empty() ? 0.0 : result.loss_trace.back());
  return 0;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return 1;
    case ErrorKind::kInvalidInput:
      return 2;
    case ErrorKind::kNumerical:
      return 3;
  }
  return 1;
}

int Main(int argc, char** argv) {
  CLI::App app{"Compressed-video restoration toolkit with back projection"};
  app.require_subcommand(1);

  fs::path input, output, model_path, reference, test, dataset;
  std::optional<fs::path> pred_dir, report_path, loss_path;
  std::optional<fs::path> opt_reference, opt_model;
  bool no_bp = false, verbose = false;
  std::string qps = "8,16,24,32,40";
  CodecFlags codec_flags;
  TrainConfig train;
  RestorerShape shape;
  uint64_t fixture_seed = 1;
  int fixture_frames = 10;

  auto* encode = app.add_subcommand("encode", "Encode a manifest into a .mvc stream");
  encode->add_option("manifest", input, "Sequence manifest")->required();
  encode->add_option("-o,--output", output, "Output .mvc file")->required();
  codec_flags.Add(encode);

  auto* decode = app.add_subcommand("decode", "Decode a stream to PGM frames");
  decode->add_option("stream", input, "Input .mvc file")->required();
  decode->add_option("-o,--output", output, "Output directory")->required();

  auto* extract = app.add_subcommand("extract", "Dump decoder side information");
  extract->add_option("stream", input, "Input .mvc file")->required();
  extract->add_option("-o,--output", output, "Output JSON file")->required();
  extract->add_option("--pred-dir", pred_dir, "Directory for prediction frames");

  auto* restore = app.add_subcommand("restore", "Restore a decoded stream");
  restore->add_option("stream", input, "Input .mvc file")->required();
  restore->add_option("--model", model_path, "Model file")->required();
  restore->add_option("-o,--output", output, "Output directory")->required();
  restore->add_flag("--no-backprojection", no_bp, "Skip back projection");
  restore->add_option("--reference", opt_reference, "Original manifest for metrics");
  restore->add_option("--report", report_path, "Metrics JSON path (default stdout)");

  auto* metrics = app.add_subcommand("metrics", "Compare two sequences");
  metrics->add_option("--reference", reference, "Reference manifest")->required();
  metrics->add_option("--test", test, "Test manifest")->required();
  metrics->add_option("-o,--output", output, "Output JSON report")->required();

  auto* rdcurve = app.add_subcommand("rdcurve", "Sweep qp and report rate-distortion");
  rdcurve->add_option("manifest", input, "Sequence manifest")->required();
  rdcurve->add_option("--qps", qps, "Comma-separated qp list")->capture_default_str();
  rdcurve->add_option("--model", opt_model, "Optional restorer model");
  rdcurve->add_option("-o,--output", output, "Output CSV")->required();
  codec_flags.Add(rdcurve);

  auto* trainer = app.add_subcommand("train", "Train a restorer on a dataset");
  trainer->add_option("dataset", dataset, "Dataset file listing manifests")->required();
  trainer->add_option("-o,--output", output, "Output model file")->required();
  trainer->add_option("--loss-csv", loss_path, "Loss trace (default <output>.loss.csv)");
  trainer->add_option("--iters", train.iterations, "Iterations")->capture_default_str();
  trainer->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  trainer->add_option("--lr", train.learning_rate, "Adam learning rate")->capture_default_str();
  trainer->add_option("--batch", train.batch_size, "Batch size")->capture_default_str();
  trainer->add_option("--crop", train.crop, "Training crop size")->capture_default_str();
  trainer->add_option("--window-radius", shape.window_radius, "Frames on each side")
      ->capture_default_str();
  trainer->add_option("--channels", shape.channels, "Feature channels")->capture_default_str();
  trainer->add_flag("-v,--verbose", verbose, "Print progress to stderr");
  codec_flags.Add(trainer);

  auto* fixtures = app.add_subcommand("fixtures", "Write the synthetic fixture sequences");
  fixtures->add_option("-o,--output", output, "Output directory")->required();
  fixtures->add_option("--seed", fixture_seed, "Generator seed")->capture_default_str();
  fixtures->add_option("--frames", fixture_frames, "Frames per sequence")
      ->capture_default_str();

  // Training defaults to qp 36, everything else to 32.
  codec_flags.qp = 32;
  trainer->preparse_callback([&](size_t) { codec_flags.qp = 36; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*encode) return RunEncode(input, codec_flags, output);
    if (*decode) return RunDecode(input, output);
    if (*extract) return RunExtract(input, output, pred_dir);
    if (*restore) {
      return RunRestore(input, model_path, output, no_bp, opt_reference, report_path);
    }
    if (*metrics) return RunMetrics(reference, test, output);
    if (*rdcurve) return RunRdCurve(input, qps, opt_model, codec_flags, output);
    if (*trainer) {
      return RunTrain(dataset, codec_flags, train, shape, output, loss_path, verbose);
    }
    if (*fixtures) {
      if (fixture_frames < 1) ThrowInvalid("--frames must be positive");
      std::printf("%s\n", WriteFixtureSet(output, fixture_seed, fixture_frames).c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ExitCodeFor(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "error: out of memory\n");
    return 1;
  }
  return 2;
}

}  // namespace
}  // namespace mvdr

int main(int argc, char** argv) { return mvdr::Main(argc, argv); }
