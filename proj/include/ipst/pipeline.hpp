// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ipst/config.hpp"
#include "ipst/metrics.hpp"
#include "ipst/stylenet.hpp"
#include "ipst/train.hpp"
#include "ipst/vgg.hpp"

namespace ipst {

namespace fs = std::filesystem;

/// config.vgg_weights_path, else $IPST_VGG_WEIGHTS. Throws if neither is set.
fs::path resolve_vgg_path(const TransferConfig& config);

StyleNetOptions net_options(const TransferConfig& config);

/// Image files of a directory in lexicographic path order.
struct FrameSequence {
  std::vector<fs::path> frames;

  /// Throws std::invalid_argument if the directory holds no images.
  static FrameSequence from_directory(const fs::path& dir);

  /// Decodes every frame once and throws std::invalid_argument listing the
  /// frames whose size differs from the first. Returns that size.
  Shape validate_dimensions() const;
};

struct TransferArtifacts {
  fs::path image;
  fs::path history;  // <stem>.history.csv beside the image
  fs::path params;   // <stem>.ipstnet beside the image
};

TransferArtifacts transfer_artifacts(const fs::path& output);

struct TransferOutcome {
  TrainResult training;
  TransferArtifacts files;
  double train_seconds = 0.0;
};

TransferOutcome cmd_transfer(const fs::path& content, const fs::path& style, const fs::path& output,
                             const TransferConfig& config, const VggWeights& weights,
                             const EpochObserver& observer = {});

struct InferOutcome {
  std::vector<fs::path> outputs;
  /// Mean wall time of stylenet_forward per frame, excluding decode/encode.
  double seconds_per_frame = 0.0;
};

/// Applies frozen params to every frame; outputs keep the input file names.
/// workers == 0 uses the hardware concurrency.
InferOutcome infer_frames(const FrameSequence& frames, const StyleNetParams& params,
                          const fs::path& out_dir, const StyleNetOptions& options,
                          unsigned workers = 0);

struct SequenceOutcome {
  TrainResult training;
  double train_seconds = 0.0;
  InferOutcome inference;
  fs::path params;   // out_dir/params.ipstnet
  fs::path history;  // out_dir/history.csv
};

/// Trains on the first frame, then stylizes all frames with the frozen net.
SequenceOutcome cmd_sequence(const fs::path& frames_dir, const fs::path& style,
                             const fs::path& out_dir, const TransferConfig& config,
                             const VggWeights& weights, unsigned workers = 0,
                             const EpochObserver& observer = {});

InferOutcome cmd_infer(const fs::path& params, const fs::path& frames_dir, const fs::path& out_dir,
                       const StyleNetOptions& options = {}, unsigned workers = 0);

struct ScoreRow {
  std::string pair_id;
  ScoreReport report;
};

ScoreRow cmd_evaluate(const std::string& pair_id, const fs::path& content, const fs::path& style,
                      const fs::path& output, const VggWeights& weights,
                      std::size_t sd_height = kDefaultSdHeight);

/// Scores every <id>_content / <id>_style / <id>_output triple in `dir`.
std::vector<ScoreRow> evaluate_directory(const fs::path& dir, const VggWeights& weights,
                                         std::size_t sd_height = kDefaultSdHeight);

/// Header pair_id,content_sim_proxy,style_sim,f1; with `mean_row`, a final
/// "mean" row averages the columns.
void write_scores_csv(const std::vector<ScoreRow>& rows, std::ostream& out, bool mean_row = false);

struct Resolution {
  std::string label;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// fhd, 2k, 4k, 8k, or WxH.
Resolution parse_resolution(const std::string& text);

struct BenchOptions {
  int infer_repeats = 3;
  /// 0 keeps the current engine limit.
  std::size_t memory_limit_bytes = 0;
};

struct BenchRow {
  Resolution resolution;
  bool train_oom = false;
  double train_seconds = 0.0;
  int train_epochs = 0;
  std::size_t train_peak_bytes = 0;
  bool infer_oom = false;
  double infer_ms = 0.0;
  std::size_t infer_peak_bytes = 0;
  std::size_t parameters = 0;
};

/// Times training (config.max_epochs caps the run) and per-frame inference
/// on synthetic scenes at each resolution. Allocation failures become OOM
/// rows. Memory is the engine's peak tracked allocation per phase.
std::vector<BenchRow> cmd_bench(const std::vector<Resolution>& resolutions,
                                const TransferConfig& config, const VggWeights& weights,
                                const BenchOptions& options = {});

/// One row per resolution, "<time> / <memory>" cells or OOM.
void write_bench_table(const std::vector<BenchRow>& rows, std::ostream& out);
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

/// 80% of the memory this process can use: physical RAM, capped by the cgroup
/// limit and by what the system currently reports as available.
std::size_t default_memory_limit();

}  // namespace ipst
