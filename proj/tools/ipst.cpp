// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

// ipst: per-pair photorealistic style transfer from the command line.
//
//   ipst transfer --content c.png --style s.png --out o.png
//   ipst sequence --frames frames/ --style s.png --out stylized/
//   ipst infer    --params o.ipstnet --frames frames/ --out stylized/
//   ipst evaluate --content c.png --style s.png --output o.png
//   ipst bench    --resolutions fhd,2k,4k,8k
//
// Exit status: 0 success, 1 usage error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ipst/image_io.hpp"
#include "ipst/pipeline.hpp"
#include "ipst/stylenet.hpp"
#include "ipst/vgg.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct WeightOptions {
  std::string vgg_path;
  std::optional<std::uint64_t> synthetic_seed;
};

void add_weight_options(CLI::App& cmd, WeightOptions& w) {
  cmd.add_option("--vgg", w.vgg_path, "IPSTVGG1 weight file (default: $IPST_VGG_WEIGHTS)");
  cmd.add_option("--synthetic-vgg", w.synthetic_seed,
                 "Use deterministic synthetic VGG weights from SEED instead of a file (testing only)");
}

void add_training_options(CLI::App& cmd, ipst::TransferConfig& c, WeightOptions& w) {
  cmd.add_option("--seed", c.seed, "StyleNet initialization seed")->capture_default_str();
  cmd.add_option("--lr", c.lr, "Adam learning rate")->capture_default_str();
  cmd.add_option("--max-epochs", c.max_epochs, "Hard cap on training epochs")->capture_default_str();
  cmd.add_option("--patience", c.patience_init, "Early-stopping patience")->capture_default_str();
  cmd.add_option("--threshold", c.improvement_threshold, "Early-stopping improvement threshold")
      ->capture_default_str();
  cmd.add_option("--sd-height", c.sd_height, "Working height of the transform and losses")
      ->capture_default_str();
  cmd.add_option("--channel-multiplier", c.channel_multiplier, "StyleNet hidden-width multiplier")
      ->capture_default_str();
  cmd.add_flag("--no-adaptive", c.disable_adaptive_alpha,
               "Fix alpha at 1 and disable early stopping (runs --max-epochs epochs)");
  cmd.add_flag("--no-shortcut", c.disable_shortcut, "Drop the input shortcut (output = mask only)");
  cmd.add_flag("--strict-stopping", c.strict_prose_stopping,
               "Count an epoch as improving only if the loss ratio drops by the threshold");
  cmd.add_flag("--total-as-initial", c.total_as_initial,
               "Use the first-epoch total loss as the early-stopping reference");
  add_weight_options(cmd, w);
}

ipst::VggWeights load_weights(const WeightOptions& w, ipst::TransferConfig config = {}) {
  if (w.synthetic_seed) {
    spdlog::warn("using synthetic VGG weights (seed {}); results are not photorealistic", *w.synthetic_seed);
    return ipst::make_synthetic_vgg_weights(*w.synthetic_seed);
  }
  config.vgg_weights_path = w.vgg_path;
  const auto path = ipst::resolve_vgg_path(config);
  spdlog::info("loading VGG weights from {}", path.string());
  return ipst::load_vgg_weights(path);
}

ipst::EpochObserver epoch_logger(bool quiet) {
  if (quiet) return {};
  return [](const ipst::LossBreakdown& row) {
    spdlog::info("epoch {:4d}  content {:.6g}  style {:.6g}  alpha {:.4f}  total {:.6g}  patience {}",
                 row.epoch, row.content_loss, row.style_loss, row.alpha, row.total_loss, row.patience);
  };
}

const char* stop_reason_name(ipst::StopReason reason) {
  return reason == ipst::StopReason::patience_exhausted ? "patience exhausted" : "epoch cap";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ipst - instant photorealistic style transfer"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

  // transfer
  ipst::TransferConfig transfer_config;
  WeightOptions transfer_weights;
  std::string content_path, style_path, out_path;
  bool quiet = false;
  auto* transfer = app.add_subcommand("transfer", "Train on one content/style pair and write the result");
  transfer->add_option("--content", content_path, "Content image")->required()->check(CLI::ExistingFile);
  transfer->add_option("--style", style_path, "Style image")->required()->check(CLI::ExistingFile);
  transfer->add_option("--out", out_path, "Output image (.png/.jpg); .history.csv and .ipstnet written beside it")
      ->required();
  transfer->add_flag("--quiet", quiet, "Do not log every epoch");
  add_training_options(*transfer, transfer_config, transfer_weights);

  // sequence
  ipst::TransferConfig sequence_config;
  WeightOptions sequence_weights;
  std::string frames_dir, seq_style, seq_out;
  unsigned workers = 0;
  auto* sequence = app.add_subcommand("sequence", "Train on the first frame, stylize every frame");
  sequence->add_option("--frames", frames_dir, "Directory of frames (lexicographic order)")
      ->required()->check(CLI::ExistingDirectory);
  sequence->add_option("--style", seq_style, "Style image")->required()->check(CLI::ExistingFile);
  sequence->add_option("--out", seq_out, "Output directory")->required();
  sequence->add_option("--workers", workers, "Inference threads (0 = all cores)")->capture_default_str();
  sequence->add_flag("--quiet", quiet, "Do not log every epoch");
  add_training_options(*sequence, sequence_config, sequence_weights);

  // infer
  std::string params_path, infer_frames, infer_out;
  ipst::StyleNetOptions infer_options;
  bool infer_no_shortcut = false;
  auto* infer = app.add_subcommand("infer", "Stylize frames with saved StyleNet parameters (no VGG needed)");
  infer->add_option("--params", params_path, "IPSTNET1 parameter file")->required()->check(CLI::ExistingFile);
  infer->add_option("--frames", infer_frames, "Directory of frames")->required()->check(CLI::ExistingDirectory);
  infer->add_option("--out", infer_out, "Output directory")->required();
  infer->add_option("--workers", workers, "Inference threads (0 = all cores)")->capture_default_str();
  infer->add_option("--sd-height", infer_options.sd_height, "Working height used at training time")
      ->capture_default_str();
  infer->add_flag("--no-shortcut", infer_no_shortcut, "Parameters were trained without the shortcut");

  // evaluate
  WeightOptions eval_weights;
  std::string eval_content, eval_style, eval_output, eval_dir, eval_csv, eval_id = "pair";
  std::size_t eval_sd_height = ipst::kDefaultSdHeight;
  auto* evaluate = app.add_subcommand("evaluate", "Score outputs: content proxy, style similarity, F1");
  auto* eval_c = evaluate->add_option("--content", eval_content, "Content image")->check(CLI::ExistingFile);
  auto* eval_s = evaluate->add_option("--style", eval_style, "Style image")->check(CLI::ExistingFile);
  auto* eval_o = evaluate->add_option("--output", eval_output, "Stylized image")->check(CLI::ExistingFile);
  auto* eval_d = evaluate->add_option("--dir", eval_dir, "Directory of <id>_content/_style/_output images")
                     ->check(CLI::ExistingDirectory);
  eval_c->needs(eval_s, eval_o);
  eval_s->needs(eval_c, eval_o);
  eval_o->needs(eval_c, eval_s);
  eval_d->excludes(eval_c, eval_s, eval_o);
  evaluate->add_option("--id", eval_id, "Pair id for single-pair mode")->capture_default_str();
  evaluate->add_option("--csv", eval_csv, "Write the CSV here instead of stdout");
  evaluate->add_option("--sd-height", eval_sd_height, "Working height of the style features")
      ->capture_default_str();
  add_weight_options(*evaluate, eval_weights);

  // bench
  ipst::TransferConfig bench_config;
  WeightOptions bench_weights;
  std::vector<std::string> resolutions{"fhd", "2k", "4k", "8k"};
  bool skip_8k = false;
  ipst::BenchOptions bench_options;
  double memory_limit_gb = 0.0;
  std::string bench_csv;
  auto* bench = app.add_subcommand("bench", "Time training and inference on synthetic scenes");
  bench->add_option("--resolutions", resolutions, "fhd, 2k, 4k, 8k or WxH")
      ->delimiter(',')->capture_default_str();
  bench->add_flag("--skip-8k", skip_8k, "Drop the 8K row");
  bench->add_option("--repeats", bench_options.infer_repeats, "Inference repetitions averaged per row")
      ->capture_default_str();
  bench->add_option("--memory-limit-gb", memory_limit_gb,
                    "Engine allocation limit; larger requests become OOM rows (default: 80% of RAM)");
  bench->add_option("--csv", bench_csv, "Also write the rows as CSV");
  add_training_options(*bench, bench_config, bench_weights);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  // Logs go to stderr so CSV and table output on stdout stay machine-readable.
  spdlog::set_default_logger(spdlog::stderr_color_mt("ipst"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*transfer) {
      transfer_config.validate();
      const auto weights = load_weights(transfer_weights, transfer_config);
      const auto outcome = ipst::cmd_transfer(content_path, style_path, out_path, transfer_config, weights,
                                              epoch_logger(quiet));
      spdlog::info("trained {} epochs in {:.2f} s ({})", outcome.training.history.size(),
                   outcome.train_seconds, stop_reason_name(outcome.training.stop_reason));
      spdlog::info("wrote {}, {}, {}", outcome.files.image.string(), outcome.files.history.string(),
                   outcome.files.params.string());
    } else if (*sequence) {
      sequence_config.validate();
      const auto weights = load_weights(sequence_weights, sequence_config);
      const auto outcome = ipst::cmd_sequence(frames_dir, seq_style, seq_out, sequence_config, weights,
                                              workers, epoch_logger(quiet));
      spdlog::info("trained {} epochs in {:.2f} s; stylized {} frames at {:.2f} ms/frame",
                   outcome.training.history.size(), outcome.train_seconds,
                   outcome.inference.outputs.size(), 1000.0 * outcome.inference.seconds_per_frame);
    } else if (*infer) {
      infer_options.shortcut = !infer_no_shortcut;
      const auto outcome = ipst::cmd_infer(params_path, infer_frames, infer_out, infer_options, workers);
      spdlog::info("stylized {} frames at {:.2f} ms/frame", outcome.outputs.size(),
                   1000.0 * outcome.seconds_per_frame);
    } else if (*evaluate) {
      if (eval_dir.empty() && eval_content.empty()) {
        throw std::invalid_argument("evaluate needs --content/--style/--output or --dir");
      }
      const auto weights = load_weights(eval_weights);
      std::vector<ipst::ScoreRow> rows;
      if (!eval_dir.empty()) {
        rows = ipst::evaluate_directory(eval_dir, weights, eval_sd_height);
      } else {
        rows.push_back(ipst::cmd_evaluate(eval_id, eval_content, eval_style, eval_output, weights, eval_sd_height));
      }
      const bool mean_row = rows.size() > 1;
      if (eval_csv.empty()) {
        ipst::write_scores_csv(rows, std::cout, mean_row);
      } else {
        std::ofstream out(eval_csv);
        if (!out) throw std::runtime_error("cannot write " + eval_csv);
        ipst::write_scores_csv(rows, out, mean_row);
      }
    } else if (*bench) {
      bench_config.validate();
      std::vector<ipst::Resolution> parsed;
      for (const auto& r : resolutions) {
        auto res = ipst::parse_resolution(r);
        if (skip_8k && res.label == "8K") continue;
        parsed.push_back(res);
      }
      bench_options.memory_limit_bytes = memory_limit_gb > 0.0
                                             ? static_cast<std::size_t>(memory_limit_gb * 1e9)
                                             : ipst::default_memory_limit();
      const auto weights = load_weights(bench_weights, bench_config);
      const auto rows = ipst::cmd_bench(parsed, bench_config, weights, bench_options);
      ipst::write_bench_table(rows, std::cout);
      if (!bench_csv.empty()) {
        std::ofstream out(bench_csv);
        if (!out) throw std::runtime_error("cannot write " + bench_csv);
        ipst::write_bench_csv(rows, out);
      }
    }
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return 0;
}
