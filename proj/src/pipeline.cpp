// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <new>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "ipst/image_io.hpp"
#include "ipst/memory.hpp"
#include "ipst/synthetic.hpp"

namespace ipst {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_directory(file.parent_path());
}

unsigned resolve_workers(unsigned workers, std::size_t jobs) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(jobs, 1)));
}

std::string format_bytes(std::size_t bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f GB", static_cast<double>(bytes) / 1e9);
  return buf;
}

std::string format_count(std::size_t n) {
  std::string digits = std::to_string(n);
  for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) digits.insert(static_cast<std::size_t>(i), ",");
  return digits;
}

}  // namespace

fs::path resolve_vgg_path(const TransferConfig& config) {
  if (!config.vgg_weights_path.empty()) return config.vgg_weights_path;
  if (const char* env = std::getenv("IPST_VGG_WEIGHTS"); env != nullptr && *env != '\0') return env;
  throw std::invalid_argument(
      "no VGG weights: pass --vgg PATH, set IPST_VGG_WEIGHTS, or use --synthetic-vgg SEED");
}

StyleNetOptions net_options(const TransferConfig& config) {
  return StyleNetOptions{config.sd_height, !config.disable_shortcut};
}

FrameSequence FrameSequence::from_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir.string());
  FrameSequence seq;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_path(entry.path())) seq.frames.push_back(entry.path());
  }
  if (seq.frames.empty()) throw std::invalid_argument("no .png/.jpg frames in " + dir.string());
  std::sort(seq.frames.begin(), seq.frames.end());
  return seq;
}

Shape FrameSequence::validate_dimensions() const {
  if (frames.empty()) throw std::invalid_argument("empty frame sequence");
  const Shape first = load_image(frames.front()).shape();
  std::vector<std::string> offenders;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const Shape s = load_image(frames[i]).shape();
    if (!(s == first)) offenders.push_back(frames[i].filename().string() + " " + s.to_string());
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "frames differ in size from " << frames.front().filename().string() << " "
        << first.to_string() << ":";
    for (const auto& o : offenders) msg << " " << o;
    throw std::invalid_argument(msg.str());
  }
  return first;
}

TransferArtifacts transfer_artifacts(const fs::path& output) {
  const fs::path dir = output.parent_path();
  const std::string stem = output.stem().string();
  return {output, dir / (stem + ".history.csv"), dir / (stem + ".ipstnet")};
}

TransferOutcome cmd_transfer(const fs::path& content, const fs::path& style, const fs::path& output,
                             const TransferConfig& config, const VggWeights& weights,
                             const EpochObserver& observer) {
  if (!is_image_path(output)) {
    throw std::invalid_argument("output must end in .png, .jpg or .jpeg: " + output.string());
  }
  const Tensor4 content_image = load_image(content);
  const Tensor4 style_image = load_image(style);

  TransferOutcome outcome;
  outcome.files = transfer_artifacts(output);
  const auto start = Clock::now();
  outcome.training = train(content_image, style_image, weights, config, observer);
  outcome.train_seconds = seconds_since(start);

  const Tensor4 stylized = stylenet_forward(content_image, outcome.training.params, net_options(config));
  ensure_parent(output);
  save_image(stylized, outcome.files.image);
  save_history_csv(outcome.training.history, outcome.files.history);
  save_params(outcome.training.params, outcome.files.params);
  return outcome;
}

InferOutcome infer_frames(const FrameSequence& frames, const StyleNetParams& params,
                          const fs::path& out_dir, const StyleNetOptions& options,
                          unsigned workers) {
  ensure_directory(out_dir);
  InferOutcome outcome;
  outcome.outputs.resize(frames.frames.size());
  for (std::size_t i = 0; i < frames.frames.size(); ++i) {
    outcome.outputs[i] = out_dir / frames.frames[i].filename();
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<double> forward_seconds(frames.frames.size(), 0.0);

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= frames.frames.size() || failed.load()) return;
      try {
        const Tensor4 frame = load_image(frames.frames[i]);
        const auto start = Clock::now();
        const Tensor4 stylized = stylenet_forward(frame, params, options);
        forward_seconds[i] = seconds_since(start);
        save_image(stylized, outcome.outputs[i]);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const unsigned count = resolve_workers(workers, frames.frames.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(work);
  }
  if (first_error) std::rethrow_exception(first_error);

  double total = 0.0;
  for (const double s : forward_seconds) total += s;
  outcome.seconds_per_frame = total / static_cast<double>(frames.frames.size());
  return outcome;
}

SequenceOutcome cmd_sequence(const fs::path& frames_dir, const fs::path& style,
                             const fs::path& out_dir, const TransferConfig& config,
                             const VggWeights& weights, unsigned workers,
                             const EpochObserver& observer) {
  const FrameSequence seq = FrameSequence::from_directory(frames_dir);
  seq.validate_dimensions();
  ensure_directory(out_dir);

  SequenceOutcome outcome;
  {
    const Tensor4 first = load_image(seq.frames.front());
    const Tensor4 style_image = load_image(style);
    const auto start = Clock::now();
    outcome.training = train(first, style_image, weights, config, observer);
    outcome.train_seconds = seconds_since(start);
  }
  outcome.params = out_dir / "params.ipstnet";
  outcome.history = out_dir / "history.csv";
  save_params(outcome.training.params, outcome.params);
  save_history_csv(outcome.training.history, outcome.history);
  outcome.inference = infer_frames(seq, outcome.training.params, out_dir, net_options(config), workers);
  return outcome;
}

InferOutcome cmd_infer(const fs::path& params, const fs::path& frames_dir, const fs::path& out_dir,
                       const StyleNetOptions& options, unsigned workers) {
  const StyleNetParams net = load_params(params);
  const FrameSequence seq = FrameSequence::from_directory(frames_dir);
  seq.validate_dimensions();
  return infer_frames(seq, net, out_dir, options, workers);
}

ScoreRow cmd_evaluate(const std::string& pair_id, const fs::path& content, const fs::path& style,
                      const fs::path& output, const VggWeights& weights, std::size_t sd_height) {
  const Tensor4 c = load_image(content);
  const Tensor4 s = load_image(style);
  const Tensor4 o = load_image(output);
  return {pair_id, score(c, s, o, weights, sd_height)};
}

std::vector<ScoreRow> evaluate_directory(const fs::path& dir, const VggWeights& weights,
                                         std::size_t sd_height) {
  if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir.string());
  struct Triple {
    fs::path content, style, output;
  };
  std::map<std::string, Triple> triples;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_path(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    for (const auto& [suffix, member] :
         {std::pair{std::string("_content"), &Triple::content}, std::pair{std::string("_style"), &Triple::style},
          std::pair{std::string("_output"), &Triple::output}}) {
      if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
        triples[stem.substr(0, stem.size() - suffix.size())].*member = entry.path();
      }
    }
  }
  std::vector<ScoreRow> rows;
  for (const auto& [id, t] : triples) {
    if (t.content.empty() || t.style.empty() || t.output.empty()) {
      spdlog::warn("skipping pair '{}': needs {}_content, {}_style and {}_output images", id, id, id, id);
      continue;
    }
    rows.push_back(cmd_evaluate(id, t.content, t.style, t.output, weights, sd_height));
  }
  if (rows.empty()) throw std::invalid_argument("no complete <id>_content/_style/_output triples in " + dir.string());
  return rows;
}

void write_scores_csv(const std::vector<ScoreRow>& rows, std::ostream& out, bool mean_row) {
  out << "pair_id,content_sim_proxy,style_sim,f1\n";
  char line[256];
  ScoreReport sum;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, ",%.6f,%.6f,%.6f\n", row.report.content_sim, row.report.style_sim,
                  row.report.f1);
    out << row.pair_id << line;
    sum.content_sim += row.report.content_sim;
    sum.style_sim += row.report.style_sim;
    sum.f1 += row.report.f1;
  }
  if (mean_row && !rows.empty()) {
    const double n = static_cast<double>(rows.size());
    std::snprintf(line, sizeof line, "mean,%.6f,%.6f,%.6f\n", sum.content_sim / n, sum.style_sim / n,
                  sum.f1 / n);
    out << line;
  }
}

Resolution parse_resolution(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "fhd" || lower == "1080p") return {"FHD", 1920, 1080};
  if (lower == "2k" || lower == "qhd") return {"2K", 2560, 1440};
  if (lower == "4k" || lower == "uhd") return {"4K", 3840, 2160};
  if (lower == "8k") return {"8K", 7680, 4320};
  const auto x = lower.find('x');
  if (x != std::string::npos && x > 0 && x + 1 < lower.size()) {
    try {
      std::size_t used_w = 0, used_h = 0;
      const unsigned long w = std::stoul(lower.substr(0, x), &used_w);
      const unsigned long h = std::stoul(lower.substr(x + 1), &used_h);
      if (used_w == x && used_h == lower.size() - x - 1 && w >= kMinFeatureInput && h >= kMinFeatureInput) {
        return {std::to_string(w) + "x" + std::to_string(h), w, h};
      }
    } catch (const std::exception&) {
      // fall through to the error below
    }
  }
  throw std::invalid_argument("unknown resolution '" + text + "' (use fhd, 2k, 4k, 8k or WxH, min 32x32)");
}

std::size_t default_memory_limit() {
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page_size = sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page_size <= 0) return 0;
  double physical = static_cast<double>(pages) * static_cast<double>(page_size);
  // A container's cgroup limit may be far below the host's RAM.
  for (const char* path : {"/sys/fs/cgroup/memory.max", "/sys/fs/cgroup/memory/memory.limit_in_bytes"}) {
    std::ifstream in(path);
    double cap = 0.0;
    if (in >> cap && cap > 0.0) physical = std::min(physical, cap);
  }
  // Other processes may already hold part of it.
  std::ifstream meminfo("/proc/meminfo");
  for (std::string key; meminfo >> key;) {
    double kib = 0.0;
    if (key == "MemAvailable:" && meminfo >> kib) {
      physical = std::min(physical, kib * 1024.0 + static_cast<double>(memory::current_bytes()));
      break;
    }
    meminfo.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  }
  return static_cast<std::size_t>(physical * 0.8);
}

std::vector<BenchRow> cmd_bench(const std::vector<Resolution>& resolutions,
                                const TransferConfig& config, const VggWeights& weights,
                                const BenchOptions& options) {
  const std::size_t previous_limit = memory::limit();
  if (options.memory_limit_bytes != 0) memory::set_limit(options.memory_limit_bytes);
  std::vector<BenchRow> rows;
  try {
    for (const auto& res : resolutions) {
      BenchRow row;
      row.resolution = res;
      StyleNetParams params = init_params(config.seed, config.channel_multiplier);
      row.parameters = params.parameter_count();
      try {
        const Tensor4 content = make_test_scene(res.height, res.width, 1);
        const Tensor4 style = make_test_scene(res.height, res.width, 2);
        memory::reset_peak();
        const auto start = Clock::now();
        TrainResult trained = train(content, style, weights, config);
        row.train_seconds = seconds_since(start);
        row.train_peak_bytes = memory::peak_bytes();
        row.train_epochs = static_cast<int>(trained.history.size());
        params = std::move(trained.params);
      } catch (const std::bad_alloc&) {
        row.train_oom = true;
        spdlog::warn("{}: training exceeded the memory limit", res.label);
      }
      try {
        const Tensor4 content = make_test_scene(res.height, res.width, 1);
        memory::reset_peak();
        double total = 0.0;
        const int repeats = std::max(1, options.infer_repeats);
        for (int r = 0; r < repeats; ++r) {
          const auto start = Clock::now();
          const Tensor4 out = stylenet_forward(content, params, net_options(config));
          total += seconds_since(start);
        }
        row.infer_ms = 1000.0 * total / repeats;
        row.infer_peak_bytes = memory::peak_bytes();
      } catch (const std::bad_alloc&) {
        row.infer_oom = true;
        spdlog::warn("{}: inference exceeded the memory limit", res.label);
      }
      spdlog::info("{}: train {}, inference {}", res.label,
                   row.train_oom ? std::string("OOM") : std::to_string(row.train_seconds) + " s",
                   row.infer_oom ? std::string("OOM") : std::to_string(row.infer_ms) + " ms");
      rows.push_back(row);
    }
  } catch (...) {
    memory::set_limit(previous_limit);
    throw;
  }
  memory::set_limit(previous_limit);
  return rows;
}

void write_bench_table(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "| Resolution | Train (time / memory) | Epochs | Inference (time / memory) | Parameters |\n";
  out << "|---|---|---|---|---|\n";
  char cell[96];
  for (const auto& row : rows) {
    out << "| " << row.resolution.label << " (" << row.resolution.width << "x" << row.resolution.height
        << ") | ";
    if (row.train_oom) {
      out << "OOM | - | ";
    } else {
      std::snprintf(cell, sizeof cell, "%.2f s / %s | %d | ", row.train_seconds,
                    format_bytes(row.train_peak_bytes).c_str(), row.train_epochs);
      out << cell;
    }
    if (row.infer_oom) {
      out << "OOM | ";
    } else {
      std::snprintf(cell, sizeof cell, "%.1f ms / %s | ", row.infer_ms, format_bytes(row.infer_peak_bytes).c_str());
      out << cell;
    }
    out << format_count(row.parameters) << " |\n";
  }
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "resolution,width,height,train_seconds,train_epochs,train_peak_bytes,infer_ms,infer_peak_bytes,parameters\n";
  for (const auto& row : rows) {
    out << row.resolution.label << ',' << row.resolution.width << ',' << row.resolution.height << ',';
    if (row.train_oom) {
      out << "OOM,,OOM,";
    } else {
      out << row.train_seconds << ',' << row.train_epochs << ',' << row.train_peak_bytes << ',';
    }
    if (row.infer_oom) {
      out << "OOM,OOM,";
    } else {
      out << row.infer_ms << ',' << row.infer_peak_bytes << ',';
    }
    out << row.parameters << '\n';
  }
}

}  // namespace ipst
