// opph: command-line front end. See README.md for usage.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "opph/commands.hpp"
#include "opph/log.hpp"

namespace fs = std::filesystem;
using namespace opph;

namespace {

struct Common {
  std::string config_file;
  std::optional<int> theta, n, m, min_active;
  std::vector<std::string> filters;
  std::size_t jobs = 1;
  bool stream = false;
  std::string source = "flo";
  FlowParams flow;
  int flow_margin = 32;
};

void add_config_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--theta", c.theta, "colour-difference threshold");
  cmd->add_option("--n", c.n, "spatial median window side (odd)");
  cmd->add_option("--m", c.m, "temporal median window length (odd)");
  cmd->add_option("--min-active", c.min_active, "active pixels needed for S = 1");
  cmd->add_option("--jobs,-j", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void add_pipeline_flags(CLI::App* cmd, Common& c) {
  add_config_flags(cmd, c);
  cmd->add_option("--source", c.source, "speed source: flo, pose or builtin-flow")
      ->check(CLI::IsMember({"flo", "pose", "builtin-flow"}));
  cmd->add_flag("--stream", c.stream, "causal temporal median (live alignment)");
  cmd->add_option("--flow-levels", c.flow.levels, "built-in flow pyramid levels");
  cmd->add_option("--flow-window", c.flow.window, "built-in flow window side (odd)");
  cmd->add_option("--flow-iterations", c.flow.iterations, "built-in flow iterations per level");
  cmd->add_option("--flow-margin", c.flow_margin, "built-in flow margin around the body box");
}

ConfigOverrides overrides_of(const Common& c) {
  ConfigOverrides file;
  if (!c.config_file.empty()) file = read_config(c.config_file);
  ConfigOverrides cli;
  cli.theta = c.theta;
  cli.n = c.n;
  cli.m = c.m;
  cli.min_active_pixels = c.min_active;
  for (const auto& f : c.filters) cli.filters.push_back(FilterSpec::parse(f));
  return file.merged_with(cli);
}

PipelineOptions pipeline_of(const Common& c) {
  PipelineOptions o;
  o.source = parse_speed_source(c.source);
  o.overrides = overrides_of(c);
  o.alignment = c.stream ? TemporalAlignment::causal : TemporalAlignment::centered;
  o.flow = c.flow;
  o.flow_margin = c.flow_margin;
  o.jobs = c.jobs;
  return o;
}

void emit(const CsvTable& table, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << table.str();
  } else {
    table.write(out);
  }
}

std::vector<Variant> variants_of(const std::vector<std::string>& names,
                                 const std::vector<FilterSpec>& filters, bool compare) {
  if (!names.empty()) {
    std::vector<Variant> out;
    for (const auto& n : names) out.push_back(Variant::parse(n));
    return out;
  }
  if (compare && filters.empty()) {
    return default_variants({FilterSpec::median(), FilterSpec::bilateral(), FilterSpec::tv(),
                             FilterSpec::kalman()});
  }
  return default_variants(filters);
}

struct Videos {
  std::vector<std::unique_ptr<VideoSource>> owned;
  std::vector<const VideoSource*> ptrs;
};

Videos open_all(const std::vector<std::string>& manifests) {
  Videos v;
  for (const auto& m : manifests) {
    v.owned.push_back(open_manifest(fs::path(m)));
    v.ptrs.push_back(v.owned.back().get());
  }
  return v;
}

std::vector<SpeedSeries> read_gts(const std::vector<std::string>& files, const Videos& videos) {
  std::vector<SpeedSeries> out;
  if (files.empty()) return out;
  if (files.size() != videos.ptrs.size()) {
    throw InvalidArgument("--gt: " + std::to_string(files.size()) + " files for " +
                          std::to_string(videos.ptrs.size()) + " manifests");
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    out.push_back(read_gt_speed(files[k], videos.ptrs[k]->fps()));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-speed gating for body-motion estimates"};
  app.require_subcommand(1);
  std::string log_level = "warning";
  app.add_option("--log-level", log_level, "debug, info, warning, error or off")
      ->check(CLI::IsMember({"debug", "info", "warning", "error", "off"}));

  Common c;
  std::vector<std::string> manifests, gts, variant_names;
  std::string out;
  bool no_opph = false;

  auto* run = app.add_subcommand("run", "per-frame raw speed, gate and gated speed");
  add_pipeline_flags(run, c);
  run->add_option("--manifest", manifests, "sequence manifest(s)")->required()->check(CLI::ExistingFile);
  run->add_flag("--no-opph", no_opph, "emit the raw speed only");
  run->add_option("--out", out, "output directory")->required();

  auto add_eval_flags = [&](CLI::App* cmd) {
    add_pipeline_flags(cmd, c);
    cmd->add_option("--manifest", manifests, "sequence manifest(s)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--gt", gts, "ground-truth speed CSV per manifest (default: from manifest)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--filter", c.filters, "filter variant, e.g. median:n=5 (repeatable)");
    cmd->add_option("--variants", variant_names, "variants to report: raw, opph, filter specs")
        ->delimiter(',');
    cmd->add_option("--out", out, "output CSV (default: standard output)");
  };
  auto* eval = app.add_subcommand("eval", "per-video RMSE with mean and outlier-excluded median");
  add_eval_flags(eval);
  auto* compare = app.add_subcommand("compare-filters", "eval with the filter variants");
  add_eval_flags(compare);

  std::vector<double> windows;
  std::string windows_out;
  auto* correlate = app.add_subcommand("correlate", "windowed Pearson correlation against ground truth");
  add_eval_flags(correlate);
  correlate->add_option("--windows", windows, "window lengths in seconds")->required()->delimiter(',');
  correlate->add_option("--windows-out", windows_out, "per-window sums CSV");

  std::string scene_file;
  auto* synth = app.add_subcommand("synth", "render a synthetic sequence with ground truth");
  synth->add_option("--scene", scene_file, "scene description file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out, "output directory")->required();

  int width = 640, height = 480, frames = 100, warmup = 10;
  auto* bench = app.add_subcommand("bench", "per-stage timing of the gate");
  add_config_flags(bench, c);
  bench->add_option("--width", width, "frame width")->check(CLI::PositiveNumber);
  bench->add_option("--height", height, "frame height")->check(CLI::PositiveNumber);
  bench->add_option("--frames", frames, "timed frames")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", warmup, "untimed warm-up frames")->check(CLI::NonNegativeNumber);
  bench->add_option("--out", out, "output CSV (default: standard output)");

  CLI11_PARSE(app, argc, argv);

  const std::string levels[] = {"debug", "info", "warning", "error", "off"};
  for (int i = 0; i < 5; ++i) {
    if (log_level == levels[i]) set_log_level(static_cast<LogLevel>(i));
  }

  try {
    if (run->parsed()) {
      const PipelineOptions opt = pipeline_of(c);
      const Videos videos = open_all(manifests);
      std::set<std::string> ids;
      for (const auto* v : videos.ptrs) {
        if (!ids.insert(v->id()).second) throw InvalidArgument("video id '" + v->id() + "' listed twice");
      }
      // One directory per video when several are given.
      const bool nested = videos.ptrs.size() > 1;
      const std::size_t outer = std::min(opt.jobs, videos.ptrs.size());
      PipelineOptions inner = opt;
      inner.jobs = std::max<std::size_t>(1, opt.jobs / std::max<std::size_t>(outer, 1));
      std::vector<std::optional<RunOutput>> results(videos.ptrs.size());
      std::vector<std::exception_ptr> errors(videos.ptrs.size());
      std::vector<std::thread> pool;
      std::atomic<std::size_t> next{0};
      for (std::size_t j = 0; j < std::max<std::size_t>(outer, 1); ++j) {
        pool.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < videos.ptrs.size();) {
            try {
              results[i] = run_video(*videos.ptrs[i], inner, no_opph);
            } catch (...) {
              errors[i] = std::current_exception();
            }
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (std::size_t i = 0; i < results.size(); ++i) {
        const fs::path dir = nested ? fs::path(out) / videos.ptrs[i]->id() : fs::path(out);
        fs::create_directories(dir);
        results[i]->speeds.write(dir / "speeds.csv");
        if (results[i]->gate) results[i]->gate->write(dir / "gate.csv");
      }
    } else if (eval->parsed() || compare->parsed() || correlate->parsed()) {
      const PipelineOptions opt = pipeline_of(c);
      const Videos videos = open_all(manifests);
      const auto variants = variants_of(variant_names, opt.overrides.filters, compare->parsed());
      const VariantSeries series = collect_variants(videos.ptrs, variants, opt, read_gts(gts, videos));
      if (correlate->parsed()) {
        const CorrelateOutput rep = correlate_report(series, windows, opt);
        emit(rep.summary, out);
        if (!windows_out.empty()) rep.windows.write(windows_out);
      } else {
        emit(eval_report(series, opt), out);
      }
    } else if (synth->parsed()) {
      const SceneSpec spec = parse_scene(read_text(scene_file), scene_file);
      const fs::path manifest = write_sequence(spec, out);
      log_info("wrote " + manifest.string());
    } else if (bench->parsed()) {
      const BenchResult r = bench_opph(width, height, frames, warmup, overrides_of(c));
      emit(bench_report(r), out);
    }
  } catch (const std::exception& e) {
    std::cerr << "opph: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
