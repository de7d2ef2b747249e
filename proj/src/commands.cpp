#include "opph/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include "opph/log.hpp"
#include "opph/speed_metrics.hpp"

namespace opph {

namespace fs = std::filesystem;

namespace {

// Runs fn(0 .. n-1) on up to jobs threads. The first failing index wins, so
// the reported error does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
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
}

const char* to_string(TemporalAlignment a) {
  return a == TemporalAlignment::centered ? "centered" : "causal";
}

std::string config_text(const OpphConfig& cfg) {
  return "theta=" + std::to_string(cfg.theta()) + " n=" + std::to_string(cfg.n()) +
         " m=" + std::to_string(cfg.m()) +
         " min_active_pixels=" + std::to_string(cfg.min_active_pixels());
}

// --- manifest-backed video ------------------------------------------------------

class ManifestVideo final : public VideoSource {
 public:
  explicit ManifestVideo(SequenceManifest m) : m_(std::move(m)) {
    m_.validate();
    if (m_.frames.size() < 2) {
      throw InvalidArgument("manifest '" + m_.id + "': needs at least two frames");
    }
    if (m_.masks.empty()) throw InvalidArgument("manifest '" + m_.id + "': no masks listed");
    const Frame f0 = read_frame(m_.frames[0], 0, m_.fps);
    width_ = f0.width();
    height_ = f0.height();
  }

  std::string id() const override { return m_.id; }
  double fps() const override { return m_.fps; }
  int frame_count() const override { return static_cast<int>(m_.frames.size()); }

  Frame frame(int k) const override {
    Frame f = read_frame(m_.frames.at(k), k, m_.fps);
    if (f.width() != width_ || f.height() != height_) {
      throw FormatError(m_.frames[k].string() + ": frame is " + std::to_string(f.width()) + "x" +
                        std::to_string(f.height()) + ", expected " + std::to_string(width_) + "x" +
                        std::to_string(height_));
    }
    return f;
  }

  BodyMask speed_mask(int t) const override { return mask(static_cast<std::size_t>(t)); }

  BodyMask pair_mask(int t) const override {
    if (!per_frame()) return mask(static_cast<std::size_t>(t));
    return combine_masks(mask(static_cast<std::size_t>(t)), mask(static_cast<std::size_t>(t) + 1));
  }

  bool has_flow() const override { return !m_.flows.empty(); }

  FlowField flow(int t) const override {
    if (m_.flows.empty()) {
      throw InvalidArgument("manifest '" + m_.id + "': source flo needs flow files");
    }
    const fs::path& p = m_.flows.at(t);
    FlowField f = read_flo_file(p);
    if (f.width() != width_ || f.height() != height_) {
      throw FormatError(p.string() + ": flow is " + std::to_string(f.width()) + "x" +
                        std::to_string(f.height()) + ", frames are " + std::to_string(width_) +
                        "x" + std::to_string(height_));
    }
    return f;
  }

  std::optional<PoseTrack> pose() const override {
    if (!m_.pose) return std::nullopt;
    return read_pose(*m_.pose, m_.fps);
  }

  std::optional<SpeedSeries> gt_speed() const override {
    if (!m_.gt_speed) return std::nullopt;
    return read_gt_speed(*m_.gt_speed, m_.fps);
  }

 private:
  bool per_frame() const { return m_.masks.size() == m_.frames.size(); }

  BodyMask mask(std::size_t i) const {
    const fs::path& p = m_.masks.at(i);
    BodyMask mk = read_mask(p);
    if (!mk.same_shape(width_, height_)) {
      throw FormatError(p.string() + ": mask is " + std::to_string(mk.width()) + "x" +
                        std::to_string(mk.height()) + ", frames are " + std::to_string(width_) +
                        "x" + std::to_string(height_));
    }
    return mk;
  }

  SequenceManifest m_;
  int width_ = 0;
  int height_ = 0;
};

class SceneVideo final : public VideoSource {
 public:
  explicit SceneVideo(const SceneSpec& spec) : scene_(spec) {}

  std::string id() const override { return scene_.spec().id; }
  double fps() const override { return scene_.spec().fps; }
  int frame_count() const override { return scene_.frame_count(); }
  Frame frame(int k) const override { return scene_.render(k); }
  BodyMask speed_mask(int t) const override { return scene_.mask(t); }
  BodyMask pair_mask(int t) const override { return scene_.pair_mask(t); }
  bool has_flow() const override { return true; }
  FlowField flow(int t) const override { return scene_.gt_flow(t); }
  std::optional<PoseTrack> pose() const override { return std::nullopt; }
  std::optional<SpeedSeries> gt_speed() const override { return scene_.gt_speeds(); }

 private:
  SceneRenderer scene_;
};

}  // namespace

const char* to_string(SpeedSource source) {
  switch (source) {
    case SpeedSource::flo: return "flo";
    case SpeedSource::pose: return "pose";
    case SpeedSource::builtin_flow: return "builtin-flow";
  }
  return "?";
}

SpeedSource parse_speed_source(const std::string& text) {
  if (text == "flo") return SpeedSource::flo;
  if (text == "pose") return SpeedSource::pose;
  if (text == "builtin-flow") return SpeedSource::builtin_flow;
  throw InvalidArgument("source: expected flo, pose or builtin-flow, got '" + text + "'");
}

std::unique_ptr<VideoSource> open_manifest(const fs::path& manifest_path) {
  return std::make_unique<ManifestVideo>(read_manifest(manifest_path));
}

std::unique_ptr<VideoSource> open_manifest(SequenceManifest manifest) {
  return std::make_unique<ManifestVideo>(std::move(manifest));
}

std::unique_ptr<VideoSource> open_scene(const SceneSpec& spec) {
  return std::make_unique<SceneVideo>(spec);
}

// --- measurement ----------------------------------------------------------------

VideoSpeeds measure_video(const VideoSource& video, const PipelineOptions& options,
                          const std::vector<FilterSpec>& spatial_filters) {
  const std::string name = "video '" + video.id() + "'";
  const int pairs = video.pair_count();
  if (pairs < 1) throw InvalidArgument(name + ": needs at least two frames");
  for (const auto& f : spatial_filters) {
    if (!f.spatial()) throw InvalidArgument(name + ": " + f.describe() + " is not a flow filter");
  }
  if (options.source == SpeedSource::flo && !video.has_flow()) {
    throw InvalidArgument(name + ": source flo needs flow files");
  }
  std::optional<PoseTrack> pose;
  if (options.source == SpeedSource::pose) {
    pose = video.pose();
    if (!pose) throw InvalidArgument(name + ": source pose needs a pose file");
    if (static_cast<int>(pose->frame_count()) != video.frame_count()) {
      throw InvalidArgument(name + ": pose track has " + std::to_string(pose->frame_count()) +
                            " frames, video has " + std::to_string(video.frame_count()));
    }
    if (!spatial_filters.empty()) {
      throw InvalidArgument(name + ": flow filters need a flow source, not pose");
    }
  }

  const Frame first = video.frame(0);
  VideoSpeeds out;
  out.id = video.id();
  out.config = options.overrides.resolve(first.width(), first.height(), video.fps());
  const OpphConfig cfg = out.config;

  std::vector<double> raw(static_cast<std::size_t>(pairs), 0.0);
  std::vector<std::vector<double>> filtered(spatial_filters.size(), raw);
  out.indicator.assign(static_cast<std::size_t>(pairs), 0);

  // Contiguous chunks keep each worker's frame reuse intact.
  const std::size_t chunks =
      std::clamp<std::size_t>(options.jobs, 1, static_cast<std::size_t>(pairs));
  parallel_for(chunks, chunks, [&](std::size_t c) {
    const int lo = static_cast<int>(c * pairs / chunks);
    const int hi = static_cast<int>((c + 1) * pairs / chunks);
    if (lo >= hi) return;
    Frame a = lo == 0 ? first : video.frame(lo);
    for (int t = lo; t < hi; ++t) {
      Frame b = video.frame(t + 1);
      const BodyMask pm = video.pair_mask(t);
      out.indicator[t] = motion_indicator(a, b, pm, cfg);
      if (options.source != SpeedSource::pose) {
        const BodyMask sm = video.speed_mask(t);
        FlowField flow;
        if (options.source == SpeedSource::flo) {
          flow = video.flow(t);
        } else {
          flow = dense_flow_region(a, b, bounding_box(combine_masks(sm, pm)), options.flow_margin,
                                   options.flow);
        }
        raw[t] = flow_speed(flow, sm);
        const Rect roi = bounding_box(sm);
        for (std::size_t i = 0; i < spatial_filters.size(); ++i) {
          filtered[i][t] = flow_speed(apply_filter_in_region(spatial_filters[i], flow, roi), sm);
        }
      }
      a = std::move(b);
    }
  });

  if (pose) {
    SpeedSeries ps = pose_speeds(*pose);
    out.raw = SpeedSeries(std::vector<double>(ps.values().begin(), ps.values().end()), video.fps());
  } else {
    out.raw = SpeedSeries(std::move(raw), video.fps());
  }
  for (auto& f : filtered) out.filtered.emplace_back(std::move(f), video.fps());
  return out;
}

OpphResult gate_video(const VideoSpeeds& speeds, TemporalAlignment alignment) {
  return finish_opph(speeds.indicator, speeds.raw, speeds.config, alignment);
}

void add_config_meta(CsvTable& table, const OpphConfig& cfg) {
  table.add_meta("theta", std::to_string(cfg.theta()));
  table.add_meta("n", std::to_string(cfg.n()));
  table.add_meta("m", std::to_string(cfg.m()));
  table.add_meta("min_active_pixels", std::to_string(cfg.min_active_pixels()));
}

// --- run ------------------------------------------------------------------------

RunOutput run_video(const VideoSource& video, const PipelineOptions& options, bool no_opph) {
  const VideoSpeeds sp = measure_video(video, options);
  auto header = [&](CsvTable& t) {
    t.add_meta("video", sp.id);
    t.add_meta("source", to_string(options.source));
    t.add_meta("fps", format_number(video.fps()));
    t.add_meta("pairs", std::to_string(sp.raw.size()));
    add_config_meta(t, sp.config);
    t.add_meta("alignment", to_string(options.alignment));
    t.add_meta("opph", no_opph ? "off" : "on");
  };

  if (no_opph) {
    RunOutput out{CsvTable({"frame", "raw_speed"}), std::nullopt};
    header(out.speeds);
    for (std::size_t t = 0; t < sp.raw.size(); ++t) {
      out.speeds.add_row({std::to_string(t), format_number(sp.raw[t])});
    }
    return out;
  }
  const OpphResult res = gate_video(sp, options.alignment);
  RunOutput out{CsvTable({"frame", "raw_speed", "gated_speed"}),
                CsvTable({"frame", "s", "s_prime"})};
  header(out.speeds);
  header(*out.gate);
  for (std::size_t t = 0; t < sp.raw.size(); ++t) {
    out.speeds.add_row(
        {std::to_string(t), format_number(sp.raw[t]), format_number(res.gated[t])});
    out.gate->add_row({std::to_string(t), std::to_string(res.gate.raw()[t]),
                       std::to_string(res.gate.filtered()[t])});
  }
  return out;
}

// --- eval -----------------------------------------------------------------------

Variant Variant::parse(const std::string& text) {
  if (text == "raw" || text == "opph") return Variant{text, std::nullopt};
  FilterSpec f = FilterSpec::parse(text);
  return Variant{f.describe(), f};
}

std::vector<Variant> default_variants(const std::vector<FilterSpec>& filters) {
  std::vector<Variant> out{{"raw", std::nullopt}, {"opph", std::nullopt}};
  for (const auto& f : filters) out.push_back({f.describe(), f});
  return out;
}

VariantSeries collect_variants(const std::vector<const VideoSource*>& videos,
                               const std::vector<Variant>& variants,
                               const PipelineOptions& options,
                               const std::vector<SpeedSeries>& gt_override) {
  if (videos.empty()) throw InvalidArgument("no videos given");
  if (variants.empty()) throw InvalidArgument("no variants given");
  if (!gt_override.empty() && gt_override.size() != videos.size()) {
    throw InvalidArgument(std::to_string(gt_override.size()) + " ground-truth files for " +
                          std::to_string(videos.size()) + " videos");
  }
  {
    std::set<std::string> names, ids;
    for (const auto& v : variants) {
      if (!names.insert(v.name).second) throw InvalidArgument("variant '" + v.name + "' listed twice");
    }
    for (const auto* v : videos) {
      if (!ids.insert(v->id()).second) throw InvalidArgument("video id '" + v->id() + "' listed twice");
    }
  }
  std::vector<FilterSpec> spatial;
  std::vector<int> slot(variants.size(), -1);
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (variants[i].filter && variants[i].filter->spatial()) {
      slot[i] = static_cast<int>(spatial.size());
      spatial.push_back(*variants[i].filter);
    }
  }

  VariantSeries out;
  out.variants = variants;
  out.est.assign(variants.size(), std::vector<SpeedSeries>(videos.size()));
  out.gt.resize(videos.size());
  out.configs.assign(videos.size(), OpphConfig(OpphConfig::kDefaultTheta, 3, 1));
  for (const auto* v : videos) out.videos.push_back(v->id());

  const std::size_t outer = std::clamp<std::size_t>(options.jobs, 1, videos.size());
  PipelineOptions inner = options;
  inner.jobs = std::max<std::size_t>(1, options.jobs / outer);

  parallel_for(videos.size(), outer, [&](std::size_t k) {
    const VideoSource& video = *videos[k];
    SpeedSeries gt;
    if (!gt_override.empty()) {
      gt = gt_override[k];
    } else if (auto g = video.gt_speed()) {
      gt = std::move(*g);
    } else {
      throw InvalidArgument("video '" + video.id() + "': no ground-truth speed");
    }
    if (static_cast<int>(gt.size()) != video.pair_count()) {
      throw InvalidArgument("video '" + video.id() + "': ground truth has " +
                            std::to_string(gt.size()) + " speeds for " +
                            std::to_string(video.pair_count()) + " frame pairs");
    }
    const VideoSpeeds sp = measure_video(video, inner, spatial);
    std::optional<SpeedSeries> gated;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      const Variant& var = variants[i];
      if (var.name == "raw") {
        out.est[i][k] = sp.raw;
      } else if (var.name == "opph") {
        if (!gated) gated = gate_video(sp, options.alignment).gated;
        out.est[i][k] = *gated;
      } else if (slot[i] >= 0) {
        out.est[i][k] = sp.filtered[static_cast<std::size_t>(slot[i])];
      } else {
        out.est[i][k] = apply_filter(*var.filter, sp.raw);
      }
    }
    out.gt[k] = std::move(gt);
    out.configs[k] = sp.config;
  });
  return out;
}

CsvTable eval_report(const VariantSeries& series, const PipelineOptions& options) {
  CsvTable table({"kind", "variant", "video", "rmse"});
  table.add_meta("source", to_string(options.source));
  table.add_meta("alignment", to_string(options.alignment));
  for (std::size_t k = 0; k < series.videos.size(); ++k) {
    table.add_meta("config." + series.videos[k], config_text(series.configs[k]));
  }
  std::vector<std::vector<std::string>> summary;
  for (std::size_t i = 0; i < series.variants.size(); ++i) {
    std::vector<double> per_video;
    for (std::size_t k = 0; k < series.videos.size(); ++k) {
      per_video.push_back(rmse(series.est[i][k], series.gt[k]));
    }
    const RmseReport rep = make_rmse_report(series.videos, per_video);
    const std::string& name = series.variants[i].name;
    for (std::size_t k = 0; k < rep.videos.size(); ++k) {
      table.add_row({"video", name, rep.videos[k], format_number(rep.per_video[k])});
    }
    table.add_row({"mean", name, "*", format_number(rep.summary.mean)});
    table.add_row({"median", name, "*", format_number(rep.summary.median)});
    table.add_meta("excluded." + name, std::to_string(rep.summary.excluded));
  }
  return table;
}

// --- correlate --------------------------------------------------------------------

CorrelateOutput correlate_report(const VariantSeries& series, const std::vector<double>& windows_s,
                                 const PipelineOptions& options) {
  if (windows_s.empty()) throw InvalidArgument("correlate: no window lengths given");
  std::vector<std::size_t> order(series.videos.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return series.videos[a] < series.videos[b]; });

  auto stack = [&](const std::vector<SpeedSeries>& parts) {
    std::vector<SpeedSeries> sorted;
    for (std::size_t k : order) sorted.push_back(parts[k]);
    return concatenate(sorted);
  };
  const SpeedSeries gt = stack(series.gt);

  CorrelateOutput out{CsvTable({"window_s", "variant", "windows", "frames_per_window", "r"}),
                      CsvTable({"window_s", "variant", "index", "est", "gt"})};
  for (CsvTable* t : {&out.summary, &out.windows}) {
    t->add_meta("source", to_string(options.source));
    t->add_meta("alignment", to_string(options.alignment));
    std::string joined;
    for (std::size_t k : order) joined += (joined.empty() ? "" : " ") + series.videos[k];
    t->add_meta("videos", joined);
    for (std::size_t k : order) t->add_meta("config." + series.videos[k], config_text(series.configs[k]));
  }
  for (double w : windows_s) {
    for (std::size_t i = 0; i < series.variants.size(); ++i) {
      const std::string& name = series.variants[i].name;
      const SpeedSeries est = stack(series.est[i]);
      CorrelationReport rep;
      try {
        rep = windowed_correlation(est, gt, w);
      } catch (const DegenerateCorrelation& e) {
        throw DegenerateCorrelation("variant '" + name + "', window " + format_number(w) + " s: " +
                                    e.what());
      }
      out.summary.add_row({format_number(w), name, std::to_string(rep.est.size()),
                           std::to_string(rep.frames_per_window), format_number(rep.r)});
      for (std::size_t j = 0; j < rep.est.size(); ++j) {
        out.windows.add_row({format_number(w), name, std::to_string(j), format_number(rep.est[j]),
                             format_number(rep.gt[j])});
      }
    }
  }
  return out;
}

// --- bench ------------------------------------------------------------------------

namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

BenchResult bench_opph(int width, int height, int frames, int warmup,
                       const ConfigOverrides& overrides) {
  if (frames < 1) throw InvalidArgument("bench: frames must be at least 1");
  if (warmup < 0) throw InvalidArgument("bench: warmup must be non-negative");
  SceneSpec spec;
  spec.id = "bench";
  spec.width = width;
  spec.height = height;
  spec.body_width = std::max(1, width / 3);
  spec.body_height = std::max(1, height * 2 / 3);
  spec.motion = {MotionSegment{7, 0.0, 0.0}};
  spec.noise = {NoiseSpec::gaussian(4.0), NoiseSpec::salt(1e-4)};
  const SceneRenderer scene(spec);
  std::vector<Frame> ring;
  for (int k = 0; k < scene.frame_count(); ++k) ring.push_back(scene.render(k));
  const BodyMask mask = scene.pair_mask(0);

  BenchResult res;
  res.width = width;
  res.height = height;
  res.frames = frames;
  res.warmup = warmup;
  res.config = overrides.resolve(width, height, spec.fps);
  const OpphConfig& cfg = res.config;
  const std::size_t m = static_cast<std::size_t>(cfg.m());

  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  std::vector<std::vector<double>> samples(std::size(kBenchStages));
  std::vector<double> totals;
  std::vector<std::uint8_t> history;
  std::vector<double> speeds;
  double sink = 0.0;
  const int n_ring = static_cast<int>(ring.size()) - 1;
  for (int i = 0; i < warmup + frames; ++i) {
    const Frame& a = ring[static_cast<std::size_t>(i % n_ring)];
    const Frame& b = ring[static_cast<std::size_t>(i % n_ring + 1)];
    const auto t0 = clock::now();
    const BinaryImage d = diff_threshold(a, b, cfg.theta());
    const auto t1 = clock::now();
    const BinaryImage p = apply_mask(d, mask);
    const auto t2 = clock::now();
    const BinaryImage q = spatial_median(p, cfg.n());
    const auto t3 = clock::now();
    history.push_back(compress(q, cfg.min_active_pixels()));
    speeds.push_back(0.5);
    const auto t4 = clock::now();
    // Live gating: causal median over the last m indicators, then one product.
    const std::size_t from = history.size() > m ? history.size() - m : 0;
    const auto window = std::span<const std::uint8_t>(history).subspan(from);
    const auto s = temporal_median(window, cfg.m(), TemporalAlignment::causal);
    sink += speeds.back() * s.back();
    const auto t5 = clock::now();
    if (i < warmup) continue;
    const double st[] = {ms(t0, t1), ms(t1, t2), ms(t2, t3), ms(t3, t4), ms(t4, t5)};
    double total = 0.0;
    for (std::size_t k = 0; k < std::size(st); ++k) {
      samples[k].push_back(st[k]);
      total += st[k];
    }
    totals.push_back(total);
  }
  for (auto& s : samples) res.stage_ms.push_back(median_of(s));
  res.total_ms = median_of(totals);
  if (sink < 0.0) log_info("bench: impossible");  // keeps the gating step observable
  return res;
}

CsvTable bench_report(const BenchResult& r) {
  CsvTable table({"stage", "ms_per_frame"});
  table.add_meta("width", std::to_string(r.width));
  table.add_meta("height", std::to_string(r.height));
  table.add_meta("frames", std::to_string(r.frames));
  table.add_meta("warmup", std::to_string(r.warmup));
  add_config_meta(table, r.config);
  for (std::size_t k = 0; k < r.stage_ms.size(); ++k) {
    table.add_row({kBenchStages[k], format_number(r.stage_ms[k])});
  }
  table.add_row({"total", format_number(r.total_ms)});
  return table;
}

}  // namespace opph
