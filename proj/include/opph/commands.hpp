#pragma once

// Batch pipelines behind the command-line subcommands. Each takes plain
// options and returns report tables, so they can be driven without a shell.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opph/filters.hpp"
#include "opph/flow_baseline.hpp"
#include "opph/io_formats.hpp"
#include "opph/operator.hpp"
#include "opph/synth.hpp"
#include "opph/types.hpp"

namespace opph {

enum class SpeedSource { flo, pose, builtin_flow };

const char* to_string(SpeedSource source);
SpeedSource parse_speed_source(const std::string& text);

// Random access to one video: frames, masks, optional motion inputs and
// optional ground truth.
class VideoSource {
 public:
  virtual ~VideoSource() = default;

  virtual std::string id() const = 0;
  virtual double fps() const = 0;
  virtual int frame_count() const = 0;
  virtual Frame frame(int k) const = 0;
  // Mask the speed of pair t is averaged over (the body in frame t).
  virtual BodyMask speed_mask(int t) const = 0;
  // Mask the motion gate of pair t uses (the body in either frame).
  virtual BodyMask pair_mask(int t) const = 0;
  virtual bool has_flow() const = 0;
  virtual FlowField flow(int t) const = 0;
  virtual std::optional<PoseTrack> pose() const = 0;
  virtual std::optional<SpeedSeries> gt_speed() const = 0;

  int pair_count() const { return frame_count() - 1; }
};

// Files listed by a manifest, loaded lazily.
std::unique_ptr<VideoSource> open_manifest(const std::filesystem::path& manifest_path);
std::unique_ptr<VideoSource> open_manifest(SequenceManifest manifest);
// A synthetic scene rendered on demand; flow() is the ground-truth flow.
std::unique_ptr<VideoSource> open_scene(const SceneSpec& spec);

struct PipelineOptions {
  SpeedSource source = SpeedSource::flo;
  ConfigOverrides overrides;
  TemporalAlignment alignment = TemporalAlignment::centered;
  FlowParams flow;
  // Built-in flow is evaluated on the mask box grown by this many pixels.
  int flow_margin = 32;
  // Worker threads; outputs do not depend on it.
  std::size_t jobs = 1;
};

// Everything measured on one video in a single pass over its frames.
struct VideoSpeeds {
  std::string id;
  OpphConfig config{OpphConfig::kDefaultTheta, 3, 1};
  SpeedSeries raw;
  std::vector<std::uint8_t> indicator;  // S before the temporal median
  // One series per spatial filter, in the order requested.
  std::vector<SpeedSeries> filtered;
};

// Speeds and motion indicators for one video. spatial_filters act on the
// flow field, so they need a flow source.
VideoSpeeds measure_video(const VideoSource& video, const PipelineOptions& options,
                          const std::vector<FilterSpec>& spatial_filters = {});

// Gated series and gate for already measured speeds.
OpphResult gate_video(const VideoSpeeds& speeds, TemporalAlignment alignment);

// --- run ------------------------------------------------------------------------

struct RunOutput {
  CsvTable speeds;  // frame,raw_speed,gated_speed (raw only with no_opph)
  std::optional<CsvTable> gate;  // frame,s,s_prime
};

RunOutput run_video(const VideoSource& video, const PipelineOptions& options, bool no_opph);

// --- eval -----------------------------------------------------------------------

// "raw", "opph", or a filter description accepted by FilterSpec::parse.
struct Variant {
  std::string name;
  std::optional<FilterSpec> filter;

  static Variant parse(const std::string& text);
};

std::vector<Variant> default_variants(const std::vector<FilterSpec>& filters);

// Estimated series per video and variant, ground truth per video.
struct VariantSeries {
  std::vector<std::string> videos;
  std::vector<Variant> variants;
  std::vector<std::vector<SpeedSeries>> est;  // [variant][video]
  std::vector<SpeedSeries> gt;                // [video]
  std::vector<OpphConfig> configs;            // [video]
};

// gt_override, when non-empty, replaces each video's own ground truth.
VariantSeries collect_variants(const std::vector<const VideoSource*>& videos,
                               const std::vector<Variant>& variants,
                               const PipelineOptions& options,
                               const std::vector<SpeedSeries>& gt_override = {});

// kind,variant,video,rmse with one "video" row per video, then "mean" and
// "median" rows per variant.
CsvTable eval_report(const VariantSeries& series, const PipelineOptions& options);

// --- correlate --------------------------------------------------------------------

// Videos are stacked in lexicographic id order before windowing.
// Summary columns: window_s,variant,windows,frames_per_window,r.
// Detail columns: window_s,variant,index,est,gt.
struct CorrelateOutput {
  CsvTable summary;
  CsvTable windows;
};

CorrelateOutput correlate_report(const VariantSeries& series, const std::vector<double>& windows_s,
                                 const PipelineOptions& options);

// --- bench ------------------------------------------------------------------------

inline constexpr const char* kBenchStages[] = {"diff_threshold", "apply_mask", "spatial_median",
                                               "compress", "temporal_gate"};

struct BenchResult {
  int width = 0;
  int height = 0;
  int frames = 0;
  int warmup = 0;
  OpphConfig config{OpphConfig::kDefaultTheta, 3, 1};
  std::vector<double> stage_ms;  // median per stage, order of kBenchStages
  double total_ms = 0.0;         // median of the per-frame stage sums
};

// Single-threaded timing of each stage on a noisy synthetic scene.
BenchResult bench_opph(int width, int height, int frames = 100, int warmup = 10,
                       const ConfigOverrides& overrides = {});
CsvTable bench_report(const BenchResult& result);

// Effective configuration as "# key=value" header lines.
void add_config_meta(CsvTable& table, const OpphConfig& cfg);

}  // namespace opph
