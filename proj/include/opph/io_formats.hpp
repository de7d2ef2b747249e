#pragma once

// Readers and writers for every file the pipeline consumes or produces:
// Middlebury .flo flow, PPM/PGM/PNG images, pose and speed CSV, sequence
// manifests and CSV reports.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opph/filters.hpp"
#include "opph/types.hpp"

namespace opph {

// --- .flo -------------------------------------------------------------------

inline constexpr float kFloMagic = 202021.25f;  // bytes "PIEH" read as little-endian float
inline constexpr float kFloUnknownThreshold = 1e9f;

// Components with magnitude above 1e9 (or NaN) are "unknown" and become zero.
FlowField read_flo(std::span<const std::uint8_t> bytes, std::string_view source = "<memory>");
std::vector<std::uint8_t> write_flo(const FlowField& flow);

FlowField read_flo_file(const std::filesystem::path& path);
void write_flo_file(const std::filesystem::path& path, const FlowField& flow);

// --- raster images ----------------------------------------------------------

struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> data;
};

// Binary PPM (P6), PGM (P5) or PNG, 8 bits per sample.
Image8 decode_image(std::span<const std::uint8_t> bytes, std::string_view source);
Image8 read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_pnm(const Image8& image);
void write_pnm(const std::filesystem::path& path, const Image8& image);
void write_png(const std::filesystem::path& path, const Image8& image);

Frame read_frame(const std::filesystem::path& path, int index, double fps);
void write_frame(const std::filesystem::path& path, const Frame& frame);

BodyMask read_mask(const std::filesystem::path& path);
PartMask read_parts(const std::filesystem::path& path);
// 0 -> 0, 1 -> 255, grayscale PGM.
void write_mask(const std::filesystem::path& path, const BodyMask& mask);

// --- pose and speed CSV -----------------------------------------------------

// Header "frame,joint,x,y,present"; one record per joint per frame.
PoseTrack parse_pose(std::string_view text, double fps, std::string_view source = "<memory>");
PoseTrack read_pose(const std::filesystem::path& path, double fps);
std::string format_pose(const PoseTrack& track);

// Header "frame,speed"; frames numbered 0 .. n - 1.
SpeedSeries parse_gt_speed(std::string_view text, double fps, std::string_view source = "<memory>");
SpeedSeries read_gt_speed(const std::filesystem::path& path, double fps);
std::string format_gt_speed(const SpeedSeries& series);
void write_gt_speed(const std::filesystem::path& path, const SpeedSeries& series);

// --- manifests ---------------------------------------------------------------

// One video. Relative paths resolve against the manifest's directory.
struct SequenceManifest {
  std::string id;
  double fps = 30.0;
  std::vector<std::filesystem::path> frames;
  std::vector<std::filesystem::path> masks;  // one per frame, or one per frame pair
  std::vector<std::filesystem::path> flows;  // one per frame pair: flow k is frame k -> k + 1
  std::optional<std::filesystem::path> pose;
  std::optional<std::filesystem::path> gt_speed;

  void validate() const;
};

SequenceManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir,
                                std::string_view source = "<memory>");
SequenceManifest read_manifest(const std::filesystem::path& path);
// Paths are written relative to the manifest directory when they lie under it.
void write_manifest(const std::filesystem::path& path, const SequenceManifest& manifest);

std::vector<Frame> read_frames(const SequenceManifest& manifest);
// Per-pair masks, OR-combining per-frame masks when one per frame is given.
std::vector<BodyMask> read_pair_masks(const SequenceManifest& manifest);
std::vector<FlowField> read_flows(const SequenceManifest& manifest);

// --- configuration -----------------------------------------------------------

struct ConfigOverrides {
  std::optional<int> theta;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<int> min_active_pixels;
  std::vector<FilterSpec> filters;

  // Values from other win where both are set; filters from other replace.
  ConfigOverrides merged_with(const ConfigOverrides& other) const;
  OpphConfig resolve(int width, int height, double fps) const;
};

// "key = value" lines: theta, n, m, min_active_pixels, filter (repeatable).
// '#' starts a comment.
ConfigOverrides parse_config(std::string_view text, std::string_view source = "<memory>");
ConfigOverrides read_config(const std::filesystem::path& path);
std::string format_config(const OpphConfig& cfg);

// --- CSV reports ---------------------------------------------------------------

// Shortest text that parses back to the same double.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  // Emitted as "# key=value" lines ahead of the column header.
  void add_meta(std::string key, std::string value);
  void add_row(std::vector<std::string> cells);

  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const;
  void write(const std::filesystem::path& path) const;

  static CsvTable parse(std::string_view text, std::string_view source = "<memory>");
  static CsvTable read(const std::filesystem::path& path);

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<std::string>> rows_;
};

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace opph
