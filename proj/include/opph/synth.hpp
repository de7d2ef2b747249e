#pragma once

// Synthetic sequences with exact ground truth: a textured body translated
// over a textured background by a piecewise-constant motion program, plus
// injectable sensor, salt, flicker and background-motion noise.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "opph/types.hpp"

namespace opph {

// xorshift64* (Vigna), state seeded through splitmix64. Output sequence is
// part of the file-format contract: fixed seeds give byte-identical frames.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);

  std::uint64_t next() {
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t& state);
// Independent seed for (seed, a, b), e.g. noise source a at frame b.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

enum class NoiseKind { gaussian_sensor, salt, global_flicker, background_motion };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian_sensor;
  double sigma = 0.0;   // gaussian_sensor
  double rate = 0.0;    // salt: fraction of pixels replaced by 0 or 255
  int amplitude = 0;    // global_flicker: offset added to every channel
  int duration = 1;     // global_flicker: frames per burst
  int period = 1;       // global_flicker: frames between burst starts
  int start = 0;        // global_flicker: first burst frame
  Rect region;          // background_motion
  double vx = 0.0;      // background_motion, pixels/frame
  double vy = 0.0;

  static NoiseSpec gaussian(double sigma);
  static NoiseSpec salt(double rate);
  // Bursts begin at start, start + period, ...; start defaults to period.
  static NoiseSpec flicker(int amplitude, int duration, int period, int start = -1);
  static NoiseSpec background_motion(Rect region, double vx, double vy);

  // Whether frame k lies inside a flicker burst.
  bool flicker_active(int k) const;

  void validate() const;
  bool operator==(const NoiseSpec&) const = default;
};

enum class BodyShape { rectangle, ellipse };

struct MotionSegment {
  int duration = 1;  // frame pairs
  double vx = 0.0;   // pixels/frame
  double vy = 0.0;

  bool operator==(const MotionSegment&) const = default;
};

struct SceneSpec {
  std::string id = "scene";
  int width = 320;
  int height = 240;
  double fps = 30.0;
  std::uint64_t seed = 1;  // noise
  std::uint64_t background_seed = 1;
  int background_scale = 8;  // texture cell size, pixels
  BodyShape shape = BodyShape::ellipse;
  int body_width = 40;
  int body_height = 40;
  std::uint64_t body_seed = 2;
  int body_scale = 2;
  int start_x = -1;  // top-left of the body; -1 centres it
  int start_y = -1;
  std::vector<MotionSegment> motion;
  std::vector<NoiseSpec> noise;

  // Frames = total segment duration + 1.
  int frame_count() const;
  void validate() const;
  bool operator==(const SceneSpec&) const = default;
};

// Plain "key value ..." lines; see format_scene for the canonical form.
SceneSpec parse_scene(std::string_view text, std::string_view source = "<memory>");
std::string format_scene(const SceneSpec& spec);

// Random access to the frames, masks and ground truth of one scene.
class SceneRenderer {
 public:
  explicit SceneRenderer(SceneSpec spec);

  const SceneSpec& spec() const { return spec_; }
  int frame_count() const { return static_cast<int>(xs_.size()); }
  int pair_count() const { return frame_count() - 1; }

  // Top-left body position in frame k.
  int body_x(int k) const { return xs_.at(k); }
  int body_y(int k) const { return ys_.at(k); }

  Frame render_clean(int k) const;
  Frame render(int k) const;  // with every noise source applied
  BodyMask mask(int k) const;
  BodyMask pair_mask(int t) const;
  FlowField gt_flow(int t) const;
  // Mean ground-truth flow magnitude over mask(t).
  double gt_speed(int t) const;
  SpeedSeries gt_speeds() const;

 private:
  bool inside_body(int bx, int by) const;

  SceneSpec spec_;
  std::vector<int> xs_;
  std::vector<int> ys_;
  std::vector<std::uint8_t> background_;
  std::vector<std::uint8_t> body_;
};

struct SyntheticSequence {
  std::vector<Frame> frames;
  std::vector<FlowField> gt_flow;  // per pair
  std::vector<BodyMask> masks;     // per frame
  SpeedSeries gt_speed;
};

SyntheticSequence generate(const SceneSpec& spec);

// Applies one noise source to every frame; frame k uses a stream derived
// from (seed, frame index), so subsets of a sequence get the same noise.
// masks (one per frame, optional) protect body pixels from background motion.
std::vector<Frame> inject_noise(std::vector<Frame> frames, const NoiseSpec& spec, std::uint64_t seed,
                                std::span<const BodyMask> masks = {});

// Writes frames (PPM), masks (PGM), ground-truth flow (.flo), gt_speed.csv,
// scene.txt and manifest.json under dir; returns the manifest path.
std::filesystem::path write_sequence(const SceneSpec& spec, const std::filesystem::path& dir);

}  // namespace opph
