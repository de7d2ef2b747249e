#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opph/errors.hpp"

namespace opph {

// Axis-aligned pixel rectangle, half-open: [x, x + width) x [y, y + height).
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  bool operator==(const Rect&) const = default;
};

// One 8-bit RGB image, interleaved R,G,B, row-major.
class Frame {
 public:
  Frame(int width, int height, std::vector<std::uint8_t> rgb, int index = 0, double fps = 30.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int index() const { return index_; }
  double fps() const { return fps_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  std::span<const std::uint8_t> pixels() const { return rgb_; }
  std::uint8_t at(int x, int y, int channel) const {
    return rgb_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }

  bool operator==(const Frame&) const = default;

 private:
  int width_;
  int height_;
  int index_;
  double fps_;
  std::vector<std::uint8_t> rgb_;
};

namespace detail {

void check_dimensions(int width, int height, const char* what);
void check_binary(std::span<const std::uint8_t> values, const char* what);

}  // namespace detail

// Per-pixel {0,1} plane. The tag keeps motion images and body masks apart
// at the type level while sharing one representation.
template <class Tag>
class BinaryPlane {
 public:
  BinaryPlane() = default;

  BinaryPlane(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    detail::check_dimensions(width, height, Tag::name);
    if (fill > 1) throw InvalidArgument(std::string(Tag::name) + ": fill value must be 0 or 1");
    values_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  BinaryPlane(int width, int height, std::vector<std::uint8_t> values)
      : width_(width), height_(height), values_(std::move(values)) {
    detail::check_dimensions(width, height, Tag::name);
    if (values_.size() != static_cast<std::size_t>(width) * height) {
      throw InvalidArgument(std::string(Tag::name) + ": buffer length does not match dimensions");
    }
    detail::check_binary(values_, Tag::name);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  std::uint8_t operator()(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(int x, int y, bool on) { values_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }

  std::span<const std::uint8_t> values() const { return values_; }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t v : values_) n += v;
    return n;
  }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }

  bool operator==(const BinaryPlane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> values_;
};

struct BinaryImageTag {
  static constexpr const char* name = "BinaryImage";
};
struct BodyMaskTag {
  static constexpr const char* name = "BodyMask";
};

using BinaryImage = BinaryPlane<BinaryImageTag>;
using BodyMask = BinaryPlane<BodyMaskTag>;

// Pointwise OR of two frame masks; the mask used for a frame pair.
BodyMask combine_masks(const BodyMask& a, const BodyMask& b);

// Tightest rectangle holding every 1-pixel; empty when the mask is empty.
Rect bounding_box(const BodyMask& mask);

// Part labels per pixel, 0 = background, k >= 1 = body part k.
class PartMask {
 public:
  PartMask(int width, int height, std::vector<std::uint16_t> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint16_t> labels() const { return labels_; }
  std::uint16_t operator()(int x, int y) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  // Largest label present (0 for an all-background image).
  int max_label() const { return max_label_; }
  BodyMask body() const;

  bool operator==(const PartMask&) const = default;

 private:
  int width_;
  int height_;
  int max_label_ = 0;
  std::vector<std::uint16_t> labels_;
};

// Dense motion field in pixels/frame, components stored as separate planes.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height);
  FlowField(int width, int height, std::vector<float> vx, std::vector<float> vy);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return vx_.size(); }

  std::span<const float> vx() const { return vx_; }
  std::span<const float> vy() const { return vy_; }
  float vx(int x, int y) const { return vx_[static_cast<std::size_t>(y) * width_ + x]; }
  float vy(int x, int y) const { return vy_[static_cast<std::size_t>(y) * width_ + x]; }

  bool operator==(const FlowField&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> vx_;
  std::vector<float> vy_;
};

struct Joint {
  double x = 0.0;
  double y = 0.0;
  bool present = true;

  bool operator==(const Joint&) const = default;
};

// Per-frame 2D joints of one person; every frame carries the same joint count.
class PoseTrack {
 public:
  PoseTrack(std::vector<std::vector<Joint>> frames, double fps);

  std::size_t frame_count() const { return frames_.size(); }
  std::size_t joint_count() const { return frames_.front().size(); }
  double fps() const { return fps_; }
  const std::vector<Joint>& frame(std::size_t t) const { return frames_.at(t); }

  bool operator==(const PoseTrack&) const = default;

 private:
  std::vector<std::vector<Joint>> frames_;
  double fps_;
};

// Speeds between consecutive frames, pixels/frame; length is frames - 1.
class SpeedSeries {
 public:
  SpeedSeries() = default;
  SpeedSeries(std::vector<double> values, double fps);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double fps() const { return fps_; }
  double operator[](std::size_t t) const { return values_[t]; }
  std::span<const double> values() const { return values_; }

  bool operator==(const SpeedSeries&) const = default;

 private:
  std::vector<double> values_;
  double fps_ = 30.0;
};

// Motion indicator per frame pair before (raw) and after (filtered) the
// temporal median.
class GateSignal {
 public:
  GateSignal() = default;
  GateSignal(std::vector<std::uint8_t> raw, std::vector<std::uint8_t> filtered);

  std::size_t size() const { return raw_.size(); }
  std::span<const std::uint8_t> raw() const { return raw_; }
  std::span<const std::uint8_t> filtered() const { return filtered_; }

  bool operator==(const GateSignal&) const = default;

 private:
  std::vector<std::uint8_t> raw_;
  std::vector<std::uint8_t> filtered_;
};

class OpphConfig {
 public:
  static constexpr int kDefaultTheta = 20;

  OpphConfig(int theta, int n, int m, int min_active_pixels = 1);

  int theta() const { return theta_; }
  // Side of the square spatial median window.
  int n() const { return n_; }
  // Length of the temporal median window, in frames.
  int m() const { return m_; }
  int min_active_pixels() const { return min_active_pixels_; }

  bool operator==(const OpphConfig&) const = default;

 private:
  int theta_;
  int n_;
  int m_;
  int min_active_pixels_;
};

// Smallest odd integer >= k.
int make_odd(int k);

// theta 20; n = 5 from 640x480 pixels upward, else 3; m = fps/2 forced odd.
OpphConfig default_config(int width, int height, double fps);

}  // namespace opph
