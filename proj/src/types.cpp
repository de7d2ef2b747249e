#include "opph/types.hpp"

#include <algorithm>
#include <cmath>

namespace opph {

namespace detail {

void check_dimensions(int width, int height, const char* what) {
  if (width < 1 || height < 1) {
    throw InvalidArgument(std::string(what) + ": dimensions must be positive, got " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
}

void check_binary(std::span<const std::uint8_t> values, const char* what) {
  std::uint8_t acc = 0;
  for (std::uint8_t v : values) acc |= v;
  if (acc > 1) throw InvalidArgument(std::string(what) + ": values must be 0 or 1");
}

}  // namespace detail

namespace {

bool valid_fps(double fps) { return std::isfinite(fps) && fps > 0.0; }

}  // namespace

Frame::Frame(int width, int height, std::vector<std::uint8_t> rgb, int index, double fps)
    : width_(width), height_(height), index_(index), fps_(fps), rgb_(std::move(rgb)) {
  detail::check_dimensions(width, height, "Frame");
  if (rgb_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw InvalidArgument("Frame: pixel buffer length must be width*height*3");
  }
  if (index < 0) throw InvalidArgument("Frame: index must be non-negative");
  if (!valid_fps(fps)) throw InvalidArgument("Frame: fps must be positive");
}

BodyMask combine_masks(const BodyMask& a, const BodyMask& b) {
  if (!a.same_shape(b.width(), b.height())) {
    throw InvalidArgument("combine_masks: mask dimensions differ");
  }
  std::vector<std::uint8_t> out(a.size());
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] | vb[i];
  return BodyMask(a.width(), a.height(), std::move(out));
}

Rect bounding_box(const BodyMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

PartMask::PartMask(int width, int height, std::vector<std::uint16_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  detail::check_dimensions(width, height, "PartMask");
  if (labels_.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidArgument("PartMask: buffer length does not match dimensions");
  }
  for (std::uint16_t v : labels_) max_label_ = std::max<int>(max_label_, v);
}

BodyMask PartMask::body() const {
  std::vector<std::uint8_t> out(labels_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = labels_[i] != 0;
  return BodyMask(width_, height_, std::move(out));
}

FlowField::FlowField(int width, int height) : width_(width), height_(height) {
  detail::check_dimensions(width, height, "FlowField");
  vx_.assign(static_cast<std::size_t>(width) * height, 0.0f);
  vy_.assign(vx_.size(), 0.0f);
}

FlowField::FlowField(int width, int height, std::vector<float> vx, std::vector<float> vy)
    : width_(width), height_(height), vx_(std::move(vx)), vy_(std::move(vy)) {
  detail::check_dimensions(width, height, "FlowField");
  const auto n = static_cast<std::size_t>(width) * height;
  if (vx_.size() != n || vy_.size() != n) {
    throw InvalidArgument("FlowField: component length does not match dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(vx_[i]) || !std::isfinite(vy_[i])) {
      throw InvalidArgument("FlowField: non-finite vector at pixel " + std::to_string(i));
    }
  }
}

PoseTrack::PoseTrack(std::vector<std::vector<Joint>> frames, double fps)
    : frames_(std::move(frames)), fps_(fps) {
  if (!valid_fps(fps)) throw InvalidArgument("PoseTrack: fps must be positive");
  if (frames_.empty()) throw InvalidArgument("PoseTrack: no frames");
  const std::size_t joints = frames_.front().size();
  if (joints == 0) throw InvalidArgument("PoseTrack: joint count must be at least 1");
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    if (frames_[t].size() != joints) {
      throw InvalidArgument("PoseTrack: frame " + std::to_string(t) + " has " +
                            std::to_string(frames_[t].size()) + " joints, expected " +
                            std::to_string(joints));
    }
    for (const Joint& j : frames_[t]) {
      if (j.present && (!std::isfinite(j.x) || !std::isfinite(j.y))) {
        throw InvalidArgument("PoseTrack: non-finite joint coordinate in frame " +
                              std::to_string(t));
      }
    }
  }
}

SpeedSeries::SpeedSeries(std::vector<double> values, double fps)
    : values_(std::move(values)), fps_(fps) {
  if (!valid_fps(fps)) throw InvalidArgument("SpeedSeries: fps must be positive");
  for (std::size_t t = 0; t < values_.size(); ++t) {
    if (!std::isfinite(values_[t]) || values_[t] < 0.0) {
      throw InvalidArgument("SpeedSeries: value at index " + std::to_string(t) +
                            " must be finite and non-negative");
    }
  }
}

GateSignal::GateSignal(std::vector<std::uint8_t> raw, std::vector<std::uint8_t> filtered)
    : raw_(std::move(raw)), filtered_(std::move(filtered)) {
  if (raw_.size() != filtered_.size()) {
    throw InvalidArgument("GateSignal: raw and filtered lengths differ");
  }
  detail::check_binary(raw_, "GateSignal");
  detail::check_binary(filtered_, "GateSignal");
}

OpphConfig::OpphConfig(int theta, int n, int m, int min_active_pixels)
    : theta_(theta), n_(n), m_(m), min_active_pixels_(min_active_pixels) {
  if (theta < 0 || theta > 255) {
    throw InvalidArgument("OpphConfig: theta must lie in [0, 255], got " + std::to_string(theta));
  }
  if (n < 1 || n % 2 == 0) {
    throw InvalidArgument("OpphConfig: n must be a positive odd integer, got " + std::to_string(n));
  }
  if (m < 1) throw InvalidArgument("OpphConfig: m must be at least 1, got " + std::to_string(m));
  if (min_active_pixels < 1) {
    throw InvalidArgument("OpphConfig: min_active_pixels must be at least 1");
  }
}

int make_odd(int k) { return k % 2 != 0 ? k : k + 1; }

OpphConfig default_config(int width, int height, double fps) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("default_config: dimensions must be positive");
  }
  if (!valid_fps(fps)) throw InvalidArgument("default_config: fps must be positive");
  const long long pixels = static_cast<long long>(width) * height;
  const int n = pixels >= 640LL * 480LL ? 5 : 3;
  const int m = make_odd(static_cast<int>(std::lround(fps / 2.0)));
  return OpphConfig(OpphConfig::kDefaultTheta, n, m, 1);
}

}  // namespace opph
