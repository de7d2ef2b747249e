#include "opph/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "opph/io_formats.hpp"
#include "opph/speed_metrics.hpp"

namespace opph {

namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xorshift64Star::Xorshift64Star(std::uint64_t seed) {
  std::uint64_t s = seed;
  state_ = splitmix64(s);
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (a * 0xD1B54A32D192ED03ULL);
  h = splitmix64(s);
  s = h ^ (b * 0xAEF17502108EF2D9ULL);
  return splitmix64(s);
}

// --- noise --------------------------------------------------------------------

NoiseSpec NoiseSpec::gaussian(double sigma) {
  NoiseSpec s;
  s.kind = NoiseKind::gaussian_sensor;
  s.sigma = sigma;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::salt(double rate) {
  NoiseSpec s;
  s.kind = NoiseKind::salt;
  s.rate = rate;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::flicker(int amplitude, int duration, int period, int start) {
  NoiseSpec s;
  s.kind = NoiseKind::global_flicker;
  s.amplitude = amplitude;
  s.duration = duration;
  s.period = period;
  s.start = start < 0 ? period : start;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::background_motion(Rect region, double vx, double vy) {
  NoiseSpec s;
  s.kind = NoiseKind::background_motion;
  s.region = region;
  s.vx = vx;
  s.vy = vy;
  s.validate();
  return s;
}

bool NoiseSpec::flicker_active(int k) const {
  return kind == NoiseKind::global_flicker && k >= start && (k - start) % period < duration;
}

void NoiseSpec::validate() const {
  switch (kind) {
    case NoiseKind::gaussian_sensor:
      if (!(sigma >= 0.0) || sigma > 64.0) {
        throw InvalidArgument("gaussian_sensor: sigma must lie in [0, 64]");
      }
      break;
    case NoiseKind::salt:
      if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("salt: rate must lie in [0, 1]");
      break;
    case NoiseKind::global_flicker:
      if (duration < 1) throw InvalidArgument("global_flicker: duration must be at least 1");
      if (period < 1) throw InvalidArgument("global_flicker: period must be at least 1");
      if (start < 0) throw InvalidArgument("global_flicker: start must be non-negative");
      if (amplitude < -255 || amplitude > 255) {
        throw InvalidArgument("global_flicker: amplitude must lie in [-255, 255]");
      }
      break;
    case NoiseKind::background_motion:
      if (region.empty() || region.x < 0 || region.y < 0) {
        throw InvalidArgument("background_motion: region must be a non-empty rectangle");
      }
      if (!std::isfinite(vx) || !std::isfinite(vy)) {
        throw InvalidArgument("background_motion: velocity must be finite");
      }
      break;
  }
}

namespace {

// Maps 16 random bits to a rounded N(0, sigma^2) integer by inverting the
// CDF of the rounded distribution.
std::vector<std::int16_t> gaussian_table(double sigma) {
  std::vector<std::int16_t> table(65536, 0);
  if (sigma == 0.0) return table;
  auto cdf_upto = [&](int k) {  // P(round(X) <= k)
    return 0.5 * std::erfc(-(k + 0.5) / (sigma * std::sqrt(2.0)));
  };
  int k = -static_cast<int>(std::ceil(10.0 * sigma)) - 1;
  double c = cdf_upto(k);
  for (int u = 0; u < 65536; ++u) {
    const double p = (u + 0.5) / 65536.0;
    while (c < p) c = cdf_upto(++k);
    table[u] = static_cast<std::int16_t>(k);
  }
  return table;
}

// Tables are shared between appliers; building one costs 64k erfc calls.
std::shared_ptr<const std::vector<std::int16_t>> cached_gaussian_table(double sigma) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const std::vector<std::int16_t>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[sigma];
  if (!slot) slot = std::make_shared<const std::vector<std::int16_t>>(gaussian_table(sigma));
  return slot;
}

std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

int floor_mod(long a, long b) { return static_cast<int>(((a % b) + b) % b); }

class NoiseApplier {
 public:
  NoiseApplier(const NoiseSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
    spec_.validate();
    if (spec_.kind == NoiseKind::gaussian_sensor) table_ = cached_gaussian_table(spec_.sigma);
  }

  void apply(std::vector<std::uint8_t>& rgb, int width, int height, int k,
             const BodyMask* mask) const {
    switch (spec_.kind) {
      case NoiseKind::gaussian_sensor: {
        if (spec_.sigma == 0.0) return;
        Xorshift64Star rng(derive_seed(seed_, static_cast<std::uint64_t>(k)));
        const std::int16_t* t = table_->data();
        std::size_t i = 0;
        const std::size_t n = rgb.size();
        while (i < n) {
          std::uint64_t bits = rng.next();
          for (int lane = 0; lane < 4 && i < n; ++lane, ++i, bits >>= 16) {
            rgb[i] = clamp_u8(rgb[i] + t[bits & 0xFFFF]);
          }
        }
        return;
      }
      case NoiseKind::salt: {
        if (spec_.rate == 0.0) return;
        Xorshift64Star rng(derive_seed(seed_, static_cast<std::uint64_t>(k)));
        const std::size_t pixels = rgb.size() / 3;
        for (std::size_t p = 0; p < pixels; ++p) {
          const std::uint64_t r = rng.next();
          if (static_cast<double>(r >> 11) * 0x1.0p-53 < spec_.rate) {
            const std::uint8_t v = (r & 1) ? 255 : 0;
            rgb[3 * p] = rgb[3 * p + 1] = rgb[3 * p + 2] = v;
          }
        }
        return;
      }
      case NoiseKind::global_flicker: {
        if (!spec_.flicker_active(k)) return;
        for (auto& v : rgb) v = clamp_u8(v + spec_.amplitude);
        return;
      }
      case NoiseKind::background_motion: {
        const Rect r{spec_.region.x, spec_.region.y,
                     std::min(spec_.region.width, width - spec_.region.x),
                     std::min(spec_.region.height, height - spec_.region.y)};
        if (r.empty()) return;
        const long dx = std::lround(spec_.vx * k);
        const long dy = std::lround(spec_.vy * k);
        if (dx == 0 && dy == 0) return;
        const std::vector<std::uint8_t> source(rgb);
        for (int y = 0; y < r.height; ++y) {
          const int sy = r.y + floor_mod(y - dy, r.height);
          for (int x = 0; x < r.width; ++x) {
            const int px = r.x + x, py = r.y + y;
            if (mask && (*mask)(px, py)) continue;
            const int sx = r.x + floor_mod(x - dx, r.width);
            const std::size_t d = (static_cast<std::size_t>(py) * width + px) * 3;
            const std::size_t s = (static_cast<std::size_t>(sy) * width + sx) * 3;
            rgb[d] = source[s];
            rgb[d + 1] = source[s + 1];
            rgb[d + 2] = source[s + 2];
          }
        }
        return;
      }
    }
  }

 private:
  NoiseSpec spec_;
  std::uint64_t seed_;
  std::shared_ptr<const std::vector<std::int16_t>> table_;
};

// --- textures -----------------------------------------------------------------

int lattice(std::uint64_t seed, long cx, long cy) {
  std::uint64_t s = seed ^ (static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ULL) ^
                    (static_cast<std::uint64_t>(cy) * 0xC2B2AE3D27D4EB4FULL);
  return static_cast<int>(splitmix64(s) >> 56);
}

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Bilinear value noise in [0, 255], integer arithmetic throughout.
int value_noise(std::uint64_t seed, int scale, long x, long y) {
  const long cx = floor_div(x, scale), cy = floor_div(y, scale);
  const long fx = x - cx * scale, fy = y - cy * scale;
  const long v00 = lattice(seed, cx, cy), v10 = lattice(seed, cx + 1, cy);
  const long v01 = lattice(seed, cx, cy + 1), v11 = lattice(seed, cx + 1, cy + 1);
  const long s = scale;
  const long top = v00 * (s - fx) + v10 * fx;
  const long bot = v01 * (s - fx) + v11 * fx;
  return static_cast<int>((top * (s - fy) + bot * fy) / (s * s));
}

// Texture of w x h RGB pixels. Channels share one luminance pattern with
// per-channel gain so that edges change all three channels together.
std::vector<std::uint8_t> make_texture(std::uint64_t seed, int scale, int w, int h) {
  std::uint64_t s = seed;
  int gain[3];
  int base[3];
  for (int c = 0; c < 3; ++c) {
    const std::uint64_t r = splitmix64(s);
    gain[c] = 160 + static_cast<int>(r % 41);       // 160 .. 200
    base[c] = 20 + static_cast<int>((r >> 8) % 8);  // 20 .. 27
  }
  const std::uint64_t noise_seed = splitmix64(s);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int lum = value_noise(noise_seed, scale, x, y);
      const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
      for (int c = 0; c < 3; ++c) out[i + c] = static_cast<std::uint8_t>(base[c] + lum * gain[c] / 256);
    }
  }
  return out;
}

const char* shape_name(BodyShape s) { return s == BodyShape::ellipse ? "ellipse" : "rectangle"; }

}  // namespace

std::vector<Frame> inject_noise(std::vector<Frame> frames, const NoiseSpec& spec, std::uint64_t seed,
                                std::span<const BodyMask> masks) {
  if (!masks.empty() && masks.size() != frames.size()) {
    throw InvalidArgument("inject_noise: expected one mask per frame");
  }
  const NoiseApplier noise(spec, seed);
  std::vector<Frame> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    std::vector<std::uint8_t> rgb(f.pixels().begin(), f.pixels().end());
    noise.apply(rgb, f.width(), f.height(), f.index(), masks.empty() ? nullptr : &masks[i]);
    out.emplace_back(f.width(), f.height(), std::move(rgb), f.index(), f.fps());
  }
  return out;
}

// --- scenes -------------------------------------------------------------------

int SceneSpec::frame_count() const {
  long total = 1;
  for (const auto& seg : motion) total += seg.duration;
  return static_cast<int>(std::min<long>(total, 1L << 30));
}

void SceneSpec::validate() const {
  detail::check_dimensions(width, height, "SceneSpec");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidArgument("SceneSpec: fps must be positive");
  if (background_scale < 1 || body_scale < 1) {
    throw InvalidArgument("SceneSpec: texture scales must be at least 1");
  }
  if (body_width < 1 || body_height < 1 || body_width > width || body_height > height) {
    throw InvalidArgument("SceneSpec: body must be non-empty and fit the canvas");
  }
  if (motion.empty()) throw InvalidArgument("SceneSpec: motion program is empty");
  for (const auto& seg : motion) {
    if (seg.duration < 1) throw InvalidArgument("SceneSpec: segment durations must be >= 1");
    if (!std::isfinite(seg.vx) || !std::isfinite(seg.vy)) {
      throw InvalidArgument("SceneSpec: segment velocity must be finite");
    }
  }
  for (const auto& n : noise) n.validate();
  if (id.empty() || id.find_first_of(", \t\n") != std::string::npos) {
    throw InvalidArgument("SceneSpec: id must be a non-empty token");
  }
}

SceneRenderer::SceneRenderer(SceneSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int x0 = spec_.start_x < 0 ? (spec_.width - spec_.body_width) / 2 : spec_.start_x;
  const int y0 = spec_.start_y < 0 ? (spec_.height - spec_.body_height) / 2 : spec_.start_y;
  double ax = 0.0, ay = 0.0;
  xs_.push_back(x0);
  ys_.push_back(y0);
  for (const auto& seg : spec_.motion) {
    for (int i = 0; i < seg.duration; ++i) {
      ax += seg.vx;
      ay += seg.vy;
      xs_.push_back(x0 + static_cast<int>(std::lround(ax)));
      ys_.push_back(y0 + static_cast<int>(std::lround(ay)));
    }
  }
  for (std::size_t k = 0; k < xs_.size(); ++k) {
    if (xs_[k] < 0 || ys_[k] < 0 || xs_[k] + spec_.body_width > spec_.width ||
        ys_[k] + spec_.body_height > spec_.height) {
      throw InvalidArgument("SceneSpec '" + spec_.id + "': body leaves the canvas at frame " +
                            std::to_string(k) + " (position " + std::to_string(xs_[k]) + ", " +
                            std::to_string(ys_[k]) + ")");
    }
  }
  background_ = make_texture(spec_.background_seed, spec_.background_scale, spec_.width, spec_.height);
  body_ = make_texture(spec_.body_seed, spec_.body_scale, spec_.body_width, spec_.body_height);
}

bool SceneRenderer::inside_body(int bx, int by) const {
  if (spec_.shape == BodyShape::rectangle) return true;
  // (2bx + 1 - w)^2 / w^2 + (2by + 1 - h)^2 / h^2 <= 1, in integers.
  const long w = spec_.body_width, h = spec_.body_height;
  const long dx = 2L * bx + 1 - w, dy = 2L * by + 1 - h;
  return dx * dx * h * h + dy * dy * w * w <= w * w * h * h;
}

Frame SceneRenderer::render_clean(int k) const {
  std::vector<std::uint8_t> rgb(background_);
  const int px = xs_.at(k), py = ys_.at(k);
  for (int by = 0; by < spec_.body_height; ++by) {
    for (int bx = 0; bx < spec_.body_width; ++bx) {
      if (!inside_body(bx, by)) continue;
      const std::size_t d = (static_cast<std::size_t>(py + by) * spec_.width + px + bx) * 3;
      const std::size_t s = (static_cast<std::size_t>(by) * spec_.body_width + bx) * 3;
      std::copy_n(body_.begin() + static_cast<std::ptrdiff_t>(s), 3, rgb.begin() + static_cast<std::ptrdiff_t>(d));
    }
  }
  return Frame(spec_.width, spec_.height, std::move(rgb), k, spec_.fps);
}

Frame SceneRenderer::render(int k) const {
  if (spec_.noise.empty()) return render_clean(k);
  const Frame clean = render_clean(k);
  std::vector<std::uint8_t> rgb(clean.pixels().begin(), clean.pixels().end());
  const BodyMask m = mask(k);
  for (std::size_t i = 0; i < spec_.noise.size(); ++i) {
    NoiseApplier(spec_.noise[i], derive_seed(spec_.seed, i + 1))
        .apply(rgb, spec_.width, spec_.height, k, &m);
  }
  return Frame(spec_.width, spec_.height, std::move(rgb), k, spec_.fps);
}

BodyMask SceneRenderer::mask(int k) const {
  BodyMask m(spec_.width, spec_.height);
  const int px = xs_.at(k), py = ys_.at(k);
  for (int by = 0; by < spec_.body_height; ++by) {
    for (int bx = 0; bx < spec_.body_width; ++bx) {
      if (inside_body(bx, by)) m.set(px + bx, py + by, true);
    }
  }
  return m;
}

BodyMask SceneRenderer::pair_mask(int t) const { return combine_masks(mask(t), mask(t + 1)); }

FlowField SceneRenderer::gt_flow(int t) const {
  const float dx = static_cast<float>(xs_.at(t + 1) - xs_.at(t));
  const float dy = static_cast<float>(ys_.at(t + 1) - ys_.at(t));
  const BodyMask m = mask(t);
  std::vector<float> vx(m.size(), 0.0f), vy(m.size(), 0.0f);
  auto mv = m.values();
  for (std::size_t i = 0; i < mv.size(); ++i) {
    if (mv[i]) {
      vx[i] = dx;
      vy[i] = dy;
    }
  }
  return FlowField(spec_.width, spec_.height, std::move(vx), std::move(vy));
}

double SceneRenderer::gt_speed(int t) const { return flow_speed(gt_flow(t), mask(t)); }

SpeedSeries SceneRenderer::gt_speeds() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(pair_count()));
  for (int t = 0; t < pair_count(); ++t) out.push_back(gt_speed(t));
  return SpeedSeries(std::move(out), spec_.fps);
}

SyntheticSequence generate(const SceneSpec& spec) {
  const SceneRenderer scene(spec);
  SyntheticSequence seq;
  std::vector<NoiseApplier> noise;
  for (std::size_t i = 0; i < spec.noise.size(); ++i) {
    noise.emplace_back(spec.noise[i], derive_seed(spec.seed, i + 1));
  }
  std::vector<double> speeds;
  for (int k = 0; k < scene.frame_count(); ++k) {
    BodyMask m = scene.mask(k);
    const Frame clean = scene.render_clean(k);
    std::vector<std::uint8_t> rgb(clean.pixels().begin(), clean.pixels().end());
    for (const auto& n : noise) n.apply(rgb, spec.width, spec.height, k, &m);
    seq.frames.emplace_back(spec.width, spec.height, std::move(rgb), k, spec.fps);
    seq.masks.push_back(std::move(m));
  }
  for (int t = 0; t < scene.pair_count(); ++t) {
    seq.gt_flow.push_back(scene.gt_flow(t));
    speeds.push_back(flow_speed(seq.gt_flow.back(), seq.masks[t]));
  }
  seq.gt_speed = SpeedSeries(std::move(speeds), spec.fps);
  return seq;
}

// --- scene text format --------------------------------------------------------

namespace {

template <class T>
T token_as(std::istringstream& in, std::string_view source, std::size_t line, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw ParseError(std::string(source), line, std::string("missing ") + what);
  T v{};
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError(std::string(source), line, std::string("bad ") + what + " '" + tok + "'");
  }
  return v;
}

}  // namespace

SceneSpec parse_scene(std::string_view text, std::string_view source) {
  SceneSpec spec;
  spec.motion.clear();
  std::istringstream all{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(all, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream in(raw);
    std::string key;
    if (!(in >> key)) continue;
    if (key == "id") {
      if (!(in >> spec.id)) throw ParseError(std::string(source), line, "missing id");
    } else if (key == "size") {
      spec.width = token_as<int>(in, source, line, "width");
      spec.height = token_as<int>(in, source, line, "height");
    } else if (key == "fps") {
      spec.fps = token_as<double>(in, source, line, "fps");
    } else if (key == "seed") {
      spec.seed = token_as<std::uint64_t>(in, source, line, "seed");
    } else if (key == "background") {
      spec.background_seed = token_as<std::uint64_t>(in, source, line, "background seed");
      spec.background_scale = token_as<int>(in, source, line, "background scale");
    } else if (key == "body") {
      std::string shape;
      in >> shape;
      if (shape == "ellipse") {
        spec.shape = BodyShape::ellipse;
      } else if (shape == "rectangle") {
        spec.shape = BodyShape::rectangle;
      } else {
        throw ParseError(std::string(source), line, "body shape must be ellipse or rectangle");
      }
      spec.body_width = token_as<int>(in, source, line, "body width");
      spec.body_height = token_as<int>(in, source, line, "body height");
      spec.body_seed = token_as<std::uint64_t>(in, source, line, "body seed");
      spec.body_scale = token_as<int>(in, source, line, "body scale");
    } else if (key == "start") {
      std::string first;
      in >> first;
      if (first == "center") {
        spec.start_x = spec.start_y = -1;
      } else {
        std::istringstream again(first + " " + std::string(std::istreambuf_iterator<char>(in), {}));
        spec.start_x = token_as<int>(again, source, line, "start x");
        spec.start_y = token_as<int>(again, source, line, "start y");
      }
    } else if (key == "segment") {
      MotionSegment seg;
      seg.duration = token_as<int>(in, source, line, "duration");
      seg.vx = token_as<double>(in, source, line, "vx");
      seg.vy = token_as<double>(in, source, line, "vy");
      spec.motion.push_back(seg);
    } else if (key == "noise") {
      std::string kind;
      in >> kind;
      try {
        if (kind == "gaussian") {
          spec.noise.push_back(NoiseSpec::gaussian(token_as<double>(in, source, line, "sigma")));
        } else if (kind == "salt") {
          spec.noise.push_back(NoiseSpec::salt(token_as<double>(in, source, line, "rate")));
        } else if (kind == "flicker") {
          const int amp = token_as<int>(in, source, line, "amplitude");
          const int dur = token_as<int>(in, source, line, "duration");
          const int per = token_as<int>(in, source, line, "period");
          const int start = token_as<int>(in, source, line, "start");
          spec.noise.push_back(NoiseSpec::flicker(amp, dur, per, start));
        } else if (kind == "background_motion") {
          Rect r;
          r.x = token_as<int>(in, source, line, "region x");
          r.y = token_as<int>(in, source, line, "region y");
          r.width = token_as<int>(in, source, line, "region width");
          r.height = token_as<int>(in, source, line, "region height");
          const double vx = token_as<double>(in, source, line, "vx");
          const double vy = token_as<double>(in, source, line, "vy");
          spec.noise.push_back(NoiseSpec::background_motion(r, vx, vy));
        } else {
          throw ParseError(std::string(source), line, "unknown noise kind '" + kind + "'");
        }
      } catch (const InvalidArgument& e) {
        throw ParseError(std::string(source), line, e.what());
      }
    } else {
      throw ParseError(std::string(source), line, "unknown key '" + key + "'");
    }
    std::string extra;
    if (in >> extra) throw ParseError(std::string(source), line, "unexpected '" + extra + "'");
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string(source), line, e.what());
  }
  return spec;
}

std::string format_scene(const SceneSpec& spec) {
  std::ostringstream out;
  out << "id " << spec.id << "\n";
  out << "size " << spec.width << " " << spec.height << "\n";
  out << "fps " << format_number(spec.fps) << "\n";
  out << "seed " << spec.seed << "\n";
  out << "background " << spec.background_seed << " " << spec.background_scale << "\n";
  out << "body " << shape_name(spec.shape) << " " << spec.body_width << " " << spec.body_height
      << " " << spec.body_seed << " " << spec.body_scale << "\n";
  if (spec.start_x < 0 || spec.start_y < 0) {
    out << "start center\n";
  } else {
    out << "start " << spec.start_x << " " << spec.start_y << "\n";
  }
  for (const auto& seg : spec.motion) {
    out << "segment " << seg.duration << " " << format_number(seg.vx) << " "
        << format_number(seg.vy) << "\n";
  }
  for (const auto& n : spec.noise) {
    switch (n.kind) {
      case NoiseKind::gaussian_sensor: out << "noise gaussian " << format_number(n.sigma) << "\n"; break;
      case NoiseKind::salt: out << "noise salt " << format_number(n.rate) << "\n"; break;
      case NoiseKind::global_flicker:
        out << "noise flicker " << n.amplitude << " " << n.duration << " " << n.period << " "
            << n.start << "\n";
        break;
      case NoiseKind::background_motion:
        out << "noise background_motion " << n.region.x << " " << n.region.y << " "
            << n.region.width << " " << n.region.height << " " << format_number(n.vx) << " "
            << format_number(n.vy) << "\n";
        break;
    }
  }
  return out.str();
}

fs::path write_sequence(const SceneSpec& spec, const fs::path& dir) {
  const SyntheticSequence seq = generate(spec);
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "masks");
  fs::create_directories(dir / "flow");
  SequenceManifest manifest;
  manifest.id = spec.id;
  manifest.fps = spec.fps;
  char name[64];
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    std::snprintf(name, sizeof name, "%06zu", k);
    const fs::path fp = dir / "frames" / (std::string(name) + ".ppm");
    const fs::path mp = dir / "masks" / (std::string(name) + ".pgm");
    write_frame(fp, seq.frames[k]);
    write_mask(mp, seq.masks[k]);
    manifest.frames.push_back(fp);
    manifest.masks.push_back(mp);
  }
  for (std::size_t t = 0; t < seq.gt_flow.size(); ++t) {
    std::snprintf(name, sizeof name, "%06zu", t);
    const fs::path fp = dir / "flow" / (std::string(name) + ".flo");
    write_flo_file(fp, seq.gt_flow[t]);
    manifest.flows.push_back(fp);
  }
  manifest.gt_speed = dir / "gt_speed.csv";
  write_gt_speed(*manifest.gt_speed, seq.gt_speed);
  write_text(dir / "scene.txt", format_scene(spec));
  const fs::path mpath = dir / "manifest.json";
  write_manifest(mpath, manifest);
  return mpath;
}

}  // namespace opph
