// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when a hard criterion fails. Pass criterion numbers as arguments
// to run a subset, e.g. `opph_acceptance 3 4 7`.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "opph/commands.hpp"
#include "opph/errors.hpp"
#include "opph/io_formats.hpp"
#include "opph/log.hpp"
#include "opph/operator.hpp"
#include "opph/speed_metrics.hpp"
#include "opph/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace opph;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool soft = false;  // failure is reported but does not fail the run
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

bool rel_close(double got, double want, double tol = 1e-9) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

// --- scene suites -----------------------------------------------------------------

// Static 640x480 scenes with sensor noise, salt and short flicker bursts.
std::vector<SceneSpec> static_suite() {
  const double sigmas[] = {1.0, 2.0, 4.0};
  std::vector<SceneSpec> out;
  for (int k = 0; k < 20; ++k) {
    SceneSpec s;
    s.id = "static" + std::to_string(k < 10 ? 0 : 1) + std::to_string(k % 10);
    s.width = 640;
    s.height = 480;
    s.fps = 30;
    s.seed = derive_seed(1000, k);
    s.background_seed = derive_seed(2000, k);
    s.body_seed = derive_seed(3000, k);
    s.background_scale = 4 + 2 * (k % 4);
    s.body_width = 60 + 4 * (k % 5);
    s.body_height = 100 + 6 * (k % 3);
    s.shape = k % 2 ? BodyShape::rectangle : BodyShape::ellipse;
    s.motion = {MotionSegment{299, 0, 0}};
    // m is 15 here, so bursts of at most 7 frames cannot survive the median.
    // Replicate padding extends the first and last indicator m/2 times, so a
    // burst edge inside the outer m/2 pairs would look like a long run;
    // shift the bursts until every edge is clear of both ends.
    NoiseSpec flicker = NoiseSpec::flicker(30, 3 + 2 * (k % 3), 60 + 7 * (k % 5), 25 + 3 * k);
    const int pairs = 299, half = 7;
    auto edges_clear = [&] {
      for (int t = 0; t < pairs; ++t) {
        const bool edge = flicker.flicker_active(t) != flicker.flicker_active(t + 1);
        if (edge && (t < half || t >= pairs - half)) return false;
      }
      return true;
    };
    while (!edges_clear()) ++flicker.start;
    s.noise = {NoiseSpec::gaussian(sigmas[k % 3]), NoiseSpec::salt(1e-4), flicker};
    out.push_back(s);
  }
  return out;
}

// Picks a unit direction keeping the body on the canvas for the whole segment.
// Returns false when no compass direction fits.
bool pick_direction(Xorshift64Star& rng, double x, double y, double speed, int dur, int max_x,
                    int max_y, double& dx, double& dy) {
  static const double kDirs[8][2] = {{1, 0},  {0, 1},  {-1, 0},  {0, -1},
                                     {1, 1},  {-1, 1}, {-1, -1}, {1, -1}};
  const int first = static_cast<int>(rng.next() % 8);
  for (int i = 0; i < 8; ++i) {
    const double* d = kDirs[(first + i) % 8];
    const double norm = std::hypot(d[0], d[1]);
    const double ex = x + d[0] / norm * speed * dur, ey = y + d[1] / norm * speed * dur;
    if (std::lround(ex) >= 0 && std::lround(ex) <= max_x && std::lround(ey) >= 0 &&
        std::lround(ey) <= max_y) {
      dx = d[0] / norm;
      dy = d[1] / norm;
      return true;
    }
  }
  return false;
}

// Moving-block scenes: integer speeds 1..5 along an axis, segments of at least
// 2m frames, some of them still.
std::vector<SceneSpec> moving_suite() {
  std::vector<SceneSpec> out;
  for (int k = 0; k < 20; ++k) {
    Xorshift64Star rng(derive_seed(4000, k));
    SceneSpec s;
    s.id = "moving" + std::to_string(k / 10) + std::to_string(k % 10);
    s.width = 320;
    s.height = 240;
    s.fps = 30;
    s.seed = derive_seed(5000, k);
    s.background_seed = derive_seed(6000, k);
    s.body_seed = derive_seed(7000, k);
    s.body_width = 40;
    s.body_height = 40;
    s.start_x = 140;
    s.start_y = 100;
    s.noise = {NoiseSpec::gaussian(2)};
    const int max_x = s.width - s.body_width, max_y = s.height - s.body_height;
    double x = s.start_x, y = s.start_y;
    for (int seg = 0; seg < 8; ++seg) {
      const int dur = 30 + static_cast<int>(rng.next() % 16);
      int speed = 1 + static_cast<int>(rng.next() % 5);
      if (rng.uniform() < 0.2) speed = 0;
      // Axis-aligned only, so per-frame displacements stay integral.
      double dx = 0, dy = 0;
      const int axis = static_cast<int>(rng.next() % 4);
      const double ax[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (int i = 0; i < 4 && speed > 0; ++i) {
        const double* d = ax[(axis + i) % 4];
        const double ex = x + d[0] * speed * dur, ey = y + d[1] * speed * dur;
        if (ex >= 0 && ex <= max_x && ey >= 0 && ey <= max_y) {
          dx = d[0];
          dy = d[1];
          break;
        }
      }
      if (dx == 0 && dy == 0) speed = 0;
      s.motion.push_back(MotionSegment{dur, dx * speed, dy * speed});
      x += dx * speed * dur;
      y += dy * speed * dur;
    }
    out.push_back(s);
  }
  return out;
}

// Thirty minutes at 10 fps; segment speeds follow a slow sinusoid with
// multiplicative jitter and occasional still segments.
SceneSpec trend_scene() {
  Xorshift64Star rng(derive_seed(8000, 1));
  SceneSpec s;
  s.id = "trend";
  s.width = 160;
  s.height = 120;
  s.fps = 10;
  s.seed = 81;
  s.background_seed = 82;
  s.body_seed = 83;
  s.background_scale = 6;
  s.body_width = 32;
  s.body_height = 32;
  s.start_x = 64;
  s.start_y = 44;
  s.noise = {NoiseSpec::gaussian(2), NoiseSpec::salt(1e-4)};
  const int pairs = 18000 - 1;
  const int max_x = s.width - s.body_width, max_y = s.height - s.body_height;
  const double pi = std::acos(-1.0);
  double x = s.start_x, y = s.start_y;
  int t = 0;
  while (t < pairs) {
    const int dur = std::min(pairs - t, 20 + static_cast<int>(rng.next() % 21));
    const double minutes = t / s.fps / 60.0;
    const double trend = 1.25 + std::sin(2.0 * pi * minutes / 10.0);
    double speed = trend * (0.8 + 0.4 * rng.uniform());
    if (rng.uniform() < 0.25) speed = 0.0;
    double dx = 0, dy = 0;
    if (speed > 0 && !pick_direction(rng, x, y, speed, dur, max_x, max_y, dx, dy)) speed = 0.0;
    s.motion.push_back(MotionSegment{dur, dx * speed, dy * speed});
    x += dx * speed * dur;
    y += dy * speed * dur;
    t += dur;
  }
  return s;
}

double zero_rmse(const SpeedSeries& s) {
  return rmse(s, SpeedSeries(std::vector<double>(s.size(), 0.0), s.fps()));
}

// --- criteria ---------------------------------------------------------------------

Outcome ac1() {
  const auto t0 = Clock::now();
  PipelineOptions opt;
  opt.source = SpeedSource::builtin_flow;
  double worst_gated = 0.0, min_raw = std::numeric_limits<double>::infinity();
  std::string failures;
  for (const SceneSpec& spec : static_suite()) {
    const auto video = open_scene(spec);
    const VideoSpeeds vs = measure_video(*video, opt);
    const OpphResult g = gate_video(vs, opt.alignment);
    const double gated = zero_rmse(g.gated), raw = zero_rmse(vs.raw);
    worst_gated = std::max(worst_gated, gated);
    min_raw = std::min(min_raw, raw);
    if (gated != 0.0 || !(raw > 0.01)) failures += " " + spec.id;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = failures.empty() && secs < 120.0;
  o.detail = "20 static scenes: max gated RMSE " + fmt(worst_gated) + ", min ungated RMSE " +
             fmt(min_raw) + ", runtime " + fmt(secs, 3) + " s (limit 120 s)";
  if (!failures.empty()) o.detail += "; failing:" + failures;
  return o;
}

Outcome ac2() {
  PipelineOptions opt;
  opt.source = SpeedSource::flo;  // scene flow is the ground truth
  std::size_t moving = 0, open = 0;
  double worst_excess = -1.0;
  std::string failures;
  for (const SceneSpec& spec : moving_suite()) {
    const auto video = open_scene(spec);
    const SpeedSeries gt = *video->gt_speed();
    const VideoSpeeds vs = measure_video(*video, opt);
    const OpphResult g = gate_video(vs, opt.alignment);
    const double raw = rmse(vs.raw, gt), gated = rmse(g.gated, gt);
    worst_excess = std::max(worst_excess, gated - raw);
    bool ok = gated <= raw + 0.0;
    const auto sp = g.gate.filtered();
    std::size_t mv = 0, on = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
      if (sp[t] == 1 && g.gated[t] != vs.raw[t]) ok = false;
      if (sp[t] == 1 && vs.raw[t] == gt[t] && g.gated[t] != gt[t]) ok = false;
      if (gt[t] > 0) {
        ++mv;
        on += sp[t];
      }
    }
    moving += mv;
    open += on;
    if (static_cast<double>(on) < 0.95 * static_cast<double>(mv)) ok = false;
    if (!ok) failures += " " + spec.id;
  }
  Outcome o;
  o.pass = failures.empty();
  o.detail = "20 moving scenes: gate open on " + std::to_string(open) + "/" + std::to_string(moving) +
             " moving frames, max (gated - raw) RMSE " + fmt(worst_excess);
  if (!failures.empty()) o.detail += "; failing:" + failures;
  return o;
}

Outcome ac3() {
  std::mt19937 rng(20240601);
  std::size_t spatial_bad = 0, temporal_bad = 0;
  const int ns[] = {1, 3, 5};
  for (int k = 0; k < 500; ++k) {
    const int n = ns[k % 3];
    const int w = std::uniform_int_distribution<int>(n, 16)(rng);
    const int h = std::uniform_int_distribution<int>(n, 16)(rng);
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const auto bits = oracle::random_bits(rng, static_cast<std::size_t>(w) * h, p);
    const BinaryImage got = spatial_median(BinaryImage(w, h, bits), n);
    const auto want = oracle::spatial_median(bits, w, h, n);
    if (!std::equal(want.begin(), want.end(), got.values().begin())) ++spatial_bad;
  }
  for (int k = 0; k < 500; ++k) {
    const int m = 1 + 2 * (k % 8);
    const int len = std::uniform_int_distribution<int>(1, 200)(rng);
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const auto s = oracle::random_bits(rng, static_cast<std::size_t>(len), p);
    if (temporal_median(s, m, TemporalAlignment::centered) != oracle::temporal_median(s, m)) {
      ++temporal_bad;
    }
    if (temporal_median(s, m, TemporalAlignment::causal) != oracle::causal_median(s, m)) {
      ++temporal_bad;
    }
  }
  Outcome o;
  o.pass = spatial_bad == 0 && temporal_bad == 0;
  o.detail = "spatial mismatches " + std::to_string(spatial_bad) + "/500, temporal mismatches " +
             std::to_string(temporal_bad) + "/1000 (centered and causal)";
  return o;
}

Outcome ac4() {
  std::vector<std::string> bad;
  auto check = [&](const std::string& name, double got, double want) {
    if (!rel_close(got, want)) bad.push_back(name + "=" + fmt(got, 17));
  };

  const BodyMask full(4, 3, std::uint8_t{1});
  check("flow_speed(3,4)", flow_speed(FlowField(4, 3, std::vector<float>(12, 3.0f),
                                                std::vector<float>(12, 4.0f)),
                                      full),
        5.0);
  check("flow_speed(0)", flow_speed(FlowField(4, 3), full), 0.0);
  {
    std::vector<std::uint8_t> m(12, 0);
    m[1] = m[6] = 1;
    std::vector<float> vx(12, 9.0f), vy(12, 9.0f);
    vx[1] = 1;
    vy[1] = 0;
    vx[6] = 0;
    vy[6] = 2;
    check("flow_speed(two pixels)", flow_speed(FlowField(4, 3, vx, vy), BodyMask(4, 3, m)), 1.5);
  }

  const PoseTrack still({{{1, 2}, {5, 5}}, {{1, 2}, {5, 5}}}, 30);
  check("pose_speed(static)", pose_speed(still, 0), 0.0);
  check("pose_speed(3,4)", pose_speed(PoseTrack({{{0, 0}}, {{3, 4}}}, 30), 0), 5.0);
  check("pose_speed(two joints)", pose_speed(PoseTrack({{{0, 0}, {2, 2}}, {{1, 0}, {2, 2}}}, 30), 0),
        0.5);

  const SpeedSeries g({1, 1, 1}, 30);
  check("rmse(equal)", rmse(g, g), 0.0);
  check("rmse(offset)", rmse(SpeedSeries({1.25, 1.25, 1.25}, 30), g), 0.25);
  check("rmse(1,2,3)", rmse(SpeedSeries({1, 2, 3}, 30), g), std::sqrt(5.0 / 3.0));

  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> gt(120);
  for (auto& v : gt) v = u(rng);
  const SpeedSeries gts(gt, 10);
  std::vector<double> neg(gt.size()), aff(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    neg[i] = 10.0 - gt[i];
    aff[i] = 2.5 * gt[i] + 0.75;
  }
  check("windowed r(self)", windowed_correlation(gts, gts, 1.0).r, 1.0);
  check("windowed r(negated)", windowed_correlation(SpeedSeries(neg, 10), gts, 1.0).r, -1.0);
  check("windowed r(affine)", windowed_correlation(SpeedSeries(aff, 10), gts, 2.0).r, 1.0);

  std::size_t affine_bad = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = std::uniform_int_distribution<int>(3, 400)(rng);
    std::vector<double> a(n), b(n), t(n);
    for (int i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = a[i] + u(rng);
    }
    const double scale = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    const double shift = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    for (int i = 0; i < n; ++i) t[i] = scale * a[i] + shift;
    const double r = pearson(a, b);
    if (!rel_close(r, oracle::pearson(a, b)) || std::abs(pearson(t, b) - r) > 1e-9 ||
        std::abs(pearson(a, t) - 1.0) > 1e-9) {
      ++affine_bad;
    }
  }
  Outcome o;
  o.pass = bad.empty() && affine_bad == 0;
  o.detail = "13 hand-computed values, " + std::to_string(affine_bad) + "/100 affine-invariance failures";
  for (const auto& b : bad) o.detail += "; off: " + b;
  return o;
}

Outcome ac5() {
  const auto t0 = Clock::now();
  const SceneSpec spec = trend_scene();
  const auto video = open_scene(spec);
  const SpeedSeries gt = *video->gt_speed();
  PipelineOptions opt;
  opt.source = SpeedSource::builtin_flow;
  const VideoSpeeds vs = measure_video(*video, opt);
  const OpphResult g = gate_video(vs, opt.alignment);
  const double r_raw = windowed_correlation(vs.raw, gt, 60.0).r;
  const double r_opph = windowed_correlation(g.gated, gt, 60.0).r;
  Outcome o;
  o.pass = r_opph >= 0.95 && r_raw - r_opph <= 0.03;
  o.detail = "30 min at 10 fps, 60 s windows: r(opph) " + fmt(r_opph) + ", r(raw) " + fmt(r_raw) +
             ", drop " + fmt(r_raw - r_opph) + " (" + fmt(seconds_since(t0), 3) + " s)";
  return o;
}

Outcome ac6() {
  PipelineOptions opt;
  opt.source = SpeedSource::builtin_flow;
  const std::vector<FilterSpec> filters = {FilterSpec::median(), FilterSpec::bilateral(),
                                           FilterSpec::tv()};
  double margin = std::numeric_limits<double>::infinity();
  std::string failures;
  for (const SceneSpec& spec : static_suite()) {
    const auto video = open_scene(spec);
    const VideoSpeeds vs = measure_video(*video, opt, filters);
    const double opph = zero_rmse(gate_video(vs, opt.alignment).gated);
    bool ok = true;
    for (const SpeedSeries& f : vs.filtered) {
      const double e = zero_rmse(f);
      margin = std::min(margin, e - opph);
      if (!(opph < e)) ok = false;
    }
    if (!ok) failures += " " + spec.id;
  }
  Outcome o;
  o.pass = failures.empty();
  o.detail = "static suite: OPPH below median, bilateral and TV on every scene, smallest gap " +
             fmt(margin);
  if (!failures.empty()) o.detail = "OPPH not strictly best on:" + failures;
  return o;
}

Outcome ac7() {
  std::mt19937_64 rng(4242);
  std::size_t bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
    std::vector<float> vx(static_cast<std::size_t>(w) * h), vy(vx.size());
    for (std::size_t i = 0; i < vx.size(); ++i) {
      // Random bit patterns, redrawn until finite and below the unknown threshold.
      for (float* f : {&vx[i], &vy[i]}) {
        do {
          *f = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
        } while (!(std::abs(*f) <= kFloUnknownThreshold));
      }
    }
    const auto bytes = write_flo(FlowField(w, h, vx, vy));
    if (write_flo(read_flo(bytes)) != bytes) ++bad;
  }

  auto le32 = [](std::uint32_t v) {
    return std::vector<std::uint8_t>{static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                                     static_cast<std::uint8_t>(v >> 16),
                                     static_cast<std::uint8_t>(v >> 24)};
  };
  auto cat = [](std::initializer_list<std::vector<std::uint8_t>> parts) {
    std::vector<std::uint8_t> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  const std::vector<std::uint8_t> tag = {'P', 'I', 'E', 'H'};
  const std::vector<std::vector<std::uint8_t>> malformed = {
      {},
      {'P', 'I', 'E'},
      cat({{'X', 'I', 'E', 'H'}, le32(1), le32(1), le32(0), le32(0)}),
      cat({tag, le32(1)}),
      cat({tag, le32(0), le32(1)}),
      cat({tag, le32(1), le32(0)}),
      cat({tag, le32(0xFFFFFFFF), le32(1)}),
      cat({tag, le32(2), le32(2), le32(0)}),
      cat({tag, le32(1), le32(1), le32(0), le32(0), {7}}),
      cat({tag, le32(100000), le32(100000), le32(0)}),
  };
  std::size_t accepted = 0, unnamed = 0;
  for (std::size_t k = 0; k < malformed.size(); ++k) {
    const std::string name = "case" + std::to_string(k) + ".flo";
    try {
      read_flo(malformed[k], name);
      ++accepted;
    } catch (const FormatError& e) {
      if (std::string(e.what()).find(name) == std::string::npos) ++unnamed;
    }
  }
  Outcome o;
  o.pass = bad == 0 && accepted == 0 && unnamed == 0;
  o.detail = std::to_string(bad) + "/1000 round-trip mismatches; " + std::to_string(accepted) + "/" +
             std::to_string(malformed.size()) + " malformed files accepted, " +
             std::to_string(unnamed) + " errors without the file name";
  return o;
}

Outcome ac8() {
  const BenchResult r = bench_opph(640, 480, 100, 10);
  Outcome o;
  o.soft = true;
  o.pass = r.total_ms <= 15.0;
  o.detail = "640x480 total " + fmt(r.total_ms) + " ms/frame (budget 15 ms), spatial_median " +
             fmt(r.stage_ms[2]) + " ms";
  return o;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

int cli(const std::string& args) {
  const std::string cmd = shell_quote(OPPH_CLI_PATH) + " " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

// Every regular file under dir, relative path to contents.
std::vector<std::pair<std::string, std::vector<std::uint8_t>>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), read_bytes(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome ac9() {
  const fs::path root = fs::temp_directory_path() / ("opph_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  Outcome o;
  std::vector<std::string> manifests;
  for (int k = 0; k < 3; ++k) {
    SceneSpec s;
    s.id = "det" + std::to_string(k);
    s.width = 96;
    s.height = 72;
    s.fps = 10;
    s.seed = 90 + k;
    s.body_width = 20;
    s.body_height = 24;
    s.start_x = 30;
    s.start_y = 20;
    s.motion = {MotionSegment{12, 0, 0}, MotionSegment{10, 1.5, 0.5}, MotionSegment{12, 0, 0},
                MotionSegment{10, -1, 0}};
    s.noise = {NoiseSpec::gaussian(3), NoiseSpec::salt(1e-3), NoiseSpec::flicker(30, 2, 15)};
    write_text(root / (s.id + ".txt"), format_scene(s));
    manifests.push_back((root / "seq" / s.id / "manifest.json").string());
  }
  std::string list;
  for (const auto& m : manifests) list += " " + shell_quote(m);

  int failures = 0;
  auto run_all = [&](const fs::path& out, int jobs) {
    fs::create_directories(out);
    const std::string j = " --jobs " + std::to_string(jobs);
    for (int k = 0; k < 3; ++k) {
      const std::string id = "det" + std::to_string(k);
      failures += cli("synth --scene " + shell_quote((root / (id + ".txt")).string()) + " --out " +
                      shell_quote((out / "synth" / id).string())) != 0;
    }
    for (const char* src : {"flo", "builtin-flow"}) {
      const std::string s = std::string(" --source ") + src + j;
      const fs::path d = out / src;
      fs::create_directories(d);
      failures += cli("run --manifest" + list + s + " --out " + shell_quote((d / "run").string())) != 0;
      failures += cli("run --stream --manifest" + list + s + " --out " +
                      shell_quote((d / "stream").string())) != 0;
      failures += cli("eval --manifest" + list + s + " --out " + shell_quote((d / "eval.csv").string())) != 0;
      failures += cli("compare-filters --manifest" + list + s + " --out " +
                      shell_quote((d / "compare.csv").string())) != 0;
      failures += cli("correlate --manifest" + list + s + " --windows 1,2 --out " +
                      shell_quote((d / "corr.csv").string()) + " --windows-out " +
                      shell_quote((d / "corr_windows.csv").string())) != 0;
    }
  };

  // Inputs for the pipeline runs.
  for (int k = 0; k < 3; ++k) {
    const std::string id = "det" + std::to_string(k);
    failures += cli("synth --scene " + shell_quote((root / (id + ".txt")).string()) + " --out " +
                    shell_quote((root / "seq" / id).string())) != 0;
  }
  run_all(root / "a1", 1);
  run_all(root / "b1", 1);
  run_all(root / "a4", 4);
  run_all(root / "b4", 4);

  const auto ref = snapshot(root / "a1");
  std::size_t differing = 0;
  for (const char* other : {"b1", "a4", "b4"}) {
    const auto snap = snapshot(root / other);
    if (snap.size() != ref.size()) {
      ++differing;
      continue;
    }
    for (std::size_t i = 0; i < ref.size(); ++i) differing += snap[i] != ref[i];
  }
  o.pass = failures == 0 && differing == 0 && !ref.empty();
  o.detail = std::to_string(ref.size()) + " output files compared across 2 runs x jobs {1,4}: " +
             std::to_string(differing) + " differ, " + std::to_string(failures) + " commands failed";
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  set_log_level(LogLevel::error);
  int hard_failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << "AC" << id << " " << (o.pass ? "PASS" : "FAIL");
    if (!o.pass && o.soft) std::cout << " (soft: warning only)";
    std::cout << "  " << o.detail << std::endl;
    if (!o.pass && !o.soft) ++hard_failures;
  }
  return hard_failures == 0 ? 0 : 1;
}
