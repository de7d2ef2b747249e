#include "opph/speed_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "opph/log.hpp"

namespace opph {

namespace {

std::string short_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_flow_shape(const FlowField& flow, int width, int height, const char* where) {
  if (flow.width() != width || flow.height() != height) {
    throw InvalidArgument(std::string(where) + ": flow is " + std::to_string(flow.width()) + "x" +
                          std::to_string(flow.height()) + ", mask is " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
}

double magnitude(double x, double y) { return std::sqrt(x * x + y * y); }

}  // namespace

double flow_speed(const FlowField& flow, const BodyMask& mask) {
  require_flow_shape(flow, mask.width(), mask.height(), "flow_speed");
  auto vx = flow.vx();
  auto vy = flow.vy();
  auto m = mask.values();
  Accumulator acc;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    acc.add(magnitude(vx[i], vy[i]));
    ++n;
  }
  if (n == 0) {
    log_warning("flow_speed: empty body mask, speed set to 0");
    return 0.0;
  }
  return acc.value() / static_cast<double>(n);
}

std::map<int, double> part_speeds(const FlowField& flow, const PartMask& parts) {
  require_flow_shape(flow, parts.width(), parts.height(), "part_speeds");
  const int labels = parts.max_label();
  std::vector<Accumulator> sums(static_cast<std::size_t>(labels) + 1);
  std::vector<std::size_t> counts(sums.size(), 0);
  auto vx = flow.vx();
  auto vy = flow.vy();
  auto lab = parts.labels();
  for (std::size_t i = 0; i < lab.size(); ++i) {
    if (lab[i] == 0) continue;
    sums[lab[i]].add(magnitude(vx[i], vy[i]));
    ++counts[lab[i]];
  }
  std::map<int, double> out;
  for (int k = 1; k <= labels; ++k) {
    out[k] = counts[k] ? sums[k].value() / static_cast<double>(counts[k]) : 0.0;
  }
  return out;
}

double pose_speed(const PoseTrack& track, std::size_t t) {
  if (t + 1 >= track.frame_count()) {
    throw InvalidArgument("pose_speed: frame " + std::to_string(t) +
                          " has no successor in a track of " +
                          std::to_string(track.frame_count()) + " frames");
  }
  const auto& a = track.frame(t);
  const auto& b = track.frame(t + 1);
  Accumulator acc;
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!a[k].present || !b[k].present) continue;
    acc.add(magnitude(b[k].x - a[k].x, b[k].y - a[k].y));
    ++n;
  }
  return n ? acc.value() / static_cast<double>(n) : 0.0;
}

SpeedSeries pose_speeds(const PoseTrack& track) {
  std::vector<double> out;
  if (track.frame_count() > 1) out.reserve(track.frame_count() - 1);
  for (std::size_t t = 0; t + 1 < track.frame_count(); ++t) out.push_back(pose_speed(track, t));
  return SpeedSeries(std::move(out), track.fps());
}

double rmse(std::span<const double> est, std::span<const double> gt) {
  if (est.size() != gt.size()) {
    throw InvalidArgument("rmse: length mismatch (" + std::to_string(est.size()) + " vs " +
                          std::to_string(gt.size()) + ")");
  }
  if (est.empty()) throw InvalidArgument("rmse: empty series");
  Accumulator acc;
  for (std::size_t t = 0; t < est.size(); ++t) {
    const double d = est[t] - gt[t];
    acc.add(d * d);
  }
  return std::sqrt(acc.value() / static_cast<double>(est.size()));
}

double rmse(const SpeedSeries& est, const SpeedSeries& gt) { return rmse(est.values(), gt.values()); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Aggregate aggregate(std::span<const double> per_video) {
  if (per_video.empty()) throw InvalidArgument("aggregate: no videos");
  Accumulator acc;
  for (double v : per_video) acc.add(v);
  Aggregate out;
  out.mean = acc.value() / static_cast<double>(per_video.size());

  std::vector<double> all(per_video.begin(), per_video.end());
  const double q1 = quantile(all, 0.25);
  const double q3 = quantile(all, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - 1.5 * iqr;
  const double hi = q3 + 1.5 * iqr;
  std::vector<double> kept;
  for (double v : all) {
    if (v >= lo && v <= hi) kept.push_back(v);
  }
  out.excluded = all.size() - kept.size();
  out.median = kept.empty() ? quantile(std::move(all), 0.5) : quantile(std::move(kept), 0.5);
  return out;
}

RmseReport make_rmse_report(std::vector<std::string> videos, std::vector<double> per_video) {
  if (videos.size() != per_video.size()) {
    throw InvalidArgument("make_rmse_report: identifier and value counts differ");
  }
  RmseReport report;
  report.summary = aggregate(per_video);
  report.videos = std::move(videos);
  report.per_video = std::move(per_video);
  return report;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
  if (a.size() < 2) throw InvalidArgument("pearson: need at least two samples");
  const double n = static_cast<double>(a.size());
  Accumulator sa, sb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa.add(a[i]);
    sb.add(b[i]);
  }
  const double ma = sa.value() / n;
  const double mb = sb.value() / n;
  Accumulator sab, saa, sbb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab.add(da * db);
    saa.add(da * da);
    sbb.add(db * db);
  }
  if (saa.value() <= 0.0 || sbb.value() <= 0.0) {
    throw DegenerateCorrelation("pearson: zero variance in one of the series");
  }
  const double r = sab.value() / std::sqrt(saa.value() * sbb.value());
  return std::clamp(r, -1.0, 1.0);
}

std::size_t window_frames(double window_seconds, double fps) {
  if (!(window_seconds > 0.0) || !std::isfinite(window_seconds)) {
    throw InvalidArgument("window length must be positive");
  }
  const double frames = std::floor(window_seconds * fps + 1e-9);
  if (frames < 1.0) {
    throw InvalidArgument("window of " + std::to_string(window_seconds) +
                          " s is shorter than one frame at " + std::to_string(fps) + " fps");
  }
  return static_cast<std::size_t>(frames);
}

CorrelationReport windowed_correlation(const SpeedSeries& est, const SpeedSeries& gt,
                                       double window_seconds) {
  if (est.size() != gt.size()) {
    throw InvalidArgument("windowed_correlation: length mismatch (" + std::to_string(est.size()) +
                          " vs " + std::to_string(gt.size()) + ")");
  }
  if (est.fps() != gt.fps()) throw InvalidArgument("windowed_correlation: fps mismatch");
  CorrelationReport report;
  report.window_seconds = window_seconds;
  report.frames_per_window = window_frames(window_seconds, est.fps());
  const std::size_t windows = est.size() / report.frames_per_window;
  if (windows < 2) {
    // Longest window that still yields two whole windows.
    const double longest = static_cast<double>(est.size() / 2) / est.fps();
    throw InvalidArgument("windowed_correlation: " + short_number(window_seconds) +
                          " s windows give " + std::to_string(windows) +
                          " complete window(s); at least 2 are needed, so use a window of at most " +
                          short_number(longest) + " s");
  }
  for (std::size_t w = 0; w < windows; ++w) {
    Accumulator se, sg;
    for (std::size_t k = 0; k < report.frames_per_window; ++k) {
      const std::size_t t = w * report.frames_per_window + k;
      se.add(est[t]);
      sg.add(gt[t]);
    }
    report.est.push_back(se.value());
    report.gt.push_back(sg.value());
  }
  report.r = pearson(report.est, report.gt);
  return report;
}

SpeedSeries concatenate(std::span<const SpeedSeries> parts) {
  if (parts.empty()) throw InvalidArgument("concatenate: nothing to join");
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.fps() != parts.front().fps()) {
      throw InvalidArgument("concatenate: series have different frame rates");
    }
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  return SpeedSeries(std::move(out), parts.front().fps());
}

std::vector<HistogramBin> speed_histogram(const SpeedSeries& series, double bin_width, double max) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw InvalidArgument("speed_histogram: bin width must be positive");
  }
  if (!(max > 0.0) || !std::isfinite(max)) {
    throw InvalidArgument("speed_histogram: max must be positive");
  }
  const auto regular = static_cast<std::size_t>(std::ceil(max / bin_width));
  std::vector<HistogramBin> bins(regular + 1);
  for (std::size_t k = 0; k < regular; ++k) {
    bins[k].lower = static_cast<double>(k) * bin_width;
    bins[k].upper = std::min(max, static_cast<double>(k + 1) * bin_width);
  }
  bins[regular].lower = max;
  bins[regular].upper = std::numeric_limits<double>::infinity();
  for (double v : series.values()) {
    if (v >= max) {
      ++bins[regular].count;
      continue;
    }
    const auto k = static_cast<std::size_t>(std::floor(v / bin_width));
    ++bins[std::min(k, regular - 1)].count;
  }
  return bins;
}

}  // namespace opph
