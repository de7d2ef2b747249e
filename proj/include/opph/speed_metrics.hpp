#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "opph/types.hpp"

namespace opph {

// Mean flow magnitude over the mask pixels; 0 for an empty mask.
double flow_speed(const FlowField& flow, const BodyMask& mask);

// flow_speed per part label 1 .. max_label; labels with no pixels map to 0.
std::map<int, double> part_speeds(const FlowField& flow, const PartMask& parts);

// Mean joint displacement between frames t and t + 1. Joints missing from
// either frame are left out of the mean; 0 when none remain.
double pose_speed(const PoseTrack& track, std::size_t t);
SpeedSeries pose_speeds(const PoseTrack& track);

double rmse(std::span<const double> est, std::span<const double> gt);
double rmse(const SpeedSeries& est, const SpeedSeries& gt);

struct Aggregate {
  double mean = 0.0;
  // Median after the 1.5 IQR Tukey fence; plain median if the fence
  // removes everything.
  double median = 0.0;
  std::size_t excluded = 0;
};

Aggregate aggregate(std::span<const double> per_video);

// Linear-interpolation quantile (the "type 7" estimator), q in [0, 1].
double quantile(std::vector<double> values, double q);

struct RmseReport {
  std::vector<std::string> videos;
  std::vector<double> per_video;
  Aggregate summary;
};

RmseReport make_rmse_report(std::vector<std::string> videos, std::vector<double> per_video);

double pearson(std::span<const double> a, std::span<const double> b);

struct CorrelationReport {
  double window_seconds = 0.0;
  std::size_t frames_per_window = 0;
  // Speed summed over each window: pixels per window.
  std::vector<double> est;
  std::vector<double> gt;
  double r = 0.0;
};

CorrelationReport windowed_correlation(const SpeedSeries& est, const SpeedSeries& gt,
                                       double window_seconds);

// Frames per window for a window length in seconds.
std::size_t window_frames(double window_seconds, double fps);

// Joins series end to end; all must share one fps.
SpeedSeries concatenate(std::span<const SpeedSeries> parts);

struct HistogramBin {
  double lower = 0.0;  // inclusive
  double upper = 0.0;  // exclusive; infinity for the overflow bin
  std::size_t count = 0;
};

// Half-open bins of bin_width from 0 up to max, plus a final overflow bin
// holding every value >= max.
std::vector<HistogramBin> speed_histogram(const SpeedSeries& series, double bin_width, double max);

}  // namespace opph
