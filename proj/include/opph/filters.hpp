#pragma once

// Baseline post-processing filters for the motion field and the speed signal,
// used as comparison variants against the motion gate.

#include <string>

#include "opph/types.hpp"

namespace opph {

enum class FilterKind { median, bilateral, tv, kalman };

const char* to_string(FilterKind kind);

class FilterSpec {
 public:
  static FilterSpec median(int window = 3);
  static FilterSpec bilateral(double sigma_s = 3.0, double sigma_r = 1.0);
  static FilterSpec tv(double lambda = 0.1, int iterations = 100);
  static FilterSpec kalman(double q = 1e-4, double r = 1e-2);

  // Parses "median", "median:n=5", "bilateral:sigma_s=2;sigma_r=0.5", ...
  // Parameters may also be separated by commas.
  static FilterSpec parse(const std::string& text);

  FilterKind kind() const { return kind_; }
  int window() const { return window_; }
  double sigma_s() const { return sigma_s_; }
  double sigma_r() const { return sigma_r_; }
  double lambda() const { return lambda_; }
  int iterations() const { return iterations_; }
  double process_variance() const { return q_; }
  double measurement_variance() const { return r_; }

  // Whether the filter acts on the flow field (true) or the speed series.
  bool spatial() const { return kind_ != FilterKind::kalman; }

  // Pixels beyond a region that can influence filtered values inside it.
  int support_radius() const;

  // Canonical text form, accepted by parse().
  std::string describe() const;

  bool operator==(const FilterSpec&) const = default;

 private:
  explicit FilterSpec(FilterKind kind) : kind_(kind) {}

  FilterKind kind_;
  int window_ = 3;
  double sigma_s_ = 3.0;
  double sigma_r_ = 1.0;
  double lambda_ = 0.1;
  int iterations_ = 100;
  double q_ = 1e-4;
  double r_ = 1e-2;
};

// Per-component n x n median, replicate border.
FlowField median_flow(const FlowField& flow, int n);

// Flow-guided bilateral filter; window truncated at radius ceil(3 sigma_s).
FlowField bilateral_flow(const FlowField& flow, double sigma_s, double sigma_r);

// Rudin-Osher-Fatemi denoising per component via the dual projection
// iteration with step 0.25.
FlowField tv_flow(const FlowField& flow, double lambda, int iterations);

// |u - f|^2 / (2 lambda) + TV(u), summed over both components, with the
// forward-difference isotropic TV used by tv_flow.
double tv_energy(const FlowField& original, const FlowField& denoised, double lambda);

// Scalar constant-position Kalman filter over a speed series.
SpeedSeries kalman_speed(const SpeedSeries& series, double q, double r);

FlowField apply_filter(const FilterSpec& spec, const FlowField& flow);
SpeedSeries apply_filter(const FilterSpec& spec, const SpeedSeries& series);

// Filters only the part of the field around roi (dilated by the filter's
// support, clipped to the image); pixels outside keep their input value.
FlowField apply_filter_in_region(const FilterSpec& spec, const FlowField& flow, Rect roi);

FlowField crop(const FlowField& flow, Rect region);

}  // namespace opph
