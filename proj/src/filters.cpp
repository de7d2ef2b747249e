#include "opph/filters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "opph/median_kernel.hpp"

namespace opph {

namespace {

std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw InvalidArgument("filter parameter " + key + ": not a number: '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v)) throw InvalidArgument("filter parameter " + key + " must be an integer");
  return static_cast<int>(v);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string("FilterSpec: ") + what + " must be positive");
  }
}

}  // namespace

const char* to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::median: return "median";
    case FilterKind::bilateral: return "bilateral";
    case FilterKind::tv: return "tv";
    case FilterKind::kalman: return "kalman";
  }
  return "?";
}

FilterSpec FilterSpec::median(int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidArgument("FilterSpec: median window must be odd and positive");
  }
  FilterSpec s(FilterKind::median);
  s.window_ = window;
  return s;
}

FilterSpec FilterSpec::bilateral(double sigma_s, double sigma_r) {
  require_positive(sigma_s, "sigma_s");
  require_positive(sigma_r, "sigma_r");
  FilterSpec s(FilterKind::bilateral);
  s.sigma_s_ = sigma_s;
  s.sigma_r_ = sigma_r;
  return s;
}

FilterSpec FilterSpec::tv(double lambda, int iterations) {
  require_positive(lambda, "lambda");
  if (iterations < 1) throw InvalidArgument("FilterSpec: iterations must be at least 1");
  FilterSpec s(FilterKind::tv);
  s.lambda_ = lambda;
  s.iterations_ = iterations;
  return s;
}

FilterSpec FilterSpec::kalman(double q, double r) {
  require_positive(q, "process variance q");
  require_positive(r, "measurement variance r");
  FilterSpec s(FilterKind::kalman);
  s.q_ = q;
  s.r_ = r;
  return s;
}

FilterSpec FilterSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon != std::string::npos) {
    // ';' is the canonical separator (it survives CSV); ',' also works.
    std::string rest = text.substr(colon + 1);
    std::replace(rest.begin(), rest.end(), ',', ';');
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw InvalidArgument("filter '" + text + "': expected key=value, got '" + item + "'");
      }
      params[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto take = [&](const std::string& key) -> const std::string* {
    auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };

  FilterSpec spec(FilterKind::median);
  std::vector<std::string> known;
  if (kind == "median") {
    const auto* n = take("n");
    spec = median(n ? parse_int("n", *n) : 3);
    known = {"n"};
  } else if (kind == "bilateral") {
    const auto* s = take("sigma_s");
    const auto* r = take("sigma_r");
    spec = bilateral(s ? parse_number("sigma_s", *s) : 3.0, r ? parse_number("sigma_r", *r) : 1.0);
    known = {"sigma_s", "sigma_r"};
  } else if (kind == "tv") {
    const auto* l = take("lambda");
    const auto* it = take("iters");
    spec = tv(l ? parse_number("lambda", *l) : 0.1, it ? parse_int("iters", *it) : 100);
    known = {"lambda", "iters"};
  } else if (kind == "kalman") {
    const auto* q = take("q");
    const auto* r = take("r");
    spec = kalman(q ? parse_number("q", *q) : 1e-4, r ? parse_number("r", *r) : 1e-2);
    known = {"q", "r"};
  } else {
    throw InvalidArgument("unknown filter kind '" + kind +
                          "' (expected median, bilateral, tv or kalman)");
  }
  for (const auto& [key, value] : params) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidArgument("filter '" + kind + "': unknown parameter '" + key + "'");
    }
  }
  return spec;
}

int FilterSpec::support_radius() const {
  switch (kind_) {
    case FilterKind::median: return window_ / 2;
    case FilterKind::bilateral: return static_cast<int>(std::ceil(3.0 * sigma_s_));
    case FilterKind::tv: return 8;
    case FilterKind::kalman: return 0;
  }
  return 0;
}

std::string FilterSpec::describe() const {
  switch (kind_) {
    case FilterKind::median: return "median:n=" + std::to_string(window_);
    case FilterKind::bilateral:
      return "bilateral:sigma_s=" + number(sigma_s_) + ";sigma_r=" + number(sigma_r_);
    case FilterKind::tv: return "tv:lambda=" + number(lambda_) + ";iters=" + std::to_string(iterations_);
    case FilterKind::kalman: return "kalman:q=" + number(q_) + ";r=" + number(r_);
  }
  return {};
}

FlowField median_flow(const FlowField& flow, int n) {
  if (n < 1 || n % 2 == 0) {
    throw InvalidArgument("median_flow: n must be odd and positive, got " + std::to_string(n));
  }
  auto vx = window_median(flow.vx(), flow.width(), flow.height(), n, Border::replicate);
  auto vy = window_median(flow.vy(), flow.width(), flow.height(), n, Border::replicate);
  return FlowField(flow.width(), flow.height(), std::move(vx), std::move(vy));
}

namespace {

// exp(-a) for a in [0, 40] by linear interpolation in a 65536-step table
// (relative error below 1e-7); weights under exp(-40) count as 0.
constexpr int kExpSteps = 1 << 16;
constexpr float kExpRange = 40.0f;

const std::vector<float>& neg_exp_table() {
  static const std::vector<float> table = [] {
    std::vector<float> t(kExpSteps + 1);
    for (int i = 0; i <= kExpSteps; ++i) {
      t[i] = static_cast<float>(std::exp(-static_cast<double>(i) * kExpRange / kExpSteps));
    }
    return t;
  }();
  return table;
}

inline float neg_exp(const float* table, float a) {
  const float u = a * (kExpSteps / kExpRange);
  if (!(u < kExpSteps)) return 0.0f;
  const int i = static_cast<int>(u);
  const float f = u - static_cast<float>(i);
  return table[i] + f * (table[i + 1] - table[i]);
}

}  // namespace

FlowField bilateral_flow(const FlowField& flow, double sigma_s, double sigma_r) {
  if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) {
    throw InvalidArgument("bilateral_flow: sigmas must be positive");
  }
  const int w = flow.width();
  const int h = flow.height();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_s));
  const int side = 2 * radius + 1;
  std::vector<float> spatial(static_cast<std::size_t>(side) * side);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      spatial[(dy + radius) * side + dx + radius] =
          static_cast<float>(std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s)));
    }
  }
  const float range_scale = static_cast<float>(1.0 / (2.0 * sigma_r * sigma_r));
  const float* table = neg_exp_table().data();

  auto vx = flow.vx();
  auto vy = flow.vy();
  std::vector<float> ox(flow.size()), oy(flow.size());
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const float px = vx[p], py = vy[p];
      // Float sums per row, double across rows.
      double sw = 0.0, sx = 0.0, sy = 0.0;
      for (int qy = y0; qy <= y1; ++qy) {
        const float* srow = spatial.data() + (qy - y + radius) * side + radius - x;
        const float* rx = vx.data() + static_cast<std::size_t>(qy) * w;
        const float* ry = vy.data() + static_cast<std::size_t>(qy) * w;
        float rw = 0.0f, rsx = 0.0f, rsy = 0.0f;
        for (int qx = x0; qx <= x1; ++qx) {
          const float dx = rx[qx] - px;
          const float dy = ry[qx] - py;
          const float wgt = srow[qx] * neg_exp(table, range_scale * (dx * dx + dy * dy));
          rw += wgt;
          rsx += wgt * rx[qx];
          rsy += wgt * ry[qx];
        }
        sw += rw;
        sx += rsx;
        sy += rsy;
      }
      ox[p] = static_cast<float>(sx / sw);
      oy[p] = static_cast<float>(sy / sw);
    }
  }
  return FlowField(w, h, std::move(ox), std::move(oy));
}

namespace {

// One component of the dual projection scheme on a w x h plane.
std::vector<float> tv_denoise_plane(std::span<const float> f, int w, int h, double lambda,
                                    int iterations) {
  constexpr double tau = 0.25;
  const std::size_t n = f.size();
  std::vector<double> p1(n, 0.0), p2(n, 0.0), div(n, 0.0), g(n, 0.0);

  // p1 stays 0 in the last column and p2 in the last row (their gradient
  // there is 0), so the divergence only special-cases x = 0 and y = 0.
  auto divergence = [&] {
    for (int y = 0; y < h; ++y) {
      const std::size_t r = static_cast<std::size_t>(y) * w;
      div[r] = p1[r];
      for (int x = 1; x < w; ++x) div[r + x] = p1[r + x] - p1[r + x - 1];
      if (y > 0) {
        for (int x = 0; x < w; ++x) div[r + x] += p2[r + x] - p2[r + x - w];
      } else {
        for (int x = 0; x < w; ++x) div[r + x] += p2[r + x];
      }
    }
  };

  const double inv_lambda = 1.0 / lambda;
  for (int it = 0; it < iterations; ++it) {
    divergence();
    for (std::size_t i = 0; i < n; ++i) g[i] = div[i] - f[i] * inv_lambda;
    for (int y = 0; y < h; ++y) {
      const std::size_t r = static_cast<std::size_t>(y) * w;
      const bool last_row = y == h - 1;
      for (int x = 0; x < w - 1; ++x) {
        const std::size_t i = r + x;
        const double gx = g[i + 1] - g[i];
        const double gy = last_row ? 0.0 : g[i + w] - g[i];
        const double inv = 1.0 / (1.0 + tau * std::sqrt(gx * gx + gy * gy));
        p1[i] = (p1[i] + tau * gx) * inv;
        p2[i] = (p2[i] + tau * gy) * inv;
      }
      const std::size_t i = r + w - 1;
      const double gy = last_row ? 0.0 : g[i + w] - g[i];
      const double norm = 1.0 + tau * std::abs(gy);
      p1[i] = p1[i] / norm;
      p2[i] = (p2[i] + tau * gy) / norm;
    }
  }
  divergence();
  std::vector<float> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<float>(f[i] - lambda * div[i]);
  return u;
}

}  // namespace

FlowField tv_flow(const FlowField& flow, double lambda, int iterations) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("tv_flow: lambda must be positive");
  }
  if (iterations < 1) throw InvalidArgument("tv_flow: iterations must be at least 1");
  auto ux = tv_denoise_plane(flow.vx(), flow.width(), flow.height(), lambda, iterations);
  auto uy = tv_denoise_plane(flow.vy(), flow.width(), flow.height(), lambda, iterations);
  return FlowField(flow.width(), flow.height(), std::move(ux), std::move(uy));
}

double tv_energy(const FlowField& original, const FlowField& denoised, double lambda) {
  if (original.width() != denoised.width() || original.height() != denoised.height()) {
    throw InvalidArgument("tv_energy: dimension mismatch");
  }
  const int w = original.width();
  const int h = original.height();
  double fidelity = 0.0;
  double tv = 0.0;
  for (auto [f, u] : {std::pair{original.vx(), denoised.vx()}, std::pair{original.vy(), denoised.vy()}}) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double d = double(u[i]) - double(f[i]);
        fidelity += d * d;
        const double gx = x < w - 1 ? double(u[i + 1]) - double(u[i]) : 0.0;
        const double gy = y < h - 1 ? double(u[i + w]) - double(u[i]) : 0.0;
        tv += std::sqrt(gx * gx + gy * gy);
      }
    }
  }
  return fidelity / (2.0 * lambda) + tv;
}

SpeedSeries kalman_speed(const SpeedSeries& series, double q, double r) {
  if (!(q > 0.0) || !(r > 0.0) || !std::isfinite(q) || !std::isfinite(r)) {
    throw InvalidArgument("kalman_speed: variances must be positive");
  }
  std::vector<double> out(series.size());
  if (series.empty()) return SpeedSeries(std::move(out), series.fps());
  double x = series[0];
  double p = r;
  out[0] = std::max(0.0, x);
  for (std::size_t t = 1; t < series.size(); ++t) {
    p += q;
    const double k = p / (p + r);
    x += k * (series[t] - x);
    p *= (1.0 - k);
    out[t] = std::max(0.0, x);
  }
  return SpeedSeries(std::move(out), series.fps());
}

FlowField apply_filter(const FilterSpec& spec, const FlowField& flow) {
  switch (spec.kind()) {
    case FilterKind::median: return median_flow(flow, spec.window());
    case FilterKind::bilateral: return bilateral_flow(flow, spec.sigma_s(), spec.sigma_r());
    case FilterKind::tv: return tv_flow(flow, spec.lambda(), spec.iterations());
    case FilterKind::kalman: break;
  }
  throw InvalidArgument("apply_filter: " + spec.describe() + " does not act on flow fields");
}

SpeedSeries apply_filter(const FilterSpec& spec, const SpeedSeries& series) {
  if (spec.kind() != FilterKind::kalman) {
    throw InvalidArgument("apply_filter: " + spec.describe() + " does not act on speed series");
  }
  return kalman_speed(series, spec.process_variance(), spec.measurement_variance());
}

FlowField crop(const FlowField& flow, Rect region) {
  if (region.empty() || region.x < 0 || region.y < 0 || region.x + region.width > flow.width() ||
      region.y + region.height > flow.height()) {
    throw InvalidArgument("crop: region outside the field");
  }
  std::vector<float> vx, vy;
  vx.reserve(static_cast<std::size_t>(region.width) * region.height);
  vy.reserve(vx.capacity());
  for (int y = region.y; y < region.y + region.height; ++y) {
    const auto row = static_cast<std::size_t>(y) * flow.width() + region.x;
    vx.insert(vx.end(), flow.vx().begin() + row, flow.vx().begin() + row + region.width);
    vy.insert(vy.end(), flow.vy().begin() + row, flow.vy().begin() + row + region.width);
  }
  return FlowField(region.width, region.height, std::move(vx), std::move(vy));
}

FlowField apply_filter_in_region(const FilterSpec& spec, const FlowField& flow, Rect roi) {
  if (roi.empty()) return flow;
  const int margin = spec.support_radius();
  const int x0 = std::max(0, roi.x - margin);
  const int y0 = std::max(0, roi.y - margin);
  const int x1 = std::min(flow.width(), roi.x + roi.width + margin);
  const int y1 = std::min(flow.height(), roi.y + roi.height + margin);
  const Rect region{x0, y0, x1 - x0, y1 - y0};
  const FlowField filtered = apply_filter(spec, crop(flow, region));

  std::vector<float> vx(flow.vx().begin(), flow.vx().end());
  std::vector<float> vy(flow.vy().begin(), flow.vy().end());
  for (int y = 0; y < region.height; ++y) {
    const auto dst = static_cast<std::size_t>(y + y0) * flow.width() + x0;
    const auto src = static_cast<std::size_t>(y) * region.width;
    std::copy_n(filtered.vx().begin() + src, region.width, vx.begin() + dst);
    std::copy_n(filtered.vy().begin() + src, region.width, vy.begin() + dst);
  }
  return FlowField(flow.width(), flow.height(), std::move(vx), std::move(vy));
}

}  // namespace opph
