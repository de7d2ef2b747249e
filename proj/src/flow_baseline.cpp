#include "opph/flow_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace opph {

namespace {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<float> v;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.0f) {}

  float at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane gray_plane(const Frame& f, Rect region) {
  Plane out(region.width, region.height);
  for (int y = 0; y < region.height; ++y) {
    for (int x = 0; x < region.width; ++x) {
      const int sum = f.at(region.x + x, region.y + y, 0) + f.at(region.x + x, region.y + y, 1) +
                      f.at(region.x + x, region.y + y, 2);
      out.v[static_cast<std::size_t>(y) * region.width + x] = static_cast<float>((sum + 1) / 3);
    }
  }
  return out;
}

Plane downsample(const Plane& src) {
  Plane out(std::max(1, src.w / 2), std::max(1, src.h / 2));
  for (int y = 0; y < out.h; ++y) {
    const int y0 = std::min(2 * y, src.h - 1), y1 = std::min(2 * y + 1, src.h - 1);
    for (int x = 0; x < out.w; ++x) {
      const int x0 = std::min(2 * x, src.w - 1), x1 = std::min(2 * x + 1, src.w - 1);
      out.v[static_cast<std::size_t>(y) * out.w + x] =
          0.25f * (src.at(x0, y0) + src.at(x1, y0) + src.at(x0, y1) + src.at(x1, y1));
    }
  }
  return out;
}

void gradients(const Plane& p, Plane& gx, Plane& gy) {
  gx = Plane(p.w, p.h);
  gy = Plane(p.w, p.h);
  for (int y = 0; y < p.h; ++y) {
    const int ym = std::max(0, y - 1), yp = std::min(p.h - 1, y + 1);
    for (int x = 0; x < p.w; ++x) {
      const int xm = std::max(0, x - 1), xp = std::min(p.w - 1, x + 1);
      const std::size_t i = static_cast<std::size_t>(y) * p.w + x;
      gx.v[i] = 0.5f * (p.at(xp, y) - p.at(xm, y));
      gy.v[i] = 0.5f * (p.at(x, yp) - p.at(x, ym));
    }
  }
}

// Sum over the (2r + 1)^2 window, zero outside the plane.
void box_sum(const std::vector<float>& src, int w, int h, int r, std::vector<float>& dst,
             std::vector<double>& row_tmp, std::vector<double>& col_acc) {
  row_tmp.assign(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    const float* s = src.data() + static_cast<std::size_t>(y) * w;
    double* d = row_tmp.data() + static_cast<std::size_t>(y) * w;
    double acc = 0.0;
    for (int x = 0; x < std::min(r, w); ++x) acc += s[x];
    for (int x = 0; x < w; ++x) {
      if (x + r < w) acc += s[x + r];
      if (x - r - 1 >= 0) acc -= s[x - r - 1];
      d[x] = acc;
    }
  }
  col_acc.assign(w, 0.0);
  for (int y = 0; y < std::min(r, h); ++y) {
    const double* s = row_tmp.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) col_acc[x] += s[x];
  }
  dst.resize(src.size());
  for (int y = 0; y < h; ++y) {
    if (y + r < h) {
      const double* s = row_tmp.data() + static_cast<std::size_t>(y + r) * w;
      for (int x = 0; x < w; ++x) col_acc[x] += s[x];
    }
    if (y - r - 1 >= 0) {
      const double* s = row_tmp.data() + static_cast<std::size_t>(y - r - 1) * w;
      for (int x = 0; x < w; ++x) col_acc[x] -= s[x];
    }
    float* d = dst.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) d[x] = static_cast<float>(col_acc[x]);
  }
}

float sample_bilinear(const Plane& p, float x, float y) {
  x = std::clamp(x, 0.0f, static_cast<float>(p.w - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(p.h - 1));
  const int x0 = std::min(static_cast<int>(x), p.w - 1);
  const int y0 = std::min(static_cast<int>(y), p.h - 1);
  const int x1 = std::min(x0 + 1, p.w - 1);
  const int y1 = std::min(y0 + 1, p.h - 1);
  const float fx = x - static_cast<float>(x0);
  const float fy = y - static_cast<float>(y0);
  const float top = p.at(x0, y0) + fx * (p.at(x1, y0) - p.at(x0, y0));
  const float bot = p.at(x0, y1) + fx * (p.at(x1, y1) - p.at(x0, y1));
  return top + fy * (bot - top);
}

// Flow on the coarse grid resampled to a (w, h) grid and scaled by 2.
void upsample_flow(const Plane& cu, const Plane& cv, int w, int h, Plane& u, Plane& v) {
  u = Plane(w, h);
  v = Plane(w, h);
  for (int y = 0; y < h; ++y) {
    const float sy = (static_cast<float>(y) + 0.5f) * 0.5f - 0.5f;
    for (int x = 0; x < w; ++x) {
      const float sx = (static_cast<float>(x) + 0.5f) * 0.5f - 0.5f;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      u.v[i] = 2.0f * sample_bilinear(cu, sx, sy);
      v.v[i] = 2.0f * sample_bilinear(cv, sx, sy);
    }
  }
}

void check_params(const FlowParams& params) {
  if (params.levels < 1) throw InvalidArgument("dense_flow: levels must be at least 1");
  if (params.window < 3 || params.window % 2 == 0) {
    throw InvalidArgument("dense_flow: window must be odd and at least 3");
  }
  if (params.iterations < 1) throw InvalidArgument("dense_flow: iterations must be at least 1");
  if (!(params.min_eigenvalue >= 0.0)) {
    throw InvalidArgument("dense_flow: min_eigenvalue must be non-negative");
  }
}

FlowField lucas_kanade(const Frame& a, const Frame& b, Rect region, const FlowParams& params) {
  std::vector<Plane> pa{gray_plane(a, region)};
  std::vector<Plane> pb{gray_plane(b, region)};
  const int min_side = std::max(8, params.window / 2);
  for (int l = 1; l < params.levels; ++l) {
    if (pa.back().w / 2 < min_side || pa.back().h / 2 < min_side) break;
    pa.push_back(downsample(pa.back()));
    pb.push_back(downsample(pb.back()));
  }

  const int r = params.window / 2;
  const float area = static_cast<float>(params.window * params.window);
  const float eig_scale = 1.0f / (area * 255.0f * 255.0f);
  std::vector<double> row_tmp, col_acc;
  std::vector<float> sxx, sxy, syy, bx, by, prod_x, prod_y;
  Plane u, v;

  for (int level = static_cast<int>(pa.size()) - 1; level >= 0; --level) {
    const Plane& A = pa[level];
    const Plane& B = pb[level];
    const std::size_t n = A.v.size();
    if (level == static_cast<int>(pa.size()) - 1) {
      u = Plane(A.w, A.h);
      v = Plane(A.w, A.h);
    } else {
      Plane cu = std::move(u), cv = std::move(v);
      upsample_flow(cu, cv, A.w, A.h, u, v);
    }

    Plane gx, gy;
    gradients(A, gx, gy);
    prod_x.resize(n);
    prod_y.resize(n);
    std::vector<float> prod_xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      prod_x[i] = gx.v[i] * gx.v[i];
      prod_y[i] = gy.v[i] * gy.v[i];
      prod_xy[i] = gx.v[i] * gy.v[i];
    }
    box_sum(prod_x, A.w, A.h, r, sxx, row_tmp, col_acc);
    box_sum(prod_y, A.w, A.h, r, syy, row_tmp, col_acc);
    box_sum(prod_xy, A.w, A.h, r, sxy, row_tmp, col_acc);

    std::vector<std::uint8_t> solvable(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float tr = sxx[i] + syy[i];
      const float diff = sxx[i] - syy[i];
      const float lmin = 0.5f * (tr - std::sqrt(diff * diff + 4.0f * sxy[i] * sxy[i]));
      solvable[i] = lmin * eig_scale >= params.min_eigenvalue;
    }

    for (int it = 0; it < params.iterations; ++it) {
      for (int y = 0; y < A.h; ++y) {
        for (int x = 0; x < A.w; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * A.w + x;
          const float t = sample_bilinear(B, static_cast<float>(x) + u.v[i],
                                          static_cast<float>(y) + v.v[i]) - A.v[i];
          prod_x[i] = gx.v[i] * t;
          prod_y[i] = gy.v[i] * t;
        }
      }
      box_sum(prod_x, A.w, A.h, r, bx, row_tmp, col_acc);
      box_sum(prod_y, A.w, A.h, r, by, row_tmp, col_acc);
      for (std::size_t i = 0; i < n; ++i) {
        if (!solvable[i]) continue;
        const float det = sxx[i] * syy[i] - sxy[i] * sxy[i];
        if (!(det > 0.0f)) continue;
        const float du = -(syy[i] * bx[i] - sxy[i] * by[i]) / det;
        const float dv = -(sxx[i] * by[i] - sxy[i] * bx[i]) / det;
        u.v[i] += du;
        v.v[i] += dv;
      }
    }
  }
  return FlowField(u.w, u.h, std::move(u.v), std::move(v.v));
}

}  // namespace

std::vector<std::uint8_t> to_gray(const Frame& frame) {
  std::vector<std::uint8_t> out(frame.pixel_count());
  auto px = frame.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((px[3 * i] + px[3 * i + 1] + px[3 * i + 2] + 1) / 3);
  }
  return out;
}

FlowField dense_flow(const Frame& a, const Frame& b, const FlowParams& params) {
  check_params(params);
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidArgument("dense_flow: frames differ in size");
  }
  return lucas_kanade(a, b, Rect{0, 0, a.width(), a.height()}, params);
}

FlowField dense_flow_region(const Frame& a, const Frame& b, Rect roi, int margin,
                            const FlowParams& params) {
  check_params(params);
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidArgument("dense_flow_region: frames differ in size");
  }
  if (margin < 0) throw InvalidArgument("dense_flow_region: margin must be non-negative");
  FlowField out(a.width(), a.height());
  if (roi.empty()) return out;
  const int x0 = std::max(0, roi.x - margin);
  const int y0 = std::max(0, roi.y - margin);
  const int x1 = std::min(a.width(), roi.x + roi.width + margin);
  const int y1 = std::min(a.height(), roi.y + roi.height + margin);
  if (x1 <= x0 || y1 <= y0) return out;
  const Rect region{x0, y0, x1 - x0, y1 - y0};
  const FlowField local = lucas_kanade(a, b, region, params);

  std::vector<float> vx(out.size(), 0.0f), vy(out.size(), 0.0f);
  for (int y = 0; y < region.height; ++y) {
    const auto dst = static_cast<std::size_t>(y + y0) * a.width() + x0;
    const auto src = static_cast<std::size_t>(y) * region.width;
    std::copy_n(local.vx().begin() + src, region.width, vx.begin() + dst);
    std::copy_n(local.vy().begin() + src, region.width, vy.begin() + dst);
  }
  return FlowField(a.width(), a.height(), std::move(vx), std::move(vy));
}

}  // namespace opph
