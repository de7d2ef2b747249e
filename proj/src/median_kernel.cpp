#include "opph/median_kernel.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "opph/errors.hpp"

namespace opph {

namespace {

// Copy src into a (w + 2r) x (h + 2r) plane with the requested border fill.
template <class T>
std::vector<T> pad_plane(std::span<const T> src, int width, int height, int r, Border border) {
  const int pw = width + 2 * r;
  const int ph = height + 2 * r;
  std::vector<T> out(static_cast<std::size_t>(pw) * ph, T{});
  for (int py = 0; py < ph; ++py) {
    int sy = py - r;
    if (sy < 0 || sy >= height) {
      if (border == Border::zero) continue;
      sy = std::clamp(sy, 0, height - 1);
    }
    const T* row = src.data() + static_cast<std::size_t>(sy) * width;
    T* dst = out.data() + static_cast<std::size_t>(py) * pw;
    std::copy(row, row + width, dst + r);
    if (border == Border::replicate) {
      std::fill(dst, dst + r, row[0]);
      std::fill(dst + r + width, dst + pw, row[width - 1]);
    }
  }
  return out;
}

void check_args(std::size_t size, int width, int height, int n) {
  if (n < 1 || n % 2 == 0) {
    throw InvalidArgument("window_median: window side must be odd and positive, got " +
                          std::to_string(n));
  }
  if (width < 1 || height < 1 || size != static_cast<std::size_t>(width) * height) {
    throw InvalidArgument("window_median: plane size does not match dimensions");
  }
}

}  // namespace

template <>
std::vector<std::uint8_t> window_median(std::span<const std::uint8_t> src, int width, int height,
                                        int n, Border border) {
  check_args(src.size(), width, height, n);
  const int r = n / 2;
  const int pw = width + 2 * r;
  const auto padded = pad_plane(src, width, height, r, border);
  const int rank = (n * n) / 2;  // 0-based index of the median

  std::vector<std::uint8_t> out(src.size());
  std::array<int, 256> hist{};
  for (int y = 0; y < height; ++y) {
    hist.fill(0);
    // Window rows y .. y + n - 1 in padded coordinates.
    const std::uint8_t* top = padded.data() + static_cast<std::size_t>(y) * pw;
    for (int dy = 0; dy < n; ++dy) {
      for (int dx = 0; dx < n; ++dx) ++hist[top[dy * pw + dx]];
    }
    for (int x = 0; x < width; ++x) {
      if (x > 0) {
        for (int dy = 0; dy < n; ++dy) {
          --hist[top[dy * pw + x - 1]];
          ++hist[top[dy * pw + x + n - 1]];
        }
      }
      int seen = 0;
      int v = 0;
      while (true) {
        seen += hist[v];
        if (seen > rank) break;
        ++v;
      }
      out[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint8_t>(v);
    }
  }
  return out;
}

template <class T>
std::vector<T> window_median(std::span<const T> src, int width, int height, int n, Border border) {
  check_args(src.size(), width, height, n);
  const int r = n / 2;
  const int pw = width + 2 * r;
  const auto padded = pad_plane(src, width, height, r, border);
  const auto mid = static_cast<std::ptrdiff_t>(n * n / 2);

  std::vector<T> out(src.size());
  if (n == 3) {
    // Median-of-9 exchange network (Paeth).
    auto sort2 = [](T& a, T& b) {
      const T lo = std::min(a, b);
      b = std::max(a, b);
      a = lo;
    };
    for (int y = 0; y < height; ++y) {
      const T* r0 = padded.data() + static_cast<std::size_t>(y) * pw;
      const T* r1 = r0 + pw;
      const T* r2 = r1 + pw;
      T* o = out.data() + static_cast<std::size_t>(y) * width;
      for (int x = 0; x < width; ++x) {
        T p0 = r0[x], p1 = r0[x + 1], p2 = r0[x + 2];
        T p3 = r1[x], p4 = r1[x + 1], p5 = r1[x + 2];
        T p6 = r2[x], p7 = r2[x + 1], p8 = r2[x + 2];
        sort2(p1, p2); sort2(p4, p5); sort2(p7, p8);
        sort2(p0, p1); sort2(p3, p4); sort2(p6, p7);
        sort2(p1, p2); sort2(p4, p5); sort2(p7, p8);
        sort2(p0, p3); sort2(p5, p8); sort2(p4, p7);
        sort2(p3, p6); sort2(p1, p4); sort2(p2, p5);
        sort2(p4, p7); sort2(p4, p2); sort2(p6, p4);
        sort2(p4, p2);
        o[x] = p4;
      }
    }
    return out;
  }
  std::vector<T> window(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto it = window.begin();
      for (int dy = 0; dy < n; ++dy) {
        const T* row = padded.data() + static_cast<std::size_t>(y + dy) * pw + x;
        it = std::copy(row, row + n, it);
      }
      std::nth_element(window.begin(), window.begin() + mid, window.end());
      out[static_cast<std::size_t>(y) * width + x] = window[mid];
    }
  }
  return out;
}

template std::vector<float> window_median(std::span<const float>, int, int, int, Border);

}  // namespace opph
