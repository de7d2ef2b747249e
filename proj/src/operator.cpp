#include "opph/operator.hpp"

#include <algorithm>
#include <string>
#include <thread>


namespace opph {

namespace {

void require_same_size(int w0, int h0, int w1, int h1, const char* where) {
  if (w0 != w1 || h0 != h1) {
    throw InvalidArgument(std::string(where) + ": dimension mismatch (" + std::to_string(w0) +
                          "x" + std::to_string(h0) + " vs " + std::to_string(w1) + "x" +
                          std::to_string(h1) + ")");
  }
}

}  // namespace

BinaryImage diff_threshold(const Frame& a, const Frame& b, int theta) {
  require_same_size(a.width(), a.height(), b.width(), b.height(), "diff_threshold");
  if (theta < 0 || theta > 255) {
    throw InvalidArgument("diff_threshold: theta must lie in [0, 255]");
  }
  const std::uint8_t* pa = a.pixels().data();
  const std::uint8_t* pb = b.pixels().data();
  const std::size_t count = a.pixel_count();
  std::vector<std::uint8_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = 3 * i;
    const int dr = std::abs(int(pa[k]) - int(pb[k]));
    const int dg = std::abs(int(pa[k + 1]) - int(pb[k + 1]));
    const int db = std::abs(int(pa[k + 2]) - int(pb[k + 2]));
    out[i] = static_cast<std::uint8_t>((dr > theta) & (dg > theta) & (db > theta));
  }
  return BinaryImage(a.width(), a.height(), std::move(out));
}

BinaryImage apply_mask(const BinaryImage& img, const BodyMask& mask) {
  require_same_size(img.width(), img.height(), mask.width(), mask.height(), "apply_mask");
  auto vi = img.values();
  auto vm = mask.values();
  std::vector<std::uint8_t> out(vi.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vi[i] & vm[i];
  return BinaryImage(img.width(), img.height(), std::move(out));
}

BinaryImage spatial_median(const BinaryImage& img, int n) {
  if (n < 1 || n % 2 == 0) {
    throw InvalidArgument("spatial_median: n must be odd and positive, got " + std::to_string(n));
  }
  if (n > std::min(img.width(), img.height())) {
    throw InvalidArgument("spatial_median: n = " + std::to_string(n) +
                          " exceeds the image size");
  }
  if (n == 1) return img;
  // Binary input: the median is a majority vote, so running box counts suffice.
  const int w = img.width(), h = img.height(), r = n / 2;
  const auto v = img.values();
  const int need = n * n / 2;  // output 1 iff count > need
  std::vector<std::uint8_t> out(v.size());
  std::vector<int> col(static_cast<std::size_t>(w), 0);  // column counts over rows y-r .. y+r
  auto add_row = [&](int y, int sign) {
    const std::uint8_t* row = v.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) col[x] += sign * row[x];
  };
  for (int y = 0; y <= std::min(r, h - 1); ++y) add_row(y, 1);
  for (int y = 0; y < h; ++y) {
    int sum = 0;
    for (int x = 0; x <= std::min(r, w - 1); ++x) sum += col[x];
    std::uint8_t* o = out.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      o[x] = sum > need ? 1 : 0;
      if (x + r + 1 < w) sum += col[x + r + 1];
      if (x - r >= 0) sum -= col[x - r];
    }
    if (y + r + 1 < h) add_row(y + r + 1, 1);
    if (y - r >= 0) add_row(y - r, -1);
  }
  return BinaryImage(w, h, std::move(out));
}

std::uint8_t compress(const BinaryImage& p, int min_active_pixels) {
  if (min_active_pixels < 1) throw InvalidArgument("compress: min_active_pixels must be >= 1");
  return p.count() >= static_cast<std::size_t>(min_active_pixels) ? 1 : 0;
}

std::vector<std::uint8_t> temporal_median(std::span<const std::uint8_t> s, int m,
                                          TemporalAlignment alignment) {
  if (m < 1 || m % 2 == 0) {
    throw InvalidArgument("temporal_median: m must be odd and positive, got " + std::to_string(m));
  }
  if (s.empty()) throw InvalidArgument("temporal_median: empty sequence");
  for (std::uint8_t v : s) {
    if (v > 1) throw InvalidArgument("temporal_median: values must be 0 or 1");
  }

  const auto len = static_cast<long>(s.size());
  const long half = m / 2;
  const long lead = alignment == TemporalAlignment::centered ? half : m - 1;
  const long trail = alignment == TemporalAlignment::centered ? half : 0;

  // prefix[k] = ones among padded[0 .. k), where padded[i] = s[clamp(i - lead)].
  const long padded_len = len + lead + trail;
  std::vector<int> prefix(static_cast<std::size_t>(padded_len) + 1, 0);
  for (long i = 0; i < padded_len; ++i) {
    const long src = std::clamp(i - lead, 0L, len - 1);
    prefix[i + 1] = prefix[i] + s[src];
  }

  std::vector<std::uint8_t> out(s.size());
  for (long t = 0; t < len; ++t) {
    // Padded window for output t covers padded[t .. t + m).
    const int ones = prefix[t + m] - prefix[t];
    out[t] = 2 * ones > m ? 1 : 0;
  }
  return out;
}

SpeedSeries gate_series(const SpeedSeries& speeds, std::span<const std::uint8_t> gate) {
  if (speeds.size() != gate.size()) {
    throw InvalidArgument("gate_series: " + std::to_string(speeds.size()) + " speeds vs " +
                          std::to_string(gate.size()) + " gate values");
  }
  std::vector<double> out(speeds.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = gate[t] ? speeds[t] : 0.0;
  }
  return SpeedSeries(std::move(out), speeds.fps());
}

SpeedSeries gate_series(const SpeedSeries& speeds, const GateSignal& gate) {
  return gate_series(speeds, gate.filtered());
}

std::uint8_t motion_indicator(const Frame& a, const Frame& b, const BodyMask& pair_mask,
                              const OpphConfig& cfg) {
  const BinaryImage large_change = diff_threshold(a, b, cfg.theta());
  const BinaryImage masked = apply_mask(large_change, pair_mask);
  if (masked.count() == 0) return 0;  // the median of an all-zero image is all-zero
  return compress(spatial_median(masked, cfg.n()), cfg.min_active_pixels());
}

OpphResult finish_opph(std::vector<std::uint8_t> raw_indicator, const SpeedSeries& speeds,
                       const OpphConfig& cfg, TemporalAlignment alignment) {
  auto filtered = temporal_median(raw_indicator, cfg.m(), alignment);
  SpeedSeries gated = gate_series(speeds, filtered);
  return {std::move(gated), GateSignal(std::move(raw_indicator), std::move(filtered))};
}

OpphResult run_opph(std::span<const Frame> frames, std::span<const BodyMask> masks,
                    const SpeedSeries& speeds, const OpphConfig& cfg,
                    const OpphOptions& options) {
  if (frames.size() < 2) throw InvalidArgument("run_opph: need at least two frames");
  const std::size_t pairs = frames.size() - 1;
  if (masks.size() != pairs) {
    throw InvalidArgument("run_opph: expected " + std::to_string(pairs) + " pair masks, got " +
                          std::to_string(masks.size()));
  }
  if (speeds.size() != pairs) {
    throw InvalidArgument("run_opph: expected " + std::to_string(pairs) + " speeds, got " +
                          std::to_string(speeds.size()));
  }

  std::vector<std::uint8_t> indicator(pairs, 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      indicator[t] = motion_indicator(frames[t], frames[t + 1], masks[t], cfg);
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, pairs);
  if (jobs == 1) {
    work(0, pairs);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    const std::size_t chunk = (pairs + jobs - 1) / jobs;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] {
        try {
          work(std::min(pairs, j * chunk), std::min(pairs, (j + 1) * chunk));
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return finish_opph(std::move(indicator), speeds, cfg, options.alignment);
}

}  // namespace opph
