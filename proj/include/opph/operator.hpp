#pragma once

// The five-stage motion gate: colour-difference thresholding, body masking,
// spatial median, compression to one indicator per frame pair with temporal
// median, and speed gating.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "opph/types.hpp"

namespace opph {

// 1 where |a - b| > theta in all three channels.
BinaryImage diff_threshold(const Frame& a, const Frame& b, int theta);

BinaryImage apply_mask(const BinaryImage& img, const BodyMask& mask);

// n x n majority filter with zero padding.
BinaryImage spatial_median(const BinaryImage& img, int n);

// 1 iff the image holds at least min_active_pixels ones.
std::uint8_t compress(const BinaryImage& p, int min_active_pixels = 1);

enum class TemporalAlignment {
  centered,  // offline: window t - m/2 .. t + m/2, edges replicated
  causal,    // live: window t - m + 1 .. t, start replicated
};

std::vector<std::uint8_t> temporal_median(std::span<const std::uint8_t> s, int m,
                                          TemporalAlignment alignment = TemporalAlignment::centered);

SpeedSeries gate_series(const SpeedSeries& speeds, std::span<const std::uint8_t> gate);
SpeedSeries gate_series(const SpeedSeries& speeds, const GateSignal& gate);

// Stages one to four (before the temporal median) for a single frame pair.
std::uint8_t motion_indicator(const Frame& a, const Frame& b, const BodyMask& pair_mask,
                              const OpphConfig& cfg);

struct OpphResult {
  SpeedSeries gated;
  GateSignal gate;
};

struct OpphOptions {
  TemporalAlignment alignment = TemporalAlignment::centered;
  // Worker threads for the per-pair stages; results do not depend on it.
  std::size_t jobs = 1;
};

// Temporal median and gating over an already collected indicator sequence.
OpphResult finish_opph(std::vector<std::uint8_t> raw_indicator, const SpeedSeries& speeds,
                       const OpphConfig& cfg,
                       TemporalAlignment alignment = TemporalAlignment::centered);

// Full operator. masks holds one mask per frame pair (see combine_masks).
OpphResult run_opph(std::span<const Frame> frames, std::span<const BodyMask> masks,
                    const SpeedSeries& speeds, const OpphConfig& cfg,
                    const OpphOptions& options = {});

}  // namespace opph
