#pragma once

#include "opph/types.hpp"

namespace opph {

struct FlowParams {
  int levels = 3;
  int window = 15;  // odd side of the least-squares window
  int iterations = 3;
  // Pixels whose window-averaged structure tensor (intensities in [0, 1])
  // has a smaller eigenvalue below this keep the coarse estimate.
  double min_eigenvalue = 1e-4;
};

// Coarse-to-fine iterative Lucas-Kanade flow from a to b on the channel-mean
// grayscale images. Deterministic.
FlowField dense_flow(const Frame& a, const Frame& b, const FlowParams& params = {});

// dense_flow evaluated on the crop roi dilated by margin (clipped to the
// image); vectors outside the crop are zero.
FlowField dense_flow_region(const Frame& a, const Frame& b, Rect roi, int margin,
                            const FlowParams& params = {});

// (R + G + B) / 3 rounded to the nearest integer.
std::vector<std::uint8_t> to_gray(const Frame& frame);

}  // namespace opph
