#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace opph {

enum class Border {
  zero,       // out-of-image samples read as 0
  replicate,  // out-of-image samples read the nearest edge pixel
};

// Median of the n x n window centred on every pixel of a row-major plane.
// n must be odd and positive. 8-bit input uses a sliding histogram; other
// types gather the window and select the middle element.
template <class T>
std::vector<T> window_median(std::span<const T> src, int width, int height, int n, Border border);

template <>
std::vector<std::uint8_t> window_median(std::span<const std::uint8_t> src, int width, int height,
                                        int n, Border border);
extern template std::vector<float> window_median(std::span<const float>, int, int, int, Border);

}  // namespace opph
