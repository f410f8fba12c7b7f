#pragma once

#include <filesystem>

#include "agelab/tensor.hpp"

namespace agelab {

// Reads a binary netpbm image: P5 (grayscale) to a [1,H,W] tensor, P6 (RGB)
// to [3,H,W], channel order R,G,B. Only 8-bit files (maxval 255) are accepted;
// pixel values are promoted to reals in [0,255].
nn::Tensor load_pnm(const std::filesystem::path& path);

// Writes [1,H,W] as P5 or [3,H,W] as P6. Values are rounded to the nearest
// integer and clamped to 0..255.
void save_pnm(const nn::Tensor& image, const std::filesystem::path& path);

// Corner-aligned bilinear resize of a [C,H,W] tensor. A constant image stays
// constant; a resize to the same dimensions copies pixels exactly.
nn::Tensor resize_bilinear(const nn::Tensor& image, int out_h, int out_w);

// Loads and, when the file dimensions differ, resizes to the working
// resolution. Passing work_h/work_w of 0 keeps the native size.
nn::Tensor load_image(const std::filesystem::path& path, int work_h, int work_w);

} // namespace agelab
