#pragma once

#include <vector>

#include "agelab/tensor.hpp"

namespace agelab {

// Pixel-exact rectangular crop of a [C,H,W] tensor; (x0,y0) is the top-left
// corner of the window.
nn::Tensor crop(const nn::Tensor& image, int x0, int y0, int crop_w, int crop_h);

// Left-right flip; mirror of a mirror is the original, bit for bit.
nn::Tensor mirror_horizontal(const nn::Tensor& image);

// Twelve views of one image: four corner crops, the center crop and the full
// image resized to crop size, each followed immediately by its horizontal
// mirror. Order: TL, TL', TR, TR', BL, BL', BR, BR', center, center',
// resized, resized'.
std::vector<nn::Tensor> twelve_crop(const nn::Tensor& image, int crop_w, int crop_h);

} // namespace agelab
