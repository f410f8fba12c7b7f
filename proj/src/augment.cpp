#include "agelab/augment.hpp"

#include <string>

#include "agelab/image.hpp"

namespace agelab {

using nn::Tensor;

Tensor crop(const Tensor& image, int x0, int y0, int crop_w, int crop_h) {
    if (image.shape.size() != 3) {
        throw ShapeError("crop wants [C,H,W], got " + nn::shape_to_string(image.shape));
    }
    const int c = image.shape[0], h = image.shape[1], w = image.shape[2];
    if (crop_w < 1 || crop_h < 1 || x0 < 0 || y0 < 0 || x0 + crop_w > w || y0 + crop_h > h) {
        throw SizingError("crop " + std::to_string(crop_w) + "x" + std::to_string(crop_h) +
                          " at (" + std::to_string(x0) + "," + std::to_string(y0) +
                          ") does not fit " + nn::shape_to_string(image.shape));
    }
    Tensor out({c, crop_h, crop_w});
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < crop_h; ++y) {
            const float* src =
                image.ptr() + (static_cast<std::size_t>(ch) * h + y0 + y) * w + x0;
            float* dst = out.ptr() + (static_cast<std::size_t>(ch) * crop_h + y) * crop_w;
            std::copy(src, src + crop_w, dst);
        }
    }
    return out;
}

Tensor mirror_horizontal(const Tensor& image) {
    if (image.shape.size() != 3) {
        throw ShapeError("mirror wants [C,H,W], got " + nn::shape_to_string(image.shape));
    }
    const int c = image.shape[0], h = image.shape[1], w = image.shape[2];
    Tensor out(image.shape);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            const float* src = image.ptr() + (static_cast<std::size_t>(ch) * h + y) * w;
            float* dst = out.ptr() + (static_cast<std::size_t>(ch) * h + y) * w;
            for (int x = 0; x < w; ++x) dst[x] = src[w - 1 - x];
        }
    }
    return out;
}

std::vector<Tensor> twelve_crop(const Tensor& image, int crop_w, int crop_h) {
    if (image.shape.size() != 3) {
        throw ShapeError("twelve_crop wants [C,H,W], got " + nn::shape_to_string(image.shape));
    }
    const int h = image.shape[1], w = image.shape[2];
    if (crop_w > w || crop_h > h) {
        throw SizingError("crop " + std::to_string(crop_w) + "x" + std::to_string(crop_h) +
                          " larger than image " + nn::shape_to_string(image.shape));
    }
    const int cx = (w - crop_w) / 2;
    const int cy = (h - crop_h) / 2;
    std::vector<Tensor> out;
    out.reserve(12);
    auto push_with_mirror = [&](Tensor base) {
        out.push_back(base);
        out.push_back(mirror_horizontal(base));
    };
    push_with_mirror(crop(image, 0, 0, crop_w, crop_h));                    // top left
    push_with_mirror(crop(image, w - crop_w, 0, crop_w, crop_h));          // top right
    push_with_mirror(crop(image, 0, h - crop_h, crop_w, crop_h));          // bottom left
    push_with_mirror(crop(image, w - crop_w, h - crop_h, crop_w, crop_h)); // bottom right
    push_with_mirror(crop(image, cx, cy, crop_w, crop_h));                 // center
    push_with_mirror(resize_bilinear(image, crop_h, crop_w));              // full, resized
    return out;
}

} // namespace agelab
