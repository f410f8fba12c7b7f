#pragma once

#include <filesystem>
#include <vector>

#include "agelab/labels.hpp"
#include "agelab/tensor.hpp"

namespace agelab {

// Labels and pixel tensors, index-aligned.
struct Dataset {
    std::vector<LabelRecord> labels;
    std::vector<nn::Tensor> images;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }
};

// Loads every image a manifest names, resolved relative to the manifest's
// directory, optionally resized to work_h x work_w (0 keeps native size).
// A manifest with rejected rows is refused outright: silent sample loss would
// poison any experiment downstream.
Dataset load_dataset(const std::filesystem::path& manifest, int work_h = 0, int work_w = 0,
                     AgeWindow window = {});

// Same, for records already in memory, rooted at an explicit directory.
Dataset load_dataset(const std::vector<LabelRecord>& records, const std::filesystem::path& root,
                     int work_h = 0, int work_w = 0);

} // namespace agelab
