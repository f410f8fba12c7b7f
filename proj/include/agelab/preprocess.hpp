#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agelab/tensor.hpp"

namespace agelab {

struct StandardizationStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation, > 0
};

// Streaming mean/std over every channel value of a training set; feed one
// image at a time so full rosters never need to sit in memory.
class StatsAccumulator {
public:
    void add(const nn::Tensor& image);
    StandardizationStats finalize() const;  // degenerate-data error when std is 0

private:
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
    std::uint64_t count_ = 0;
};

StandardizationStats compute_standardization_stats(const std::vector<nn::Tensor>& images);

// (P - mean) / std, in place.
void standardize(nn::Tensor& image, const StandardizationStats& stats);
// P - mean, in place.
void zero_center(nn::Tensor& image, double mean);

// Stats file: one `mean,std` line followed by a provenance comment naming the
// split and seed that produced the numbers.
void save_stats(const StandardizationStats& stats, const std::string& split_name,
                std::uint64_t seed, const std::filesystem::path& path);
StandardizationStats load_stats(const std::filesystem::path& path);

} // namespace agelab
