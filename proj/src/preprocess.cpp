#include "agelab/preprocess.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace agelab {

void StatsAccumulator::add(const nn::Tensor& image) {
    for (std::size_t i = 0; i < image.numel(); ++i) {
        const double v = image[i];
        sum_ += v;
        sum_sq_ += v * v;
    }
    count_ += image.numel();
}

StandardizationStats StatsAccumulator::finalize() const {
    if (count_ == 0) throw DegenerateDataError("no pixels accumulated for standardization stats");
    const double n = static_cast<double>(count_);
    const double mean = sum_ / n;
    const double var = sum_sq_ / n - mean * mean;
    const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
    if (!(sd > 0.0)) {
        throw DegenerateDataError("all pixels equal: standard deviation is zero");
    }
    return {mean, sd};
}

StandardizationStats compute_standardization_stats(const std::vector<nn::Tensor>& images) {
    StatsAccumulator acc;
    for (const nn::Tensor& img : images) acc.add(img);
    return acc.finalize();
}

void standardize(nn::Tensor& image, const StandardizationStats& stats) {
    if (!(stats.std > 0.0)) throw DegenerateDataError("standardization needs a positive std");
    const float mean = static_cast<float>(stats.mean);
    const float inv = static_cast<float>(1.0 / stats.std);
    for (std::size_t i = 0; i < image.numel(); ++i) image[i] = (image[i] - mean) * inv;
}

void zero_center(nn::Tensor& image, double mean) {
    const float m = static_cast<float>(mean);
    for (std::size_t i = 0; i < image.numel(); ++i) image[i] -= m;
}

void save_stats(const StandardizationStats& stats, const std::string& split_name,
                std::uint64_t seed, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open stats file for writing: " + path.string());
    char line[80];
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", stats.mean, stats.std);
    out << line;
    out << "# computed over training split '" << split_name << "' with seed " << seed << '\n';
    if (!out) throw FormatError("failed writing stats file: " + path.string());
}

StandardizationStats load_stats(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open stats file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("stats file is empty: " + path.string());
    StandardizationStats stats;
    char trailing = 0;
    if (std::sscanf(line.c_str(), "%lg,%lg%c", &stats.mean, &stats.std, &trailing) != 2) {
        throw FormatError("stats file must start with 'mean,std': " + path.string());
    }
    if (!(stats.std > 0.0)) throw FormatError("stats file has non-positive std: " + path.string());
    return stats;
}

} // namespace agelab
