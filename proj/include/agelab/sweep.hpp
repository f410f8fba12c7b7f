#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "agelab/dataset.hpp"
#include "agelab/train.hpp"

namespace agelab {

enum class SweepAxis { Epochs, Dropout, DenseSizes, AlphaSchedule, Encoding };

const char* sweep_axis_name(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

// One table row: the swept value as written, the test metric of the best and
// final checkpoints, or the error that stopped that run. The metric is
// accuracy for gender heads and MAE in years for age heads.
struct SweepRow {
    std::string value;
    double best_metric = 0.0;
    double final_metric = 0.0;
    std::string error;

    bool failed() const { return !error.empty(); }
};

// Everything one full train+eval needs. Datasets are referenced, not copied,
// so a sweep shares them across values.
struct ExperimentSetup {
    nn::ModelConfig model;
    const Dataset* train = nullptr;
    const Dataset* val = nullptr;
    const Dataset* test = nullptr;
    TrainConfig config;
};

// Value syntax per axis: epochs "20"; dropout "0.5"; dense_sizes "512,512";
// alpha_schedule "static:2.5" or "linear:1.0:3.5"; encoding "one-hot",
// "static:<a>" or "linear:<lo>:<hi>".
ExperimentSetup apply_sweep_value(SweepAxis axis, const std::string& value,
                                  const ExperimentSetup& base);

// One full train+eval per value, all sharing the base seed. A failing value
// becomes a row-level error; the sweep itself keeps going. Row order follows
// value order regardless of how runs are scheduled.
std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<std::string>& values,
                            const ExperimentSetup& base);

// CSV with header `value,best,final,error`; values containing commas are
// double-quoted.
void save_sweep_table(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

} // namespace agelab
