#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agelab/age_encoding.hpp"
#include "agelab/dataset.hpp"
#include "agelab/loss.hpp"
#include "agelab/model.hpp"
#include "agelab/preprocess.hpp"

namespace agelab {

enum class InputMode { Standardize, ZeroCenter, Raw };
enum class AgeEncodingKind { OneHot, Ldae };
enum class AgeLossKind { DistributionMae, CrossEntropy };
enum class AgeDecoder { Argmax, ExpectedValue };

const char* input_mode_name(InputMode m);
const char* age_encoding_name(AgeEncodingKind k);
const char* age_loss_name(AgeLossKind k);
const char* age_decoder_name(AgeDecoder d);

// One training run's knobs. `epochs` counts per serial chunk, so a run with
// serial_splits=3 logs 3*epochs epochs in total. Gender targets are the pair
// (male, female); age targets are 81-way distributions over ages 5..85.
struct TrainConfig {
    int batch_size = 50;
    int epochs = 60;
    int serial_splits = 1;
    int val_sample_size = 500;
    nn::LossKind gender_loss = nn::LossKind::BinaryCrossEntropy;
    AgeLossKind age_loss = AgeLossKind::DistributionMae;
    AgeEncodingKind encoding = AgeEncodingKind::Ldae;
    AlphaSchedule alpha;
    AgeDecoder decoder = AgeDecoder::ExpectedValue;
    InputMode input_mode = InputMode::Standardize;
    double dropout_override = -1.0;  // >= 0 replaces every dropout layer's rate
    bool augment = false;
    int crop_w = 0;  // 12-crop window; must equal the model input when augmenting
    int crop_h = 0;
    std::uint64_t seed = 0;
};

struct EpochLog {
    int epoch = 0;  // global, 1-based, across serial chunks
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_metric = 0.0;  // accuracy for gender heads, MAE in years for age heads
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    int best_epoch = 0;  // 1-based; earliest argmin of validation loss
};

struct TrainResult {
    nn::Model<float> best;
    nn::Model<float> final;
    TrainLog log;
    StandardizationStats stats;  // resolved input transform; (0,1) means untouched
};

// Loss between two 81-way age distributions: elementwise MAE by default, or
// cross-entropy against the target distribution.
double age_distribution_loss(const AgeDistribution& pred, const AgeDistribution& target,
                             AgeLossKind kind);

// The target vector a record trains against under this config.
nn::Tensor make_target(const LabelRecord& label, nn::Head head, const TrainConfig& cfg);

// Reshapes an image for a model: resizes when the pixel grid differs from the
// model input, then applies the (mean, std) transform. Channel mismatches are
// shape errors.
nn::Tensor prepare_input(const nn::Tensor& image, const std::vector<int>& input_shape,
                         const StandardizationStats& stats);

// The full protocol: resolves input statistics from the training set, expands
// it by 12-crop when configured, draws the validation sample once (seeded),
// then trains serial chunks of `epochs` epochs each with per-epoch seeded
// shuffles, batch-averaged gradients and Adadelta updates, logging one line
// per epoch and keeping the best-validation-loss weights.
TrainResult train(nn::Model<float> model, const Dataset& train_set, const Dataset& val_source,
                  const TrainConfig& cfg);

double evaluate_gender(const nn::Model<float>& model, const Dataset& test,
                       const StandardizationStats& stats = {0.0, 1.0});
double evaluate_age(const nn::Model<float>& model, const Dataset& test, AgeDecoder decoder,
                    const StandardizationStats& stats = {0.0, 1.0});

// TrainLog CSV: `epoch,train_loss,val_loss,val_metric,seconds` plus a trailing
// `# best_epoch N` comment. Everything except wall seconds is deterministic.
void save_train_log(const TrainLog& log, const std::filesystem::path& path);

} // namespace agelab
