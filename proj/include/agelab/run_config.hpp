#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agelab/model_build.hpp"
#include "agelab/sweep.hpp"
#include "agelab/synth.hpp"
#include "agelab/train.hpp"

namespace agelab {

// One JSON file drives every subcommand; each command reads its own section
// plus the shared seed and output directory. Every field has a default, and
// unknown keys anywhere are errors so a typo fails loudly instead of running
// with defaults. The resolved form is serialized next to each run's outputs.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string out = "run";

    SyntheticSpec synth;  // the section omits `seed`; the shared seed fills it

    struct Data {
        std::string manifest;        // clean / subset / stats / encode / augment input
        std::string overrides;       // optional overrides CSV for clean
        std::string train_manifest;  // train / sweep
        std::string val_manifest;    // train / sweep
        std::string test_manifest;   // eval / hier-eval / sweep
        int work_width = 0;          // 0 keeps native image size
        int work_height = 0;
        int age_lo = 16;  // accepted label window
        int age_hi = 77;
    } data;

    struct Subset {
        int size = 0;  // <= 0 picks the roster-proportional default
        bool whole_subject = false;
    } subset;

    struct ModelSpec {
        std::vector<int> input{1, 64, 64};           // C,H,W
        std::vector<nn::Stack> stacks{{32, 2}, {64, 2}};
        std::vector<int> dense{512, 512};
        float dropout = 0.5f;
        nn::Head head = nn::Head::Gender;
    } model;

    TrainConfig train;  // the section omits `seed`; the shared seed fills it

    // Transfer-learning surgery applied before training when `init` is set.
    struct Surgery {
        std::string init;          // checkpoint to start from
        bool replace_top = false;  // rebuild the top from model.dense/dropout/head
        bool freeze_backbone = false;
    } surgery;

    struct Eval {
        std::string checkpoint;
        std::string stats;  // stats file of the checkpoint's training run
    } eval;

    struct Hier {
        std::string gender_checkpoint;
        std::string male_checkpoint;
        std::string female_checkpoint;
        std::string single_checkpoint;  // optional flat-model comparison row
        std::string stats;
        AgeDecoder decoder = AgeDecoder::ExpectedValue;
    } hier;

    struct Encode {
        int age = 30;
        AgeEncodingKind encoding = AgeEncodingKind::Ldae;
        AlphaSchedule alpha;
    } encode;

    struct Augment {
        int crop_width = 0;
        int crop_height = 0;
    } augment;

    struct Sweep {
        SweepAxis axis = SweepAxis::Epochs;
        std::vector<std::string> values;
    } sweep;
};

RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::filesystem::path& path);

// Writes the fully resolved configuration, defaults and CLI overrides
// included, as pretty-printed JSON.
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

nn::ModelConfig build_model_config(const RunConfig::ModelSpec& spec);

} // namespace agelab
