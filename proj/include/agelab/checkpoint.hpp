#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "agelab/model.hpp"

namespace agelab {

// Provenance carried alongside the weights so a run directory stays
// self-describing: the seed that produced the model and a one-line note.
struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::string provenance;
};

struct LoadedCheckpoint {
    nn::Model<float> model;
    CheckpointMeta meta;
};

// File layout: a human-readable text manifest (architecture, freeze flags,
// per-blob byte offsets), a "---BLOBS---" separator line, then every weight
// and bias tensor as little-endian 32-bit floats concatenated in layer order.
void save_checkpoint(const nn::Model<float>& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Loads and additionally validates the stored architecture against a declared
// config, shape by shape; mismatches name the offending layer.
LoadedCheckpoint load_checkpoint_into(const std::filesystem::path& path,
                                      const nn::ModelConfig& declared);

} // namespace agelab
