#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "agelab/error.hpp"
#include "agelab/model.hpp"

namespace agelab::nn {

// One conv stack: `convs` 3x3 same-padding convolutions with `filters` output
// channels, each followed by ReLU, then a single 2x2 max-pool.
struct Stack {
    int filters = 0;
    int convs = 1;
};

// Assembles a VGG-flavoured backbone config ending in Flatten. The config is
// shape-checked immediately so depth mistakes (spatial dims shrinking below 1,
// or odd dims hitting a pool) surface here rather than at first use.
inline ModelConfig build_backbone(const std::vector<int>& input_shape, const std::vector<Stack>& stacks) {
    if (stacks.empty()) throw ConfigError("backbone needs at least one stack");
    ModelConfig cfg;
    cfg.input_shape = input_shape;
    for (const Stack& s : stacks) {
        if (s.filters <= 0) throw ConfigError("stack filter count must be positive");
        if (s.convs <= 0) throw ConfigError("stack conv count must be positive");
        for (int i = 0; i < s.convs; ++i) {
            cfg.layers.push_back(LayerConfig::conv2d(s.filters, 3, 1, 1));
            cfg.layers.push_back(LayerConfig::relu());
        }
        cfg.layers.push_back(LayerConfig::maxpool2d());
    }
    cfg.layers.push_back(LayerConfig::flatten());
    try {
        Model<float>::build(cfg);
    } catch (const ShapeError& e) {
        throw SizingError(std::string("backbone does not fit the input (each stack halves "
                                      "spatial dims, which must stay even and >= 2): ") +
                          e.what());
    }
    return cfg;
}

// Index one past the last Flatten layer: the boundary between backbone and top.
inline std::size_t backbone_cut(const ModelConfig& cfg) {
    for (std::size_t li = cfg.layers.size(); li-- > 0;) {
        if (cfg.layers[li].kind == LayerKind::Flatten) return li + 1;
    }
    throw ConfigError("model has no Flatten layer to cut at");
}

// Config-level top replacement: drop everything after the last Flatten, then
// append Dense+ReLU+Dropout per requested size and a Dense+Softmax head.
inline ModelConfig replace_top_config(const ModelConfig& base, const std::vector<int>& dense_sizes,
                                      float dropout_rate, Head head) {
    if (dense_sizes.empty()) throw ConfigError("replace_top needs at least one dense size");
    if (!(dropout_rate >= 0.0f && dropout_rate < 1.0f)) {
        throw ConfigError("dropout rate must be in [0,1)");
    }
    if (head == Head::None) throw ConfigError("replace_top needs a gender or age head");
    const std::size_t cut = backbone_cut(base);

    ModelConfig cfg;
    cfg.input_shape = base.input_shape;
    cfg.layers.assign(base.layers.begin(), base.layers.begin() + static_cast<std::ptrdiff_t>(cut));
    for (int size : dense_sizes) {
        if (size <= 0) throw ConfigError("dense size must be positive");
        cfg.layers.push_back(LayerConfig::dense(size));
        cfg.layers.push_back(LayerConfig::relu());
        cfg.layers.push_back(LayerConfig::dropout(dropout_rate));
    }
    cfg.layers.push_back(LayerConfig::dense(head_output_size(head)));
    cfg.layers.push_back(LayerConfig::softmax());
    cfg.head = head;
    return cfg;
}

// Model-level surgery: the retained backbone keeps its trained weights and
// freeze flags; the fresh top comes back uninitialized and unfrozen, ready for
// init_random (which skips the transplanted layers).
template <class T>
Model<T> replace_top(const Model<T>& base, const std::vector<int>& dense_sizes, float dropout_rate,
                     Head head) {
    ModelConfig cfg = replace_top_config(base.config(), dense_sizes, dropout_rate, head);
    Model<T> out = Model<T>::build(cfg);
    const std::size_t keep = backbone_cut(base.config());
    for (std::size_t li = 0; li < keep; ++li) {
        const Layer<T>& src = base.layers()[li];
        Layer<T>& dst = out.layers()[li];
        dst.weights = src.weights;
        dst.bias = src.bias;
        dst.frozen = src.frozen;
        dst.initialized = src.initialized;
    }
    return out;
}

// Applies a freeze mask over weight-bearing layers, in layer order.
template <class T>
void set_freeze(Model<T>& model, const std::vector<bool>& mask) {
    const std::vector<std::size_t> idx = model.weight_layer_indices();
    if (mask.size() != idx.size()) {
        throw ConfigError("freeze mask length " + std::to_string(mask.size()) +
                          " does not match weight layer count " + std::to_string(idx.size()));
    }
    for (std::size_t i = 0; i < idx.size(); ++i) model.layers()[idx[i]].frozen = mask[i];
}

// Freezes every weight layer up to and including the last Flatten (the
// backbone) and leaves the rest free.
template <class T>
void freeze_backbone(Model<T>& model) {
    std::size_t cut = 0;
    const auto& layers = model.layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        if (layers[li].cfg.kind == LayerKind::Flatten) cut = li;
    }
    for (std::size_t li = 0; li < layers.size(); ++li) {
        if (layer_has_weights(layers[li].cfg.kind)) model.layers()[li].frozen = li < cut;
    }
}

} // namespace agelab::nn
