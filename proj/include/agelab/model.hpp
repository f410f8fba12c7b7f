#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "agelab/layers.hpp"
#include "agelab/loss.hpp"
#include "agelab/rng.hpp"
#include "agelab/tensor.hpp"

namespace agelab::nn {

// Prediction head of a model: a 2-way gender classifier or an 81-way age
// distribution (ages 5..85).
enum class Head { None, Gender, Age };

inline const char* head_name(Head h) {
    switch (h) {
        case Head::None: return "none";
        case Head::Gender: return "gender";
        case Head::Age: return "age";
    }
    return "?";
}

inline int head_output_size(Head h) {
    switch (h) {
        case Head::Gender: return 2;
        case Head::Age: return 81;
        default: return 0;
    }
}

// Architecture description: input shape ([C,H,W] or flat [n]), ordered layer
// configs, and the declared head. Weights live in the built Model.
struct ModelConfig {
    std::vector<int> input_shape;
    std::vector<LayerConfig> layers;
    Head head = Head::None;
};

enum class RunMode { Training, Inference };

template <class T>
struct LayerGrads {
    TensorT<T> w, b;
};

// Per-forward caches and per-backward gradients for one sample. Keeping them
// outside the model lets several samples run through shared read-only weights.
template <class T>
struct Workspace {
    std::vector<TensorT<T>> inputs;            // per layer: cached (padded) input
    std::vector<std::vector<int>> argmax;      // MaxPool2D winners
    std::vector<TensorT<T>> masks;             // ReLU / Dropout masks
    std::vector<TensorT<T>> outputs;           // Softmax outputs
    std::vector<LayerGrads<T>> grads;          // per layer, filled by backward
    bool has_forward = false;

    void resize(std::size_t n) {
        inputs.resize(n);
        argmax.resize(n);
        masks.resize(n);
        outputs.resize(n);
        grads.resize(n);
    }
};

// A sequential model: layers with weights, a freeze flag per weight layer,
// and precomputed per-layer shapes. Built once from a ModelConfig; weights
// change only through init_random, checkpoint loading, or an optimizer step.
template <class T>
class Model {
public:
    static Model build(const ModelConfig& cfg) {
        Model m;
        m.cfg_ = cfg;
        if (cfg.input_shape.empty()) throw ShapeError("model input shape is empty");
        std::vector<int> shape = cfg.input_shape;
        for (std::size_t li = 0; li < cfg.layers.size(); ++li) {
            const LayerConfig& lc = cfg.layers[li];
            Layer<T> layer;
            layer.cfg = lc;
            try {
                shape = infer_output_shape(shape, lc, &layer);
            } catch (const ShapeError& e) {
                throw ShapeError(layer_label(li, lc.kind) + ": " + e.what());
            }
            m.layers_.push_back(std::move(layer));
            m.out_shapes_.push_back(shape);
        }
        if (cfg.head != Head::None) {
            const int want = head_output_size(cfg.head);
            if (m.out_shapes_.empty() || m.out_shapes_.back() != std::vector<int>{want}) {
                throw ShapeError(std::string("model output shape ") +
                                 (m.out_shapes_.empty() ? shape_to_string(cfg.input_shape)
                                                        : shape_to_string(m.out_shapes_.back())) +
                                 " does not match " + head_name(cfg.head) + " head size " +
                                 std::to_string(want));
            }
        }
        return m;
    }

    const ModelConfig& config() const { return cfg_; }
    std::vector<Layer<T>>& layers() { return layers_; }
    const std::vector<Layer<T>>& layers() const { return layers_; }
    const std::vector<int>& output_shape() const { return out_shapes_.back(); }

    const std::vector<int>& input_shape_of(std::size_t li) const {
        return li == 0 ? cfg_.input_shape : out_shapes_[li - 1];
    }

    static std::string layer_label(std::size_t index, LayerKind kind) {
        return "layer " + std::to_string(index) + " (" + layer_kind_name(kind) + ")";
    }

    // Fan-based uniform init (bound sqrt(6/(fan_in+fan_out))), zero biases.
    // Touches only layers not yet marked initialized, so a transplanted
    // backbone keeps its weights while a fresh top gets random ones.
    void init_random(std::uint64_t seed) {
        Rng rng(seed);
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            Layer<T>& l = layers_[li];
            if (!layer_has_weights(l.cfg.kind) || l.initialized) continue;
            int fan_in = 0, fan_out = 0;
            if (l.cfg.kind == LayerKind::Conv2D) {
                const int c = l.weights.shape[1], k = l.cfg.kernel;
                fan_in = c * k * k;
                fan_out = l.cfg.out_channels * k * k;
            } else {
                fan_in = l.weights.shape[1];
                fan_out = l.weights.shape[0];
            }
            const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
            for (std::size_t i = 0; i < l.weights.numel(); ++i) {
                l.weights[i] = static_cast<T>(rng.uniform(-bound, bound));
            }
            l.bias.fill(T(0));
            l.initialized = true;
        }
    }

    // Runs the sample through every layer. Caches live in ws; in training
    // mode dropout draws from rng.
    TensorT<T> forward(const TensorT<T>& x, Workspace<T>& ws, RunMode mode, Rng* rng = nullptr) const {
        if (x.shape != cfg_.input_shape) {
            throw ShapeError("model input shape " + shape_to_string(x.shape) + " does not match " +
                             shape_to_string(cfg_.input_shape));
        }
        ws.resize(layers_.size());
        TensorT<T> cur = x;
        const bool training = mode == RunMode::Training;
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const Layer<T>& l = layers_[li];
            try {
                switch (l.cfg.kind) {
                    case LayerKind::Conv2D:
                        cur = conv2d_forward(cur, l, &ws.inputs[li]);
                        break;
                    case LayerKind::MaxPool2D:
                        ws.inputs[li].shape = cur.shape;  // shape only, data unused
                        cur = maxpool_forward(cur, &ws.argmax[li]);
                        break;
                    case LayerKind::Dense:
                        ws.inputs[li] = cur;
                        cur = dense_forward(cur, l);
                        break;
                    case LayerKind::ReLU:
                        cur = relu_forward(cur, &ws.masks[li]);
                        break;
                    case LayerKind::Dropout:
                        cur = dropout_forward(cur, static_cast<T>(l.cfg.rate), training, rng, &ws.masks[li]);
                        break;
                    case LayerKind::Flatten:
                        ws.inputs[li].shape = cur.shape;
                        cur = flatten_forward(cur);
                        break;
                    case LayerKind::Softmax:
                        cur = softmax_forward(cur);
                        ws.outputs[li] = cur;
                        break;
                }
            } catch (const ShapeError& e) {
                throw ShapeError(layer_label(li, l.cfg.kind) + ": " + e.what());
            }
        }
        ws.has_forward = true;
        return cur;
    }

    // Reverse pass from d(loss)/d(model output). Parameter gradients land in
    // ws.grads; frozen layers receive exactly-zero gradient tensors.
    void backward(const TensorT<T>& grad_output, Workspace<T>& ws) const {
        if (!ws.has_forward) {
            throw StateError("backward called before any forward pass");
        }
        TensorT<T> g = grad_output;
        for (std::size_t ri = layers_.size(); ri-- > 0;) {
            const Layer<T>& l = layers_[ri];
            switch (l.cfg.kind) {
                case LayerKind::Conv2D: {
                    TensorT<T> gw, gb, gin;
                    conv2d_backward(g, ws.inputs[ri], l, input_shape_of(ri), gw, gb, gin);
                    store_param_grads(ri, std::move(gw), std::move(gb), ws);
                    g = std::move(gin);
                    break;
                }
                case LayerKind::MaxPool2D:
                    g = maxpool_backward(g, ws.argmax[ri], ws.inputs[ri].shape);
                    break;
                case LayerKind::Dense: {
                    TensorT<T> gw, gb, gin;
                    dense_backward(g, ws.inputs[ri], l, gw, gb, gin);
                    store_param_grads(ri, std::move(gw), std::move(gb), ws);
                    g = std::move(gin);
                    break;
                }
                case LayerKind::ReLU:
                    g = relu_backward(g, ws.masks[ri]);
                    break;
                case LayerKind::Dropout:
                    g = dropout_backward(g, ws.masks[ri]);
                    break;
                case LayerKind::Flatten:
                    g.shape = ws.inputs[ri].shape;
                    break;
                case LayerKind::Softmax:
                    g = softmax_backward(g, ws.outputs[ri]);
                    break;
            }
        }
    }

    // Indices of weight-bearing layers, in order (the freeze mask domain).
    std::vector<std::size_t> weight_layer_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            if (layer_has_weights(layers_[li].cfg.kind)) idx.push_back(li);
        }
        return idx;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const Layer<T>& l : layers_) n += l.weights.numel() + l.bias.numel();
        return n;
    }

private:
    static std::vector<int> infer_output_shape(const std::vector<int>& in, const LayerConfig& lc,
                                               Layer<T>* layer) {
        switch (lc.kind) {
            case LayerKind::Conv2D: {
                if (in.size() != 3) throw ShapeError("expects a [C,H,W] input, got " + shape_to_string(in));
                if (lc.out_channels <= 0 || lc.kernel <= 0 || lc.stride <= 0 || lc.pad < 0) {
                    throw ShapeError("invalid Conv2D settings");
                }
                const int c = in[0], h = in[1], w = in[2];
                if (h + 2 * lc.pad < lc.kernel || w + 2 * lc.pad < lc.kernel) {
                    throw ShapeError("kernel " + std::to_string(lc.kernel) + " does not fit input " +
                                     shape_to_string(in) + " with pad " + std::to_string(lc.pad));
                }
                const int oh = conv_out_dim(h, lc.pad, lc.kernel, lc.stride);
                const int ow = conv_out_dim(w, lc.pad, lc.kernel, lc.stride);
                if (oh < 1 || ow < 1) throw ShapeError("output spatial dims collapse below 1");
                if (layer) {
                    layer->weights = TensorT<T>({lc.out_channels, c, lc.kernel, lc.kernel});
                    layer->bias = TensorT<T>({lc.out_channels});
                }
                return {lc.out_channels, oh, ow};
            }
            case LayerKind::MaxPool2D: {
                if (in.size() != 3) throw ShapeError("expects a [C,H,W] input, got " + shape_to_string(in));
                if (in[1] % 2 != 0 || in[2] % 2 != 0) {
                    throw ShapeError("requires even spatial dims, got " + shape_to_string(in));
                }
                if (in[1] / 2 < 1 || in[2] / 2 < 1) throw ShapeError("output spatial dims collapse below 1");
                return {in[0], in[1] / 2, in[2] / 2};
            }
            case LayerKind::Dense: {
                if (in.size() != 1) throw ShapeError("expects a flat [n] input, got " + shape_to_string(in));
                if (lc.units <= 0) throw ShapeError("invalid unit count");
                if (layer) {
                    layer->weights = TensorT<T>({lc.units, in[0]});
                    layer->bias = TensorT<T>({lc.units});
                }
                return {lc.units};
            }
            case LayerKind::Dropout:
                if (!(lc.rate >= 0.0f && lc.rate < 1.0f)) {
                    throw ShapeError("dropout rate must be in [0,1)");
                }
                return in;
            case LayerKind::ReLU:
                return in;
            case LayerKind::Flatten: {
                int n = 1;
                for (int d : in) n *= d;
                return {n};
            }
            case LayerKind::Softmax:
                if (in.size() != 1) throw ShapeError("expects a flat [n] input, got " + shape_to_string(in));
                return in;
        }
        throw ShapeError("unknown layer kind");
    }

    void store_param_grads(std::size_t li, TensorT<T>&& gw, TensorT<T>&& gb, Workspace<T>& ws) const {
        if (layers_[li].frozen) {
            ws.grads[li].w = TensorT<T>::zeros_like(layers_[li].weights);
            ws.grads[li].b = TensorT<T>::zeros_like(layers_[li].bias);
        } else {
            ws.grads[li].w = std::move(gw);
            ws.grads[li].b = std::move(gb);
        }
    }

    ModelConfig cfg_;
    std::vector<Layer<T>> layers_;
    std::vector<std::vector<int>> out_shapes_;
};

} // namespace agelab::nn
