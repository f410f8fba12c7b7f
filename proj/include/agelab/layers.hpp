#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "agelab/rng.hpp"
#include "agelab/tensor.hpp"

namespace agelab::nn {

enum class LayerKind { Conv2D, MaxPool2D, Dense, ReLU, Dropout, Flatten, Softmax };

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2D: return "conv2d";
        case LayerKind::MaxPool2D: return "maxpool2d";
        case LayerKind::Dense: return "dense";
        case LayerKind::ReLU: return "relu";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

inline bool layer_has_weights(LayerKind k) {
    return k == LayerKind::Conv2D || k == LayerKind::Dense;
}

// Kind-specific settings. Only the fields for the layer's kind are meaningful.
struct LayerConfig {
    LayerKind kind = LayerKind::ReLU;
    int out_channels = 0;  // Conv2D
    int kernel = 0;        // Conv2D: square kernel side
    int stride = 1;        // Conv2D
    int pad = 0;           // Conv2D
    int units = 0;         // Dense
    float rate = 0.0f;     // Dropout, in [0, 1)

    static LayerConfig conv2d(int out_channels, int kernel, int stride = 1, int pad = 0) {
        LayerConfig c;
        c.kind = LayerKind::Conv2D;
        c.out_channels = out_channels;
        c.kernel = kernel;
        c.stride = stride;
        c.pad = pad;
        return c;
    }
    static LayerConfig maxpool2d() { return {LayerKind::MaxPool2D}; }
    static LayerConfig dense(int units) {
        LayerConfig c;
        c.kind = LayerKind::Dense;
        c.units = units;
        return c;
    }
    static LayerConfig relu() { return {LayerKind::ReLU}; }
    static LayerConfig dropout(float rate) {
        LayerConfig c;
        c.kind = LayerKind::Dropout;
        c.rate = rate;
        return c;
    }
    static LayerConfig flatten() { return {LayerKind::Flatten}; }
    static LayerConfig softmax() { return {LayerKind::Softmax}; }
};

// One layer of a model: configuration plus (for Conv2D/Dense) parameters.
template <class T>
struct Layer {
    LayerConfig cfg;
    TensorT<T> weights;  // Conv2D: [oc, ic, k, k]; Dense: [units, in]
    TensorT<T> bias;     // Conv2D: [oc]; Dense: [units]
    bool frozen = false;
    bool initialized = false;
};

// ---- Conv2D ----------------------------------------------------------------

// Copies [C,H,W] into a zero-padded [C,H+2p,W+2p] buffer.
template <class T>
void pad_into(const TensorT<T>& in, int pad, TensorT<T>& out) {
    const int c = in.shape[0], h = in.shape[1], w = in.shape[2];
    const int ph = h + 2 * pad, pw = w + 2 * pad;
    if (out.shape != std::vector<int>{c, ph, pw}) out = TensorT<T>({c, ph, pw});
    out.fill(T(0));
    for (int ic = 0; ic < c; ++ic) {
        for (int y = 0; y < h; ++y) {
            const T* src = in.ptr() + (static_cast<std::size_t>(ic) * h + y) * w;
            T* dst = out.ptr() + (static_cast<std::size_t>(ic) * ph + y + pad) * pw + pad;
            std::copy(src, src + w, dst);
        }
    }
}

inline int conv_out_dim(int in, int pad, int kernel, int stride) {
    return (in + 2 * pad - kernel) / stride + 1;
}

// Cross-correlation of a [C,H,W] input with [OC,C,K,K] filters.
// padded_cache, when given, receives the zero-padded input for the backward pass.
template <class T>
TensorT<T> conv2d_forward(const TensorT<T>& in, const Layer<T>& layer, TensorT<T>* padded_cache = nullptr) {
    const LayerConfig& cfg = layer.cfg;
    if (in.shape.size() != 3) {
        throw ShapeError("Conv2D expects a [C,H,W] input, got " + shape_to_string(in.shape));
    }
    const int c = in.shape[0], h = in.shape[1], w = in.shape[2];
    const int oc = cfg.out_channels, k = cfg.kernel, s = cfg.stride, p = cfg.pad;
    if (layer.weights.shape != std::vector<int>{oc, c, k, k}) {
        throw ShapeError("Conv2D weight shape " + shape_to_string(layer.weights.shape) +
                         " does not match input channels " + std::to_string(c));
    }
    if (h + 2 * p < k || w + 2 * p < k) {
        throw ShapeError("Conv2D kernel " + std::to_string(k) + " does not fit padded input " +
                         shape_to_string(in.shape) + " with pad " + std::to_string(p));
    }
    const int oh = conv_out_dim(h, p, k, s);
    const int ow = conv_out_dim(w, p, k, s);

    TensorT<T> local_pad;
    TensorT<T>* padded = padded_cache ? padded_cache : &local_pad;
    const TensorT<T>* src = &in;
    if (p > 0) {
        pad_into(in, p, *padded);
        src = padded;
    } else if (padded_cache) {
        *padded_cache = in;
    }
    const int ph = h + 2 * p, pw = w + 2 * p;

    // Each output map accumulates in 64-bit and narrows once at the end.
    TensorT<T> out({oc, oh, ow});
    std::vector<double> acc(static_cast<std::size_t>(oh) * ow);
    for (int o = 0; o < oc; ++o) {
        std::fill(acc.begin(), acc.end(), double(layer.bias[static_cast<std::size_t>(o)]));
        for (int ic = 0; ic < c; ++ic) {
            const T* imap = src->ptr() + static_cast<std::size_t>(ic) * ph * pw;
            const T* wmat = layer.weights.ptr() + (static_cast<std::size_t>(o) * c + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = wmat[ky * k + kx];
                    for (int oy = 0; oy < oh; ++oy) {
                        const T* irow = imap + static_cast<std::size_t>(oy * s + ky) * pw + kx;
                        double* arow = acc.data() + static_cast<std::size_t>(oy) * ow;
                        if (s == 1) {
                            for (int ox = 0; ox < ow; ++ox) arow[ox] += wv * irow[ox];
                        } else {
                            for (int ox = 0; ox < ow; ++ox) arow[ox] += wv * irow[ox * s];
                        }
                    }
                }
            }
        }
        T* omap = out.ptr() + static_cast<std::size_t>(o) * oh * ow;
        for (std::size_t i = 0; i < acc.size(); ++i) omap[i] = static_cast<T>(acc[i]);
    }
    return out;
}

// Gradients of conv2d_forward. padded_in is the cached zero-padded input.
// grad_in receives d(loss)/d(input) with the original (unpadded) shape.
template <class T>
void conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& padded_in, const Layer<T>& layer,
                     const std::vector<int>& in_shape, TensorT<T>& grad_w, TensorT<T>& grad_b,
                     TensorT<T>& grad_in) {
    const LayerConfig& cfg = layer.cfg;
    const int c = in_shape[0], h = in_shape[1], w = in_shape[2];
    const int oc = cfg.out_channels, k = cfg.kernel, s = cfg.stride, p = cfg.pad;
    const int oh = grad_out.shape[1], ow = grad_out.shape[2];
    const int ph = h + 2 * p, pw = w + 2 * p;

    grad_w = TensorT<T>::zeros_like(layer.weights);
    grad_b = TensorT<T>::zeros_like(layer.bias);
    TensorT<T> grad_pad({c, ph, pw});

    for (int o = 0; o < oc; ++o) {
        const T* gmap = grad_out.ptr() + static_cast<std::size_t>(o) * oh * ow;
        double bsum = 0.0;
        for (int i = 0; i < oh * ow; ++i) bsum += static_cast<double>(gmap[i]);
        grad_b[static_cast<std::size_t>(o)] = static_cast<T>(bsum);
        for (int ic = 0; ic < c; ++ic) {
            const T* imap = padded_in.ptr() + static_cast<std::size_t>(ic) * ph * pw;
            T* gpmap = grad_pad.ptr() + static_cast<std::size_t>(ic) * ph * pw;
            const T* wmat = layer.weights.ptr() + (static_cast<std::size_t>(o) * c + ic) * k * k;
            T* gwmat = grad_w.ptr() + (static_cast<std::size_t>(o) * c + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const T wv = wmat[ky * k + kx];
                    T acc = T(0);
                    for (int oy = 0; oy < oh; ++oy) {
                        const T* irow = imap + static_cast<std::size_t>(oy * s + ky) * pw + kx;
                        T* gprow = gpmap + static_cast<std::size_t>(oy * s + ky) * pw + kx;
                        const T* grow = gmap + static_cast<std::size_t>(oy) * ow;
                        if (s == 1) {
                            for (int ox = 0; ox < ow; ++ox) {
                                acc += grow[ox] * irow[ox];
                                gprow[ox] += grow[ox] * wv;
                            }
                        } else {
                            for (int ox = 0; ox < ow; ++ox) {
                                acc += grow[ox] * irow[ox * s];
                                gprow[ox * s] += grow[ox] * wv;
                            }
                        }
                    }
                    gwmat[ky * k + kx] += acc;
                }
            }
        }
    }

    if (p == 0) {
        grad_in = std::move(grad_pad);
        grad_in.shape = in_shape;
    } else {
        grad_in = TensorT<T>({c, h, w});
        for (int ic = 0; ic < c; ++ic) {
            for (int y = 0; y < h; ++y) {
                const T* src = grad_pad.ptr() + (static_cast<std::size_t>(ic) * ph + y + p) * pw + p;
                T* dst = grad_in.ptr() + (static_cast<std::size_t>(ic) * h + y) * w;
                std::copy(src, src + w, dst);
            }
        }
    }
}

// ---- MaxPool 2x2, stride 2 -------------------------------------------------

// Pools each 2x2 window to its max. Input spatial dims must be even; the
// winning flat index per window is recorded for the backward pass.
template <class T>
TensorT<T> maxpool_forward(const TensorT<T>& in, std::vector<int>* argmax = nullptr) {
    if (in.shape.size() != 3) {
        throw ShapeError("MaxPool2D expects a [C,H,W] input, got " + shape_to_string(in.shape));
    }
    const int c = in.shape[0], h = in.shape[1], w = in.shape[2];
    if (h % 2 != 0 || w % 2 != 0) {
        throw ShapeError("MaxPool2D requires even spatial dims, got " + shape_to_string(in.shape));
    }
    const int oh = h / 2, ow = w / 2;
    TensorT<T> out({c, oh, ow});
    if (argmax) argmax->assign(out.numel(), 0);
    for (int ic = 0; ic < c; ++ic) {
        const T* imap = in.ptr() + static_cast<std::size_t>(ic) * h * w;
        T* omap = out.ptr() + static_cast<std::size_t>(ic) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const int y0 = oy * 2, x0 = ox * 2;
                int best = y0 * w + x0;
                T bv = imap[best];
                const int cand[3] = {y0 * w + x0 + 1, (y0 + 1) * w + x0, (y0 + 1) * w + x0 + 1};
                for (int idx : cand) {
                    if (imap[idx] > bv) {
                        bv = imap[idx];
                        best = idx;
                    }
                }
                omap[oy * ow + ox] = bv;
                if (argmax) {
                    (*argmax)[static_cast<std::size_t>(ic) * oh * ow + oy * ow + ox] =
                        ic * h * w + best;
                }
            }
        }
    }
    return out;
}

template <class T>
TensorT<T> maxpool_backward(const TensorT<T>& grad_out, const std::vector<int>& argmax,
                            const std::vector<int>& in_shape) {
    TensorT<T> grad_in(in_shape);
    for (std::size_t i = 0; i < grad_out.numel(); ++i) {
        grad_in[static_cast<std::size_t>(argmax[i])] += grad_out[i];
    }
    return grad_in;
}

// ---- Dense -----------------------------------------------------------------

template <class T>
TensorT<T> dense_forward(const TensorT<T>& in, const Layer<T>& layer) {
    if (in.shape.size() != 1) {
        throw ShapeError("Dense expects a flat [n] input, got " + shape_to_string(in.shape));
    }
    const int n = in.shape[0];
    const int m = layer.cfg.units;
    if (layer.weights.shape != std::vector<int>{m, n}) {
        throw ShapeError("Dense weight shape " + shape_to_string(layer.weights.shape) +
                         " does not match input length " + std::to_string(n));
    }
    TensorT<T> out({m});
    const T* x = in.ptr();
    for (int i = 0; i < m; ++i) {
        const T* wrow = layer.weights.ptr() + static_cast<std::size_t>(i) * n;
        T acc = layer.bias[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) acc += wrow[j] * x[j];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

template <class T>
void dense_backward(const TensorT<T>& grad_out, const TensorT<T>& in, const Layer<T>& layer,
                    TensorT<T>& grad_w, TensorT<T>& grad_b, TensorT<T>& grad_in) {
    const int m = layer.cfg.units;
    const int n = in.shape[0];
    grad_w = TensorT<T>::zeros_like(layer.weights);
    grad_b = grad_out;
    grad_in = TensorT<T>({n});
    const T* x = in.ptr();
    for (int i = 0; i < m; ++i) {
        const T g = grad_out[static_cast<std::size_t>(i)];
        const T* wrow = layer.weights.ptr() + static_cast<std::size_t>(i) * n;
        T* gwrow = grad_w.ptr() + static_cast<std::size_t>(i) * n;
        T* gin = grad_in.ptr();
        for (int j = 0; j < n; ++j) {
            gwrow[j] = g * x[j];
            gin[j] += g * wrow[j];
        }
    }
}

// ---- ReLU ------------------------------------------------------------------

template <class T>
TensorT<T> relu_forward(const TensorT<T>& in, TensorT<T>* mask = nullptr) {
    TensorT<T> out = in;
    if (mask) *mask = TensorT<T>(in.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        if (out[i] > T(0)) {
            if (mask) (*mask)[i] = T(1);
        } else {
            out[i] = T(0);
        }
    }
    return out;
}

template <class T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& mask) {
    TensorT<T> grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.numel(); ++i) grad_in[i] *= mask[i];
    return grad_in;
}

// ---- Dropout ---------------------------------------------------------------

// Inverted dropout: during training each unit is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); inference is the identity.
// mask_cache receives the scaled mask so backward replays the same drop.
template <class T>
TensorT<T> dropout_forward(const TensorT<T>& in, T rate, bool training, Rng* rng,
                           TensorT<T>* mask_cache = nullptr) {
    if (!(rate >= T(0) && rate < T(1))) {
        throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(static_cast<double>(rate)));
    }
    if (!training || rate == T(0)) {
        if (mask_cache) *mask_cache = TensorT<T>();
        return in;
    }
    if (!rng) throw StateError("dropout in training mode needs a random source");
    TensorT<T> out = in;
    TensorT<T> mask(in.shape);
    const T scale = T(1) / (T(1) - rate);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        if (static_cast<T>(rng->uniform01()) < rate) {
            out[i] = T(0);
        } else {
            mask[i] = scale;
            out[i] *= scale;
        }
    }
    if (mask_cache) *mask_cache = std::move(mask);
    return out;
}

template <class T>
TensorT<T> dropout_backward(const TensorT<T>& grad_out, const TensorT<T>& mask) {
    if (mask.empty()) return grad_out;  // identity pass (eval or rate 0)
    TensorT<T> grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.numel(); ++i) grad_in[i] *= mask[i];
    return grad_in;
}

// ---- Flatten ---------------------------------------------------------------

template <class T>
TensorT<T> flatten_forward(const TensorT<T>& in) {
    TensorT<T> out = in;
    out.shape = {static_cast<int>(in.numel())};
    return out;
}

// ---- Softmax ---------------------------------------------------------------

// Numerically stable softmax over a flat vector (max subtraction; the
// normalizer is accumulated in double).
template <class T>
TensorT<T> softmax_forward(const TensorT<T>& in) {
    if (in.shape.size() != 1) {
        throw ShapeError("Softmax expects a flat [n] input, got " + shape_to_string(in.shape));
    }
    TensorT<T> out(in.shape);
    T mx = in[0];
    for (std::size_t i = 1; i < in.numel(); ++i) mx = std::max(mx, in[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < in.numel(); ++i) {
        const T e = std::exp(in[i] - mx);
        out[i] = e;
        sum += static_cast<double>(e);
    }
    const T inv = static_cast<T>(1.0 / sum);
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= inv;
    return out;
}

// d(loss)/d(logits) from d(loss)/d(probs) and the cached output probs.
template <class T>
TensorT<T> softmax_backward(const TensorT<T>& grad_out, const TensorT<T>& probs) {
    double dot = 0.0;
    for (std::size_t i = 0; i < probs.numel(); ++i) {
        dot += static_cast<double>(grad_out[i]) * static_cast<double>(probs[i]);
    }
    TensorT<T> grad_in(probs.shape);
    for (std::size_t i = 0; i < probs.numel(); ++i) {
        grad_in[i] = probs[i] * (grad_out[i] - static_cast<T>(dot));
    }
    return grad_in;
}

} // namespace agelab::nn
