#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "agelab/model.hpp"
#include "agelab/tensor.hpp"

namespace agelab::nn {

// One Adadelta update on a single parameter tensor. The squared-gradient
// accumulator is refreshed before the step size is computed, so the current
// gradient already shapes its own denominator.
template <class T>
void adadelta_step(TensorT<T>& param, const TensorT<T>& grad, TensorT<T>& accum_g2,
                   TensorT<T>& accum_dx2, T rho, T eps) {
    if (!param.same_shape(grad) || !param.same_shape(accum_g2) || !param.same_shape(accum_dx2)) {
        throw ShapeError("adadelta tensors disagree: param " + shape_to_string(param.shape) +
                         ", grad " + shape_to_string(grad.shape));
    }
    for (std::size_t i = 0; i < param.numel(); ++i) {
        const T g = grad[i];
        accum_g2[i] = rho * accum_g2[i] + (T(1) - rho) * g * g;
        const T dx = -std::sqrt(accum_dx2[i] + eps) / std::sqrt(accum_g2[i] + eps) * g;
        accum_dx2[i] = rho * accum_dx2[i] + (T(1) - rho) * dx * dx;
        param[i] += dx;
    }
}

// Adadelta state for a whole model: one pair of accumulators per weight layer,
// all starting at zero. Frozen layers are skipped entirely, which leaves their
// accumulators untouched for a later unfreeze.
template <class T>
class Adadelta {
public:
    explicit Adadelta(const Model<T>& model, T rho = T(0.95), T eps = T(1e-6))
        : rho_(rho), eps_(eps) {
        const auto& layers = model.layers();
        g2_w_.resize(layers.size());
        g2_b_.resize(layers.size());
        dx2_w_.resize(layers.size());
        dx2_b_.resize(layers.size());
        for (std::size_t li = 0; li < layers.size(); ++li) {
            if (!layer_has_weights(layers[li].cfg.kind)) continue;
            g2_w_[li] = TensorT<T>::zeros_like(layers[li].weights);
            g2_b_[li] = TensorT<T>::zeros_like(layers[li].bias);
            dx2_w_[li] = TensorT<T>::zeros_like(layers[li].weights);
            dx2_b_[li] = TensorT<T>::zeros_like(layers[li].bias);
        }
    }

    void step(Model<T>& model, const std::vector<LayerGrads<T>>& grads) {
        auto& layers = model.layers();
        for (std::size_t li = 0; li < layers.size(); ++li) {
            Layer<T>& l = layers[li];
            if (!layer_has_weights(l.cfg.kind) || l.frozen) continue;
            adadelta_step(l.weights, grads[li].w, g2_w_[li], dx2_w_[li], rho_, eps_);
            adadelta_step(l.bias, grads[li].b, g2_b_[li], dx2_b_[li], rho_, eps_);
        }
    }

    T rho() const { return rho_; }
    T eps() const { return eps_; }
    const TensorT<T>& accum_g2_w(std::size_t li) const { return g2_w_[li]; }
    const TensorT<T>& accum_dx2_w(std::size_t li) const { return dx2_w_[li]; }

private:
    T rho_, eps_;
    std::vector<TensorT<T>> g2_w_, g2_b_, dx2_w_, dx2_b_;
};

} // namespace agelab::nn
