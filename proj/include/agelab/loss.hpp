#pragma once

#include <cmath>
#include <string>

#include "agelab/tensor.hpp"

namespace agelab::nn {

// BinaryCrossEntropy expects probability-vector predictions; predictions are
// clamped to [kBceEps, 1-kBceEps] before the logs. CategoricalCrossEntropy is
// -sum(t*log(p)) against a target distribution; on one-hot two-class targets
// it coincides with the averaged binary form.
enum class LossKind { BinaryCrossEntropy, MeanAbsoluteError, CategoricalCrossEntropy };

inline constexpr double kBceEps = 1e-7;

inline const char* loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::BinaryCrossEntropy: return "bce";
        case LossKind::MeanAbsoluteError: return "mae";
        case LossKind::CategoricalCrossEntropy: return "cce";
    }
    return "?";
}

template <class T>
void check_loss_shapes(const TensorT<T>& pred, const TensorT<T>& target) {
    if (pred.numel() != target.numel()) {
        throw ShapeError("loss operands differ in length: " + shape_to_string(pred.shape) +
                         " vs " + shape_to_string(target.shape));
    }
}

// Scalar loss; sums are accumulated in double regardless of T.
template <class T>
double loss_value(const TensorT<T>& pred, const TensorT<T>& target, LossKind kind) {
    check_loss_shapes(pred, target);
    const std::size_t n = pred.numel();
    double acc = 0.0;
    switch (kind) {
        case LossKind::MeanAbsoluteError:
            for (std::size_t i = 0; i < n; ++i) {
                acc += std::abs(static_cast<double>(pred[i]) - static_cast<double>(target[i]));
            }
            return acc / static_cast<double>(n);
        case LossKind::BinaryCrossEntropy:
            for (std::size_t i = 0; i < n; ++i) {
                const double p = std::clamp(static_cast<double>(pred[i]), kBceEps, 1.0 - kBceEps);
                const double t = static_cast<double>(target[i]);
                acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
            }
            return acc / static_cast<double>(n);
        case LossKind::CategoricalCrossEntropy:
            for (std::size_t i = 0; i < n; ++i) {
                const double p = std::clamp(static_cast<double>(pred[i]), kBceEps, 1.0 - kBceEps);
                acc -= static_cast<double>(target[i]) * std::log(p);
            }
            return acc;
    }
    return acc;
}

// d(loss)/d(pred).
template <class T>
TensorT<T> loss_grad(const TensorT<T>& pred, const TensorT<T>& target, LossKind kind) {
    check_loss_shapes(pred, target);
    const std::size_t n = pred.numel();
    TensorT<T> g(pred.shape);
    switch (kind) {
        case LossKind::MeanAbsoluteError: {
            const T inv = T(1) / static_cast<T>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const T d = pred[i] - target[i];
                g[i] = d > T(0) ? inv : (d < T(0) ? -inv : T(0));
            }
            break;
        }
        case LossKind::BinaryCrossEntropy: {
            const T inv = T(1) / static_cast<T>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const T p = std::clamp(pred[i], static_cast<T>(kBceEps), T(1) - static_cast<T>(kBceEps));
                const T t = target[i];
                g[i] = inv * (-t / p + (T(1) - t) / (T(1) - p));
            }
            break;
        }
        case LossKind::CategoricalCrossEntropy: {
            for (std::size_t i = 0; i < n; ++i) {
                const T p = std::clamp(pred[i], static_cast<T>(kBceEps), T(1) - static_cast<T>(kBceEps));
                g[i] = -target[i] / p;
            }
            break;
        }
    }
    return g;
}

} // namespace agelab::nn
