#include <cmath>

#include "agelab/loss.hpp"
#include "doctest.h"

using agelab::ShapeError;
using agelab::nn::LossKind;
using agelab::nn::Tensor;

TEST_CASE("MAE is zero when prediction equals target") {
    Tensor p({3}), t({3});
    p.data = {1, 2, 3};
    t.data = {1, 2, 3};
    CHECK(agelab::nn::loss_value(p, t, LossKind::MeanAbsoluteError) == 0.0);
}

TEST_CASE("MAE hand example: [30,40] vs [32,38] is 2") {
    Tensor p({2}), t({2});
    p.data = {30, 40};
    t.data = {32, 38};
    CHECK(agelab::nn::loss_value(p, t, LossKind::MeanAbsoluteError) == doctest::Approx(2.0));
}

TEST_CASE("MAE is strictly positive when any entry differs") {
    Tensor p({2}), t({2});
    p.data = {1, 1};
    t.data = {1, 1.5f};
    CHECK(agelab::nn::loss_value(p, t, LossKind::MeanAbsoluteError) > 0.0);
}

TEST_CASE("BCE of a fifty-fifty prediction on a one-hot target is ln 2") {
    Tensor p({2}), t({2});
    p.data = {0.5f, 0.5f};
    t.data = {1, 0};
    CHECK(agelab::nn::loss_value(p, t, LossKind::BinaryCrossEntropy) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("BCE clamps extreme predictions instead of producing infinity") {
    Tensor p({2}), t({2});
    p.data = {0.0f, 1.0f};
    t.data = {1, 0};
    const double v = agelab::nn::loss_value(p, t, LossKind::BinaryCrossEntropy);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
}

TEST_CASE("BCE is non-negative on one-hot targets") {
    Tensor p({2}), t({2});
    p.data = {0.9f, 0.1f};
    t.data = {1, 0};
    CHECK(agelab::nn::loss_value(p, t, LossKind::BinaryCrossEntropy) > 0.0);
}

TEST_CASE("cross entropy of a perfect one-hot prediction is near zero") {
    Tensor p({3}), t({3});
    p.data = {0, 1, 0};
    t.data = {0, 1, 0};
    CHECK(agelab::nn::loss_value(p, t, LossKind::CategoricalCrossEntropy) ==
          doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("losses reject length mismatches") {
    Tensor p({2}), t({3});
    CHECK_THROWS_AS(agelab::nn::loss_value(p, t, LossKind::MeanAbsoluteError), ShapeError);
    CHECK_THROWS_AS(agelab::nn::loss_grad(p, t, LossKind::BinaryCrossEntropy), ShapeError);
}

TEST_CASE("MAE gradient is the scaled sign of the difference") {
    Tensor p({2}), t({2});
    p.data = {3, 1};
    t.data = {1, 3};
    Tensor g = agelab::nn::loss_grad(p, t, LossKind::MeanAbsoluteError);
    CHECK(g[0] == doctest::Approx(0.5));
    CHECK(g[1] == doctest::Approx(-0.5));
}

TEST_CASE("loss gradients match central differences") {
    using agelab::nn::TensorT;
    TensorT<double> p({4}), t({4});
    p.data = {0.2, 0.3, 0.4, 0.1};
    t.data = {0.0, 1.0, 0.0, 0.0};
    for (LossKind kind : {LossKind::MeanAbsoluteError, LossKind::BinaryCrossEntropy,
                          LossKind::CategoricalCrossEntropy}) {
        TensorT<double> g = agelab::nn::loss_grad(p, t, kind);
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double h = 1e-6;
            TensorT<double> up = p, down = p;
            up[i] += h;
            down[i] -= h;
            const double fd = (agelab::nn::loss_value(up, t, kind) -
                               agelab::nn::loss_value(down, t, kind)) /
                              (2 * h);
            CHECK(g[i] == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}
