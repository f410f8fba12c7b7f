#include <cmath>
#include <cstddef>
#include <vector>

#include "agelab/layers.hpp"
#include "agelab/rng.hpp"
#include "doctest.h"
#include "test_support.hpp"

using agelab::Rng;
using agelab::ShapeError;
using agelab::nn::Layer;
using agelab::nn::LayerConfig;
using agelab::nn::Tensor;

namespace {

Layer<float> make_conv(int out_channels, int in_channels, int kernel, int stride, int pad) {
    Layer<float> l;
    l.cfg = LayerConfig::conv2d(out_channels, kernel, stride, pad);
    l.weights = Tensor({out_channels, in_channels, kernel, kernel});
    l.bias = Tensor({out_channels});
    return l;
}

Layer<float> make_dense(int units, int inputs) {
    Layer<float> l;
    l.cfg = LayerConfig::dense(units);
    l.weights = Tensor({units, inputs});
    l.bias = Tensor({units});
    return l;
}

Tensor random_tensor(const std::vector<int>& shape, Rng& rng, float lo = -1.0f, float hi = 1.0f) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

} // namespace

TEST_CASE("conv2d with a 1x1 identity kernel passes the input through") {
    Layer<float> l = make_conv(1, 1, 1, 1, 0);
    l.weights[0] = 1.0f;
    Rng rng(3);
    Tensor in = random_tensor({1, 5, 7}, rng);
    Tensor out = agelab::nn::conv2d_forward(in, l);
    REQUIRE(out.shape == in.shape);
    for (std::size_t i = 0; i < in.numel(); ++i) CHECK(out[i] == doctest::Approx(in[i]));
}

TEST_CASE("conv2d 3x3 all-ones kernel on a constant image gives 9c in the interior") {
    Layer<float> l = make_conv(1, 1, 3, 1, 0);
    l.weights.fill(1.0f);
    const float c = 2.5f;
    Tensor in({1, 6, 6});
    in.fill(c);
    Tensor out = agelab::nn::conv2d_forward(in, l);
    REQUIRE(out.shape == std::vector<int>{1, 4, 4});
    for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out[i] == doctest::Approx(9.0f * c));
}

TEST_CASE("conv2d matches the brute-force oracle on a random padded case") {
    Rng rng(17);
    Layer<float> l = make_conv(2, 1, 3, 1, 1);
    for (std::size_t i = 0; i < l.weights.numel(); ++i) l.weights[i] = rng.uniform(-1.0f, 1.0f);
    for (std::size_t i = 0; i < l.bias.numel(); ++i) l.bias[i] = rng.uniform(-1.0f, 1.0f);
    Tensor in = random_tensor({1, 8, 8}, rng);
    Tensor got = agelab::nn::conv2d_forward(in, l);
    Tensor want = testsupport::conv_oracle(in, l.weights, l.bias, 1, 1);
    REQUIRE(got.shape == want.shape);
    for (std::size_t i = 0; i < got.numel(); ++i) {
        CHECK(testsupport::rel_err(got[i], want[i]) <= 1e-6);
    }
}

TEST_CASE("conv2d matches the oracle under stride 2 and multiple channels") {
    Rng rng(29);
    Layer<float> l = make_conv(3, 2, 3, 2, 1);
    for (std::size_t i = 0; i < l.weights.numel(); ++i) l.weights[i] = rng.uniform(-1.0f, 1.0f);
    for (std::size_t i = 0; i < l.bias.numel(); ++i) l.bias[i] = rng.uniform(-1.0f, 1.0f);
    Tensor in = random_tensor({2, 9, 7}, rng);
    Tensor got = agelab::nn::conv2d_forward(in, l);
    Tensor want = testsupport::conv_oracle(in, l.weights, l.bias, 2, 1);
    REQUIRE(got.shape == want.shape);
    for (std::size_t i = 0; i < got.numel(); ++i) {
        CHECK(testsupport::rel_err(got[i], want[i]) <= 1e-6);
    }
}

TEST_CASE("conv2d rejects a kernel larger than the padded input") {
    Layer<float> l = make_conv(1, 1, 5, 1, 0);
    Tensor in({1, 3, 3});
    CHECK_THROWS_AS(agelab::nn::conv2d_forward(in, l), ShapeError);
}

TEST_CASE("conv2d rejects channel mismatch") {
    Layer<float> l = make_conv(1, 2, 3, 1, 0);
    Tensor in({1, 6, 6});
    CHECK_THROWS_AS(agelab::nn::conv2d_forward(in, l), ShapeError);
}

TEST_CASE("maxpool of [[1,2],[3,4]] is [[4]]") {
    Tensor in({1, 2, 2});
    in.data = {1, 2, 3, 4};
    Tensor out = agelab::nn::maxpool_forward(in, nullptr);
    REQUIRE(out.shape == std::vector<int>{1, 1, 1});
    CHECK(out[0] == 4.0f);
}

TEST_CASE("maxpool keeps a constant image constant at half resolution") {
    Tensor in({2, 4, 6});
    in.fill(3.25f);
    Tensor out = agelab::nn::maxpool_forward(in, nullptr);
    REQUIRE(out.shape == std::vector<int>{2, 2, 3});
    for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 3.25f);
}

TEST_CASE("maxpool matches the window-scan oracle on random input") {
    Rng rng(31);
    Tensor in = random_tensor({3, 4, 4}, rng);
    Tensor got = agelab::nn::maxpool_forward(in, nullptr);
    Tensor want = testsupport::maxpool_oracle(in);
    REQUIRE(got.shape == want.shape);
    for (std::size_t i = 0; i < got.numel(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("maxpool rejects odd spatial dims") {
    Tensor in({1, 3, 4});
    CHECK_THROWS_AS(agelab::nn::maxpool_forward(in, nullptr), ShapeError);
}

TEST_CASE("maxpool backward routes gradient to the winning cell") {
    Tensor in({1, 2, 2});
    in.data = {1, 2, 3, 4};
    std::vector<int> argmax;
    agelab::nn::maxpool_forward(in, &argmax);
    Tensor g({1, 1, 1});
    g[0] = 5.0f;
    Tensor gin = agelab::nn::maxpool_backward(g, argmax, in.shape);
    CHECK(gin.data == std::vector<float>{0, 0, 0, 5});
}

TEST_CASE("dense with identity weights passes the input through") {
    Layer<float> l = make_dense(3, 3);
    for (int i = 0; i < 3; ++i) l.weights[static_cast<std::size_t>(i) * 3 + i] = 1.0f;
    Tensor x({3});
    x.data = {1.0f, -2.0f, 0.5f};
    Tensor out = agelab::nn::dense_forward(x, l);
    CHECK(out.data == x.data);
}

TEST_CASE("dense hand example") {
    Layer<float> l = make_dense(2, 2);
    l.weights.data = {1, 1, 0, 1};
    l.bias.data = {0, 1};
    Tensor x({2});
    x.data = {1, 2};
    Tensor out = agelab::nn::dense_forward(x, l);
    CHECK(out[0] == 3.0f);
    CHECK(out[1] == 3.0f);
}

TEST_CASE("dense matches the dot-product oracle") {
    Rng rng(41);
    Layer<float> l = make_dense(5, 9);
    for (std::size_t i = 0; i < l.weights.numel(); ++i) l.weights[i] = rng.uniform(-1.0f, 1.0f);
    for (std::size_t i = 0; i < l.bias.numel(); ++i) l.bias[i] = rng.uniform(-1.0f, 1.0f);
    Tensor x = random_tensor({9}, rng);
    Tensor got = agelab::nn::dense_forward(x, l);
    Tensor want = testsupport::dense_oracle(x, l.weights, l.bias);
    for (std::size_t i = 0; i < got.numel(); ++i) {
        CHECK(testsupport::rel_err(got[i], want[i]) <= 1e-6);
    }
}

TEST_CASE("dense rejects a mis-sized input") {
    Layer<float> l = make_dense(2, 4);
    Tensor x({3});
    CHECK_THROWS_AS(agelab::nn::dense_forward(x, l), ShapeError);
}

TEST_CASE("relu clamps negatives and keeps the rest") {
    Tensor x({3});
    x.data = {-1.0f, 0.0f, 2.0f};
    Tensor out = agelab::nn::relu_forward(x);
    CHECK(out.data == std::vector<float>{0.0f, 0.0f, 2.0f});
}

TEST_CASE("relu of an all-negative tensor is all zeros") {
    Tensor x({4});
    x.data = {-5.0f, -0.1f, -2.0f, -100.0f};
    Tensor out = agelab::nn::relu_forward(x);
    for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0f);
}

TEST_CASE("relu is idempotent") {
    Rng rng(53);
    Tensor x = random_tensor({64}, rng, -3.0f, 3.0f);
    Tensor once = agelab::nn::relu_forward(x);
    Tensor twice = agelab::nn::relu_forward(once);
    CHECK(once.data == twice.data);
}

TEST_CASE("dropout at rate 0 is the identity in both modes") {
    Rng rng(1);
    Tensor x({5});
    x.data = {1, 2, 3, 4, 5};
    Tensor train = agelab::nn::dropout_forward(x, 0.0f, true, &rng);
    Tensor eval = agelab::nn::dropout_forward(x, 0.0f, false, nullptr);
    CHECK(train.data == x.data);
    CHECK(eval.data == x.data);
}

TEST_CASE("dropout in eval mode is the identity at any rate") {
    Tensor x({4});
    x.data = {1, -2, 3, -4};
    Tensor out = agelab::nn::dropout_forward(x, 0.9f, false, nullptr);
    CHECK(out.data == x.data);
}

TEST_CASE("dropout zeroed fraction concentrates at the rate") {
    Rng rng(123);
    Tensor x({10000});
    x.fill(1.0f);
    Tensor out = agelab::nn::dropout_forward(x, 0.5f, true, &rng);
    int zeros = 0;
    for (std::size_t i = 0; i < out.numel(); ++i) {
        if (out[i] == 0.0f) {
            ++zeros;
        } else {
            CHECK(out[i] == doctest::Approx(2.0f));
        }
    }
    const double frac = zeros / 10000.0;
    CHECK(frac > 0.48);
    CHECK(frac < 0.52);
}

TEST_CASE("dropout rejects rates outside [0,1)") {
    Rng rng(1);
    Tensor x({2});
    CHECK_THROWS_AS(agelab::nn::dropout_forward(x, 1.0f, true, &rng),
                    agelab::ConfigError);
    CHECK_THROWS_AS(agelab::nn::dropout_forward(x, -0.1f, true, &rng),
                    agelab::ConfigError);
}

TEST_CASE("dropout backward replays the forward mask") {
    Rng rng(7);
    Tensor x({100});
    x.fill(1.0f);
    Tensor mask;
    Tensor out = agelab::nn::dropout_forward(x, 0.3f, true, &rng, &mask);
    Tensor g({100});
    g.fill(1.0f);
    Tensor gin = agelab::nn::dropout_backward(g, mask);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        CHECK(gin[i] == out[i]);  // same mask, same scale, unit input and gradient
    }
}

TEST_CASE("softmax of [0,0] is [0.5,0.5]") {
    Tensor x({2});
    Tensor out = agelab::nn::softmax_forward(x);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == doctest::Approx(0.5));
}

TEST_CASE("softmax survives huge logits without overflow") {
    Tensor x({2});
    x.data = {1000.0f, 0.0f};
    Tensor out = agelab::nn::softmax_forward(x);
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[1] == doctest::Approx(0.0));
    CHECK(out.all_finite());
}

TEST_CASE("softmax is shift invariant") {
    Rng rng(61);
    Tensor x = random_tensor({10}, rng, -2.0f, 2.0f);
    Tensor shifted = x;
    for (std::size_t i = 0; i < shifted.numel(); ++i) shifted[i] += 3.7f;
    Tensor a = agelab::nn::softmax_forward(x);
    Tensor b = agelab::nn::softmax_forward(shifted);
    for (std::size_t i = 0; i < a.numel(); ++i) {
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
    }
}

TEST_CASE("softmax outputs are positive and sum to 1") {
    Rng rng(67);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor({81}, rng, -5.0f, 5.0f);
        Tensor out = agelab::nn::softmax_forward(x);
        double sum = 0.0;
        for (std::size_t i = 0; i < out.numel(); ++i) {
            CHECK(out[i] > 0.0f);
            sum += out[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
}

TEST_CASE("flatten preserves values and flattens shape") {
    Rng rng(71);
    Tensor x = random_tensor({2, 3, 4}, rng);
    Tensor out = agelab::nn::flatten_forward(x);
    REQUIRE(out.shape == std::vector<int>{24});
    CHECK(out.data == x.data);
}
