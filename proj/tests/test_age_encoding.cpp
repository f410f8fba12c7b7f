#include <cmath>

#include "agelab/age_encoding.hpp"
#include "doctest.h"

using agelab::AgeDistribution;
using agelab::AlphaSchedule;
using agelab::ConfigError;
using agelab::DegenerateDataError;
using agelab::RangeError;
using agelab::kAgeBins;
using agelab::kAgeHi;
using agelab::kAgeLo;
using agelab::one_hot_encode;

namespace {

double dist_sum(const AgeDistribution& d) {
    double s = 0.0;
    for (float v : d) s += v;
    return s;
}

double dist_entropy(const AgeDistribution& d) {
    const double z = dist_sum(d);
    double h = 0.0;
    for (float v : d) {
        if (v > 0.0f) {
            const double p = v / z;
            h -= p * std::log(p);
        }
    }
    return h;
}

} // namespace

TEST_CASE("one_hot_encode puts unit mass on the age") {
    AgeDistribution d = one_hot_encode(30);
    CHECK(d[30 - kAgeLo] == 1.0f);
    CHECK(dist_sum(d) == 1.0);
    AgeDistribution lo = one_hot_encode(5);
    CHECK(lo[0] == 1.0f);
    AgeDistribution hi = one_hot_encode(85);
    CHECK(hi[kAgeBins - 1] == 1.0f);
}

TEST_CASE("encoders reject out-of-range ages") {
    CHECK_THROWS_AS(one_hot_encode(4), RangeError);
    CHECK_THROWS_AS(one_hot_encode(86), RangeError);
    CHECK_THROWS_AS(agelab::ldae_encode(100, AlphaSchedule::fixed(2.5)), RangeError);
}

TEST_CASE("alpha schedules validate their parameters") {
    CHECK_THROWS_AS(AlphaSchedule::fixed(0.0), ConfigError);
    CHECK_THROWS_AS(AlphaSchedule::linear(2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(AlphaSchedule::linear(0.0, 1.0), ConfigError);
}

TEST_CASE("alpha_for_age endpoints and midpoint of the linear schedule") {
    AlphaSchedule lin = AlphaSchedule::linear(1.0, 4.0);
    CHECK(agelab::alpha_for_age(5, lin) == doctest::Approx(1.0));
    CHECK(agelab::alpha_for_age(85, lin) == doctest::Approx(4.0));
    CHECK(agelab::alpha_for_age(45, lin) == doctest::Approx(2.5));
    AlphaSchedule st = AlphaSchedule::fixed(2.5);
    CHECK(agelab::alpha_for_age(30, st) == doctest::Approx(2.5));
}

TEST_CASE("ldae peak and shoulder values at alpha 2.5") {
    AgeDistribution d = agelab::ldae_encode(30, AlphaSchedule::fixed(2.5));
    CHECK(std::abs(d[30 - kAgeLo] - 0.15958) < 1e-4);
    CHECK(std::abs(d[35 - kAgeLo] - 0.021596) < 1e-4);
}

TEST_CASE("ldae argmax round-trips exactly over the whole range") {
    AlphaSchedule st = AlphaSchedule::fixed(2.5);
    for (int a = kAgeLo; a <= kAgeHi; ++a) {
        CHECK(agelab::decode_argmax(agelab::ldae_encode(a, st)) == a);
    }
}

TEST_CASE("ldae mass stays near 1 away from tail truncation") {
    // Interior ages keep essentially all Gaussian mass inside 5..85; the
    // usable interior shrinks as alpha grows.
    AlphaSchedule narrow = AlphaSchedule::fixed(1.0);
    for (int a = 7; a <= 83; ++a) {
        const double s = dist_sum(agelab::ldae_encode(a, narrow));
        CHECK(s >= 0.99);
        CHECK(s <= 1.001);
    }
    AlphaSchedule wide = AlphaSchedule::fixed(2.5);
    for (int a = 11; a <= 79; ++a) {
        const double s = dist_sum(agelab::ldae_encode(a, wide));
        CHECK(s >= 0.99);
        CHECK(s <= 1.001);
    }
}

TEST_CASE("ldae is symmetric about the true age") {
    AgeDistribution d = agelab::ldae_encode(40, AlphaSchedule::fixed(2.5));
    for (int k = 1; k <= 20; ++k) {
        CHECK(d[40 - kAgeLo + k] == doctest::Approx(d[40 - kAgeLo - k]).epsilon(1e-6));
    }
}

TEST_CASE("larger alpha lowers the peak and raises entropy") {
    AgeDistribution a1 = agelab::ldae_encode(45, AlphaSchedule::fixed(1.0));
    AgeDistribution a2 = agelab::ldae_encode(45, AlphaSchedule::fixed(2.5));
    CHECK(a2[45 - kAgeLo] < a1[45 - kAgeLo]);
    CHECK(dist_entropy(a2) > dist_entropy(a1));
}

TEST_CASE("expected value decoding round-trips interior ages") {
    AlphaSchedule narrow = AlphaSchedule::fixed(1.0);
    for (int a = 10; a <= 80; ++a) {
        CHECK(std::abs(agelab::decode_expected_value(agelab::ldae_encode(a, narrow)) - a) <= 0.02);
    }
    AlphaSchedule wide = AlphaSchedule::fixed(2.5);
    for (int a = 12; a <= 78; ++a) {
        CHECK(std::abs(agelab::decode_expected_value(agelab::ldae_encode(a, wide)) - a) <= 0.02);
    }
}

TEST_CASE("expected value of a perfectly symmetric interior encoding is exact") {
    const double got = agelab::decode_expected_value(agelab::ldae_encode(45, AlphaSchedule::fixed(2.5)));
    CHECK(std::abs(got - 45.0) <= 1e-6);
}

TEST_CASE("decoders handle hand-built distributions") {
    CHECK(agelab::decode_argmax(one_hot_encode(30)) == 30);
    CHECK(agelab::decode_expected_value(one_hot_encode(30)) == doctest::Approx(30.0));
    AgeDistribution uniform(kAgeBins, 1.0f / kAgeBins);
    CHECK(agelab::decode_expected_value(uniform) == doctest::Approx(45.0));
}

TEST_CASE("argmax ties break toward the youngest age") {
    AgeDistribution d(kAgeBins, 0.0f);
    d[40 - kAgeLo] = 0.5f;
    d[41 - kAgeLo] = 0.5f;
    CHECK(agelab::decode_argmax(d) == 40);
}

TEST_CASE("expected value rejects an all-zero distribution") {
    AgeDistribution d(kAgeBins, 0.0f);
    CHECK_THROWS_AS(agelab::decode_expected_value(d), DegenerateDataError);
}

TEST_CASE("linear schedule encodings still argmax round-trip") {
    AlphaSchedule lin = AlphaSchedule::linear(1.0, 3.5);
    for (int a = kAgeLo; a <= kAgeHi; ++a) {
        CHECK(agelab::decode_argmax(agelab::ldae_encode(a, lin)) == a);
    }
}
