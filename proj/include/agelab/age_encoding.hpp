#pragma once

#include <string>
#include <vector>

#include "agelab/error.hpp"

namespace agelab {

// Age distributions cover integer ages 5..85 inclusive: 81 bins, index 0 = age 5.
inline constexpr int kAgeLo = 5;
inline constexpr int kAgeHi = 85;
inline constexpr int kAgeBins = kAgeHi - kAgeLo + 1;

using AgeDistribution = std::vector<float>;

// Gaussian spread schedule for the distribution encoding: a fixed alpha, or
// one growing linearly from alpha_min at age 5 to alpha_max at age 85.
struct AlphaSchedule {
    enum class Kind { Static, Linear };
    Kind kind = Kind::Static;
    double alpha = 2.5;
    double alpha_min = 1.0;
    double alpha_max = 3.5;

    static AlphaSchedule fixed(double a);
    static AlphaSchedule linear(double lo, double hi);
};

// Schedule token syntax used by config files and sweep values:
// "static:<alpha>" or "linear:<min>:<max>". The two functions round-trip.
AlphaSchedule parse_alpha_schedule(const std::string& token);
std::string alpha_schedule_token(const AlphaSchedule& schedule);

AgeDistribution one_hot_encode(int age);
double alpha_for_age(int age, const AlphaSchedule& schedule);

// Unnormalized Gaussian bump centred on the true age; bins carry the raw
// density values, so the total mass dips slightly below 1 near the range ends.
AgeDistribution ldae_encode(int age, const AlphaSchedule& schedule);

// Mode of the distribution; ties resolve toward the youngest age.
int decode_argmax(const AgeDistribution& dist);

// Normalized mean age, sum(i * p_i) / sum(p_i).
double decode_expected_value(const AgeDistribution& dist);

} // namespace agelab
