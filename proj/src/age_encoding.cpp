#include "agelab/age_encoding.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "agelab/parse_util.hpp"

namespace agelab {

namespace {

void check_age(int age) {
    if (age < kAgeLo || age > kAgeHi) {
        throw RangeError("age " + std::to_string(age) + " outside encodable range " +
                         std::to_string(kAgeLo) + ".." + std::to_string(kAgeHi));
    }
}

void check_bins(const AgeDistribution& dist) {
    if (static_cast<int>(dist.size()) != kAgeBins) {
        throw ShapeError("age distribution has " + std::to_string(dist.size()) +
                         " entries, expected " + std::to_string(kAgeBins));
    }
}

} // namespace

AlphaSchedule AlphaSchedule::fixed(double a) {
    if (!(a > 0.0)) throw ConfigError("alpha must be positive");
    AlphaSchedule s;
    s.kind = Kind::Static;
    s.alpha = a;
    return s;
}

AlphaSchedule AlphaSchedule::linear(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) {
        throw ConfigError("linear alpha schedule needs 0 < alpha_min <= alpha_max");
    }
    AlphaSchedule s;
    s.kind = Kind::Linear;
    s.alpha_min = lo;
    s.alpha_max = hi;
    return s;
}

AlphaSchedule parse_alpha_schedule(const std::string& token) {
    const std::vector<std::string> parts = split_on(token, ':');
    if (parts.size() == 2 && parts[0] == "static") {
        return AlphaSchedule::fixed(parse_strict_double(parts[1]));
    }
    if (parts.size() == 3 && parts[0] == "linear") {
        return AlphaSchedule::linear(parse_strict_double(parts[1]), parse_strict_double(parts[2]));
    }
    throw ConfigError("bad alpha schedule '" + token + "' (want static:<a> or linear:<lo>:<hi>)");
}

std::string alpha_schedule_token(const AlphaSchedule& schedule) {
    char buf[80];
    if (schedule.kind == AlphaSchedule::Kind::Static) {
        std::snprintf(buf, sizeof(buf), "static:%.17g", schedule.alpha);
    } else {
        std::snprintf(buf, sizeof(buf), "linear:%.17g:%.17g", schedule.alpha_min,
                      schedule.alpha_max);
    }
    return buf;
}

AgeDistribution one_hot_encode(int age) {
    check_age(age);
    AgeDistribution dist(kAgeBins, 0.0f);
    dist[age - kAgeLo] = 1.0f;
    return dist;
}

double alpha_for_age(int age, const AlphaSchedule& schedule) {
    check_age(age);
    if (schedule.kind == AlphaSchedule::Kind::Static) return schedule.alpha;
    return schedule.alpha_min +
           (schedule.alpha_max - schedule.alpha_min) * (age - kAgeLo) / double(kAgeHi - kAgeLo);
}

AgeDistribution ldae_encode(int age, const AlphaSchedule& schedule) {
    const double alpha = alpha_for_age(age, schedule);
    const double norm = 1.0 / (alpha * std::sqrt(2.0 * M_PI));
    AgeDistribution dist(kAgeBins);
    for (int i = 0; i < kAgeBins; ++i) {
        const double d = double(i + kAgeLo) - double(age);
        dist[i] = static_cast<float>(norm * std::exp(-d * d / (2.0 * alpha * alpha)));
    }
    return dist;
}

int decode_argmax(const AgeDistribution& dist) {
    check_bins(dist);
    int best = 0;
    for (int i = 1; i < kAgeBins; ++i) {
        if (dist[i] > dist[best]) best = i;
    }
    return best + kAgeLo;
}

double decode_expected_value(const AgeDistribution& dist) {
    check_bins(dist);
    double mass = 0.0, moment = 0.0;
    for (int i = 0; i < kAgeBins; ++i) {
        if (dist[i] < 0.0f) throw DegenerateDataError("age distribution has a negative entry");
        mass += dist[i];
        moment += double(i + kAgeLo) * dist[i];
    }
    if (!(mass > 0.0)) throw DegenerateDataError("age distribution has no mass to decode");
    return moment / mass;
}

} // namespace agelab
