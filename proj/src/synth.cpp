#include "agelab/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "agelab/image.hpp"
#include "agelab/rng.hpp"

namespace agelab {

using nn::Tensor;

namespace {

constexpr double kBaseBrightness = 120.0;
constexpr double kDiscBrightness = 230.0;
constexpr double kRaceBlack = 0.77;
constexpr double kRaceWhite = 0.19;

// Stream tags so label, image and shuffle draws never share a sequence.
constexpr std::uint64_t kLabelStream = 0xA5;
constexpr std::uint64_t kShuffleStream = 0xB7;
constexpr std::uint64_t kImageStream = 0xC9;

// Reference age-by-gender cell counts (rows male then female, bands
// under-20 / 20s / 30s / 40s / 50-plus), totalling 55,134.
constexpr int kCellCounts[10] = {6649, 14009, 12436, 10082, 3468,
                                 836,  2305,  2924,  1978,  447};
constexpr int kCellTotal = 55134;

struct Band {
    int lo, hi;
};

std::array<Band, 5> age_bands(const SyntheticSpec& spec) {
    return {Band{spec.age_lo, 19}, Band{20, 29}, Band{30, 39}, Band{40, 49},
            Band{50, spec.age_hi}};
}

// Largest-remainder scaling of the reference cells to an arbitrary total.
std::array<int, 10> scaled_cells(int total) {
    std::array<int, 10> out{};
    std::array<double, 10> frac{};
    int assigned = 0;
    for (int i = 0; i < 10; ++i) {
        const double exact = static_cast<double>(total) * kCellCounts[i] / kCellTotal;
        out[i] = static_cast<int>(exact);
        frac[i] = exact - out[i];
        assigned += out[i];
    }
    std::array<int, 10> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (int k = 0; k < total - assigned; ++k) ++out[order[k]];
    return out;
}

Race draw_race(Rng& rng) {
    const double u = rng.uniform01d();
    if (u < kRaceBlack) return Race::Black;
    if (u < kRaceBlack + kRaceWhite) return Race::White;
    return Race::Other;
}

double background_at(const SyntheticSpec& spec, Gender gender, int x) {
    const bool left = x < spec.width / 2;
    const bool bright = (gender == Gender::Male) == left;
    return kBaseBrightness + (bright ? spec.brightness_delta : -spec.brightness_delta);
}

} // namespace

void validate_synth_spec(const SyntheticSpec& spec) {
    if (spec.count < 1) throw ConfigError("synthetic spec needs count >= 1");
    if (spec.width < 8 || spec.height < 8) throw ConfigError("synthetic images must be at least 8x8");
    if (spec.age_lo > spec.age_hi || spec.age_lo < 5 || spec.age_hi > 85) {
        throw ConfigError("synthetic age range must sit inside 5..85");
    }
    if (!(spec.male_fraction >= 0.0 && spec.male_fraction <= 1.0)) {
        throw ConfigError("male_fraction must be in [0,1]");
    }
    if (spec.noise < 0.0) throw ConfigError("noise sigma must be non-negative");
    if (!(spec.brightness_delta > 0.0)) {
        throw ConfigError("brightness_delta must be positive or the gender cue vanishes");
    }
    if (!(spec.disc_scale > 0.0)) throw ConfigError("disc_scale must be positive");
    const double max_radius = spec.disc_scale * spec.age_hi + 1.0;
    if (2.0 * max_radius >= std::min(spec.width, spec.height)) {
        throw ConfigError("disc for the oldest age does not fit the image; shrink disc_scale");
    }
    if (spec.table1_profile && (spec.age_lo > 19 || spec.age_hi < 50)) {
        throw ConfigError("table1 profile needs an age range covering under-20 through 50-plus");
    }
}

std::vector<LabelRecord> synth_labels(const SyntheticSpec& spec) {
    validate_synth_spec(spec);
    Rng rng(Rng::mix(spec.seed, kLabelStream));
    std::vector<LabelRecord> out;
    out.reserve(static_cast<std::size_t>(spec.count));

    if (spec.table1_profile) {
        const std::array<int, 10> cells = scaled_cells(spec.count);
        const auto bands = age_bands(spec);
        for (int cell = 0; cell < 10; ++cell) {
            const Gender g = cell < 5 ? Gender::Male : Gender::Female;
            const Band band = bands[static_cast<std::size_t>(cell % 5)];
            for (int k = 0; k < cells[static_cast<std::size_t>(cell)]; ++k) {
                LabelRecord r;
                r.gender = g;
                r.age = band.lo + static_cast<int>(rng.below(
                                      static_cast<std::uint32_t>(band.hi - band.lo + 1)));
                r.race = draw_race(rng);
                out.push_back(std::move(r));
            }
        }
        Rng shuffle_rng(Rng::mix(spec.seed, kShuffleStream));
        shuffle_rng.shuffle(out);
    } else {
        // Spread males evenly so any prefix of the roster keeps the ratio.
        for (int i = 0; i < spec.count; ++i) {
            LabelRecord r;
            const double f = spec.male_fraction;
            r.gender = std::floor((i + 1) * f) > std::floor(i * f) ? Gender::Male : Gender::Female;
            r.age = spec.age_lo + static_cast<int>(rng.below(
                                      static_cast<std::uint32_t>(spec.age_hi - spec.age_lo + 1)));
            r.race = draw_race(rng);
            out.push_back(std::move(r));
        }
    }

    for (int i = 0; i < spec.count; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "s%06d", i);
        out[static_cast<std::size_t>(i)].subject_id = buf;
        std::snprintf(buf, sizeof(buf), "images/img_%06d.pgm", i);
        out[static_cast<std::size_t>(i)].image_path = buf;
    }
    return out;
}

Tensor synth_image(const SyntheticSpec& spec, const LabelRecord& label, int index) {
    const int w = spec.width, h = spec.height;
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    const double radius = spec.disc_scale * label.age;
    Rng rng(Rng::mix(Rng::mix(spec.seed, kImageStream), static_cast<std::uint64_t>(index)));

    Tensor img({1, h, w});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double bg = background_at(spec, label.gender, x);
            const double dist = std::hypot(x - cx, y - cy);
            const double coverage = std::clamp(radius + 0.5 - dist, 0.0, 1.0);
            double v = bg + (kDiscBrightness - bg) * coverage;
            if (spec.noise > 0.0) v += spec.noise * rng.normal();
            const long q = std::lround(v);
            img[static_cast<std::size_t>(y) * w + x] =
                static_cast<float>(q < 0 ? 0 : (q > 255 ? 255 : q));
        }
    }
    return img;
}

double brightness_asymmetry(const Tensor& image) {
    const int h = image.shape[1], w = image.shape[2];
    const int half = w / 2;
    double left = 0.0, right = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            (x < half ? left : right) += image[static_cast<std::size_t>(y) * w + x];
        }
    }
    const double left_n = static_cast<double>(h) * half;
    const double right_n = static_cast<double>(h) * (w - half);
    return left / left_n - right / right_n;
}

int recover_age_from_disc(const Tensor& image, const SyntheticSpec& spec, Gender gender) {
    // Coverage-weighted disc area. The anti-aliased disc of radius r has
    // total coverage pi*(r^2 + 1/12), so invert that for the radius.
    const int h = image.shape[1], w = image.shape[2];
    double area = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double bg = background_at(spec, gender, x);
            const double v = image[static_cast<std::size_t>(y) * w + x];
            area += std::max(0.0, (v - bg) / (kDiscBrightness - bg));
        }
    }
    const double r2 = area / M_PI - 1.0 / 12.0;
    if (r2 <= 0.0) return spec.age_lo;
    const double radius = std::sqrt(r2);
    const int age = static_cast<int>(std::lround(radius / spec.disc_scale));
    return std::clamp(age, spec.age_lo, spec.age_hi);
}

void synth_self_check(const SyntheticSpec& spec) {
    SyntheticSpec clean = spec;
    clean.noise = 0.0;
    const std::vector<LabelRecord> labels = synth_labels(clean);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Tensor img = synth_image(clean, labels[i], static_cast<int>(i));
        const double asym = brightness_asymmetry(img);
        const bool looks_male = asym > 0.0;
        if (looks_male != (labels[i].gender == Gender::Male)) {
            throw DegenerateDataError("self-check: brightness asymmetry misclassifies sample " +
                                      std::to_string(i));
        }
        const int age = recover_age_from_disc(img, clean, labels[i].gender);
        if (age != labels[i].age) {
            throw DegenerateDataError("self-check: disc area decodes age " + std::to_string(age) +
                                      " instead of " + std::to_string(labels[i].age) +
                                      " for sample " + std::to_string(i));
        }
    }
}

void write_synth_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
    synth_self_check(spec);
    const std::vector<LabelRecord> labels = synth_labels(spec);
    std::filesystem::create_directories(out_dir / "images");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Tensor img = synth_image(spec, labels[i], static_cast<int>(i));
        save_pnm(img, out_dir / labels[i].image_path);
    }
    save_labels(labels, out_dir / "manifest.csv");
}

SynthDataset synth_in_memory(const SyntheticSpec& spec) {
    SynthDataset out;
    out.labels = synth_labels(spec);
    out.images.reserve(out.labels.size());
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        out.images.push_back(synth_image(spec, out.labels[i], static_cast<int>(i)));
    }
    return out;
}

} // namespace agelab
