#include <array>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "agelab/image.hpp"
#include "agelab/labels.hpp"
#include "agelab/synth.hpp"
#include "doctest.h"

using agelab::ConfigError;
using agelab::DegenerateDataError;
using agelab::Gender;
using agelab::LabelRecord;
using agelab::Race;
using agelab::SyntheticSpec;
using agelab::SynthDataset;
using agelab::brightness_asymmetry;
using agelab::load_labels;
using agelab::load_pnm;
using agelab::recover_age_from_disc;
using agelab::synth_image;
using agelab::synth_in_memory;
using agelab::synth_labels;
using agelab::synth_self_check;
using agelab::validate_synth_spec;
using agelab::write_synth_dataset;
using agelab::nn::Tensor;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "agelab_synth_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

SyntheticSpec small_spec(int count, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.count = count;
    spec.seed = seed;
    return spec;
}

bool identical(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// The reference age-by-gender cell counts the profile mode reproduces:
// males then females, bands under-20 / 20s / 30s / 40s / 50-plus.
constexpr std::array<int, 10> kProfileCells = {6649, 14009, 12436, 10082, 3468,
                                               836,  2305,  2924,  1978,  447};
constexpr int kProfileTotal = 55134;

int band_of(int age) {
    if (age < 20) return 0;
    if (age < 50) return age / 10 - 1;
    return 4;
}

std::array<int, 10> count_cells(const std::vector<LabelRecord>& roster) {
    std::array<int, 10> cells{};
    for (const LabelRecord& r : roster) {
        const int row = r.gender == Gender::Male ? 0 : 1;
        ++cells[static_cast<std::size_t>(row * 5 + band_of(r.age))];
    }
    return cells;
}

} // namespace

TEST_CASE("impossible specs are rejected up front") {
    auto expect_bad = [](SyntheticSpec spec, const char* fragment) {
        CHECK_THROWS_WITH_AS(validate_synth_spec(spec), doctest::Contains(fragment), ConfigError);
    };
    SyntheticSpec base = small_spec(10, 1);
    CHECK_NOTHROW(validate_synth_spec(base));

    SyntheticSpec s = base;
    s.count = 0;
    expect_bad(s, "count");
    s = base;
    s.width = 4;
    expect_bad(s, "8x8");
    s = base;
    s.age_lo = 4;
    expect_bad(s, "5..85");
    s = base;
    s.age_hi = 86;
    expect_bad(s, "5..85");
    s = base;
    s.male_fraction = 1.5;
    expect_bad(s, "male_fraction");
    s = base;
    s.noise = -1.0;
    expect_bad(s, "noise");
    s = base;
    s.brightness_delta = 0.0;
    expect_bad(s, "brightness_delta");
    s = base;
    s.disc_scale = 1.0;  // radius 78 cannot fit a 64-pixel image
    expect_bad(s, "disc");
    s = base;
    s.table1_profile = true;
    s.age_lo = 20;
    expect_bad(s, "profile");
}

TEST_CASE("the roster and images are pure functions of the spec") {
    const SyntheticSpec spec = small_spec(40, 2024);
    const SynthDataset a = synth_in_memory(spec);
    const SynthDataset b = synth_in_memory(spec);
    REQUIRE(a.labels.size() == 40);
    REQUIRE(a.images.size() == 40);
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        CHECK(a.labels[i].age == b.labels[i].age);
        CHECK(a.labels[i].gender == b.labels[i].gender);
        CHECK(a.labels[i].race == b.labels[i].race);
        CHECK(identical(a.images[i], b.images[i]));
    }

    SyntheticSpec other = spec;
    other.seed = 2025;
    const SynthDataset c = synth_in_memory(other);
    bool any_pixel_differs = false;
    for (std::size_t i = 0; i < a.images.size() && !any_pixel_differs; ++i)
        any_pixel_differs = !identical(a.images[i], c.images[i]);
    CHECK(any_pixel_differs);
}

TEST_CASE("ids and paths are unique, zero-padded and index-ordered") {
    const std::vector<LabelRecord> roster = synth_labels(small_spec(12, 5));
    CHECK(roster[0].subject_id == "s000000");
    CHECK(roster[7].subject_id == "s000007");
    CHECK(roster[7].image_path == "images/img_000007.pgm");
    std::set<std::string> ids, paths;
    for (const LabelRecord& r : roster) {
        ids.insert(r.subject_id);
        paths.insert(r.image_path);
    }
    CHECK(ids.size() == roster.size());
    CHECK(paths.size() == roster.size());
}

TEST_CASE("the default roster keeps three males per female in every prefix") {
    const std::vector<LabelRecord> roster = synth_labels(small_spec(1000, 9));
    int males = 0;
    for (std::size_t i = 0; i < roster.size(); ++i) {
        if (roster[i].gender == Gender::Male) ++males;
        CHECK(males == static_cast<int>(std::floor(0.75 * static_cast<double>(i + 1))));
    }
    CHECK(males == 750);
}

TEST_CASE("ages stay inside the requested window and races cover all codes") {
    SyntheticSpec spec = small_spec(1000, 31);
    spec.age_lo = 20;
    spec.age_hi = 49;
    const std::vector<LabelRecord> roster = synth_labels(spec);
    std::set<Race> races;
    for (const LabelRecord& r : roster) {
        CHECK(r.age >= 20);
        CHECK(r.age <= 49);
        races.insert(r.race);
    }
    // Black at 77%, white at 19%, other at 4%: all three appear at this size.
    CHECK(races.size() == 3);
    const auto share = [&](Race race) {
        int n = 0;
        for (const LabelRecord& r : roster) n += r.race == race;
        return n / 1000.0;
    };
    CHECK(share(Race::Black) == doctest::Approx(0.77).epsilon(0.1));
    CHECK(share(Race::White) == doctest::Approx(0.19).epsilon(0.25));
}

TEST_CASE("the profile mode reproduces the reference cells exactly at full size") {
    SyntheticSpec spec = small_spec(kProfileTotal, 13);
    spec.table1_profile = true;
    const std::vector<LabelRecord> roster = synth_labels(spec);
    REQUIRE(static_cast<int>(roster.size()) == kProfileTotal);
    const std::array<int, 10> cells = count_cells(roster);
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(cells[i] == kProfileCells[i]);
}

TEST_CASE("a scaled profile stays within one record of proportional") {
    const int total = 5001;
    SyntheticSpec spec = small_spec(total, 21);
    spec.table1_profile = true;
    const std::array<int, 10> cells = count_cells(synth_labels(spec));
    int sum = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double exact =
            static_cast<double>(total) * kProfileCells[i] / static_cast<double>(kProfileTotal);
        CHECK(std::abs(cells[i] - exact) < 1.0);
        sum += cells[i];
    }
    CHECK(sum == total);
}

TEST_CASE("brightness asymmetry is a plain left-right mean difference") {
    Tensor img({1, 2, 4});
    for (std::size_t i = 0; i < img.numel(); ++i) img[i] = (i % 4) < 2 ? 10.0f : 20.0f;
    CHECK(brightness_asymmetry(img) == doctest::Approx(-10.0).epsilon(1e-12));
}

TEST_CASE("noiseless images classify gender by asymmetry sign alone") {
    const SynthDataset data = synth_in_memory(small_spec(60, 88));
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        const double asym = brightness_asymmetry(data.images[i]);
        if (data.labels[i].gender == Gender::Male)
            CHECK(asym > 0.0);
        else
            CHECK(asym < 0.0);
    }
}

TEST_CASE("the disc area decodes every age in the window exactly") {
    const SyntheticSpec spec = small_spec(1, 0);
    for (Gender g : {Gender::Male, Gender::Female}) {
        for (int age = spec.age_lo; age <= spec.age_hi; ++age) {
            LabelRecord r;
            r.age = age;
            r.gender = g;
            const Tensor img = synth_image(spec, r, age);
            CHECK(recover_age_from_disc(img, spec, g) == age);
        }
    }
}

TEST_CASE("a discless image decodes to the youngest age") {
    const SyntheticSpec spec = small_spec(1, 0);
    Tensor img({1, 64, 64});
    img.fill(108.0f);
    CHECK(recover_age_from_disc(img, spec, Gender::Female) == spec.age_lo);
}

TEST_CASE("the generator self-check passes for plain and profile specs") {
    CHECK_NOTHROW(synth_self_check(small_spec(150, 3)));
    SyntheticSpec profile = small_spec(400, 4);
    profile.table1_profile = true;
    CHECK_NOTHROW(synth_self_check(profile));
    SyntheticSpec noisy = small_spec(64, 5);
    noisy.noise = 8.0;
    CHECK_NOTHROW(synth_self_check(noisy));
}

TEST_CASE("noise perturbs pixels but leaves the labels alone") {
    SyntheticSpec clean = small_spec(10, 6);
    SyntheticSpec noisy = clean;
    noisy.noise = 8.0;
    const SynthDataset a = synth_in_memory(clean);
    const SynthDataset b = synth_in_memory(noisy);
    bool differs = false;
    for (std::size_t i = 0; i < a.images.size(); ++i) {
        CHECK(a.labels[i].age == b.labels[i].age);
        CHECK(a.labels[i].gender == b.labels[i].gender);
        if (!identical(a.images[i], b.images[i])) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("written datasets read back bit-identical to the in-memory tensors") {
    SyntheticSpec spec = small_spec(25, 77);
    spec.noise = 8.0;
    const auto dir = temp_dir("written");
    write_synth_dataset(spec, dir);

    const auto loaded = load_labels(dir / "manifest.csv");
    CHECK(loaded.rejects.empty());
    REQUIRE(loaded.records.size() == 25);

    const SynthDataset mem = synth_in_memory(spec);
    for (std::size_t i = 0; i < loaded.records.size(); ++i) {
        CHECK(loaded.records[i].age == mem.labels[i].age);
        CHECK(loaded.records[i].gender == mem.labels[i].gender);
        const Tensor from_disk = load_pnm(dir / loaded.records[i].image_path);
        CHECK(identical(from_disk, mem.images[i]));
    }
}
