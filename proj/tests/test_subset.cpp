#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "agelab/subset.hpp"
#include "doctest.h"

using agelab::Gender;
using agelab::LabelRecord;
using agelab::Race;
using agelab::SizingError;
using agelab::SplitSet;
using agelab::SubsetOptions;
using agelab::default_subset_size;
using agelab::guo_mu_subset;

namespace {

// Rosters are built deterministically: `counts` lists (gender, race, how many)
// groups appended in order, each record getting a unique id and path.
struct Group {
    Gender gender;
    Race race;
    int count;
};

std::vector<LabelRecord> make_roster(const std::vector<Group>& groups) {
    std::vector<LabelRecord> out;
    int i = 0;
    for (const Group& g : groups) {
        for (int k = 0; k < g.count; ++k, ++i) {
            LabelRecord r;
            r.subject_id = "s" + std::to_string(i);
            r.image_path = "img" + std::to_string(i) + ".pgm";
            r.age = 20 + (i % 50);
            r.gender = g.gender;
            r.race = g.race;
            out.push_back(std::move(r));
        }
    }
    return out;
}

int count_gender(const std::vector<LabelRecord>& v, Gender g) {
    return static_cast<int>(std::count_if(v.begin(), v.end(),
                                          [&](const LabelRecord& r) { return r.gender == g; }));
}

std::vector<std::string> paths_of(const std::vector<LabelRecord>& v) {
    std::vector<std::string> out;
    for (const LabelRecord& r : v) out.push_back(r.image_path);
    return out;
}

} // namespace

TEST_CASE("the default set size scales with the roster") {
    CHECK(default_subset_size(54904) == 10280);
    CHECK(default_subset_size(27452) == 5140);
    CHECK(default_subset_size(5) == 1);
    CHECK(default_subset_size(0) == 0);
}

TEST_CASE("a reference-size roster splits into 10280 + 10280 + 34344") {
    const std::vector<LabelRecord> roster = make_roster({
        {Gender::Male, Race::Black, 25000},
        {Gender::Male, Race::White, 15000},
        {Gender::Female, Race::Black, 6000},
        {Gender::Female, Race::White, 4000},
        {Gender::Male, Race::Other, 3000},
        {Gender::Female, Race::Other, 1904},
    });
    REQUIRE(roster.size() == 54904);
    const SplitSet split = guo_mu_subset(roster, 42);
    CHECK(split.s1.size() == 10280);
    CHECK(split.s2.size() == 10280);
    CHECK(split.s3.size() == 34344);

    for (const auto* s : {&split.s1, &split.s2}) {
        CHECK(count_gender(*s, Gender::Male) == 7710);
        CHECK(count_gender(*s, Gender::Female) == 2570);
        for (const LabelRecord& r : *s) CHECK(r.race != Race::Other);
    }
}

TEST_CASE("every roster record lands in exactly one set, in roster order") {
    const std::vector<LabelRecord> roster = make_roster({
        {Gender::Male, Race::Black, 300},
        {Gender::Female, Race::White, 120},
        {Gender::Male, Race::Other, 60},
    });
    SubsetOptions opt;
    opt.set_size = 80;
    const SplitSet split = guo_mu_subset(roster, 7, opt);
    CHECK(split.s1.size() == 80);
    CHECK(split.s2.size() == 80);
    CHECK(split.s1.size() + split.s2.size() + split.s3.size() == roster.size());

    std::unordered_map<std::string, int> roster_pos;
    for (std::size_t i = 0; i < roster.size(); ++i)
        roster_pos[roster[i].image_path] = static_cast<int>(i);
    std::set<std::string> seen;
    for (const auto* s : {&split.s1, &split.s2, &split.s3}) {
        int prev = -1;
        for (const LabelRecord& r : *s) {
            CHECK(seen.insert(r.image_path).second);
            const int pos = roster_pos.at(r.image_path);
            CHECK(pos > prev);
            prev = pos;
        }
    }
    CHECK(seen.size() == roster.size());
}

TEST_CASE("non-black/white records never enter the first two sets") {
    const std::vector<LabelRecord> roster = make_roster({
        {Gender::Male, Race::Other, 200},
        {Gender::Male, Race::Black, 100},
        {Gender::Female, Race::White, 40},
    });
    SubsetOptions opt;
    opt.set_size = 40;
    const SplitSet split = guo_mu_subset(roster, 3, opt);
    for (const auto* s : {&split.s1, &split.s2})
        for (const LabelRecord& r : *s) CHECK(r.race != Race::Other);
    CHECK(static_cast<int>(std::count_if(split.s3.begin(), split.s3.end(), [](const LabelRecord& r) {
              return r.race == Race::Other;
          })) == 200);
}

TEST_CASE("the male to female ratio stays within rounding of three to one") {
    const std::vector<LabelRecord> roster = make_roster({
        {Gender::Male, Race::Black, 400},
        {Gender::Female, Race::White, 200},
    });
    for (int size = 4; size <= 40; ++size) {
        SubsetOptions opt;
        opt.set_size = size;
        const SplitSet split = guo_mu_subset(roster, 11, opt);
        const int m = count_gender(split.s1, Gender::Male);
        const int f = count_gender(split.s1, Gender::Female);
        CHECK(m + f == size);
        CHECK(std::abs(m - 3 * f) <= 2);
    }
}

TEST_CASE("the split is a pure function of roster and seed") {
    const std::vector<LabelRecord> roster = make_roster({
        {Gender::Male, Race::Black, 500},
        {Gender::Female, Race::White, 150},
    });
    SubsetOptions opt;
    opt.set_size = 100;
    const SplitSet a = guo_mu_subset(roster, 99, opt);
    const SplitSet b = guo_mu_subset(roster, 99, opt);
    CHECK(paths_of(a.s1) == paths_of(b.s1));
    CHECK(paths_of(a.s2) == paths_of(b.s2));
    CHECK(paths_of(a.s3) == paths_of(b.s3));

    const SplitSet c = guo_mu_subset(roster, 100, opt);
    CHECK(paths_of(a.s1) != paths_of(c.s1));
}

TEST_CASE("an undersized roster fails loudly instead of shrinking the sets") {
    const std::vector<LabelRecord> roster = make_roster({
        {Gender::Male, Race::Black, 30},
        {Gender::Female, Race::White, 30},
    });
    SubsetOptions opt;
    opt.set_size = 20;  // needs 2*15 males, only 30 present; females are fine
    CHECK_NOTHROW(guo_mu_subset(roster, 1, opt));
    opt.set_size = 24;  // needs 2*18 = 36 males
    CHECK_THROWS_WITH_AS(guo_mu_subset(roster, 1, opt), doctest::Contains("male"), SizingError);
}

TEST_CASE("whole-subject mode keeps every subject inside one set") {
    // 60 two-image male subjects and 30 two-image female subjects.
    std::vector<LabelRecord> roster;
    int img = 0;
    auto add_subject = [&](const std::string& id, Gender g, Race race, int images) {
        for (int k = 0; k < images; ++k) {
            LabelRecord r;
            r.subject_id = id;
            r.image_path = "img" + std::to_string(img++) + ".pgm";
            r.age = 30;
            r.gender = g;
            r.race = race;
            roster.push_back(std::move(r));
        }
    };
    for (int s = 0; s < 60; ++s) add_subject("m" + std::to_string(s), Gender::Male, Race::Black, 2);
    for (int s = 0; s < 30; ++s) add_subject("f" + std::to_string(s), Gender::Female, Race::White, 2);

    SubsetOptions opt;
    opt.set_size = 40;
    opt.subject_disjoint = true;
    const SplitSet split = guo_mu_subset(roster, 17, opt);
    CHECK(split.s1.size() == 40);
    CHECK(split.s2.size() == 40);
    CHECK(count_gender(split.s1, Gender::Male) == 30);
    CHECK(count_gender(split.s1, Gender::Female) == 10);
    CHECK(count_gender(split.s2, Gender::Male) == 30);
    CHECK(count_gender(split.s2, Gender::Female) == 10);

    std::set<std::string> in_s1, in_s2;
    for (const LabelRecord& r : split.s1) in_s1.insert(r.subject_id);
    for (const LabelRecord& r : split.s2) in_s2.insert(r.subject_id);
    for (const std::string& id : in_s1) CHECK(in_s2.count(id) == 0);
}

TEST_CASE("whole-subject mode excludes subjects with any non-black/white image") {
    std::vector<LabelRecord> roster;
    int img = 0;
    auto add = [&](const std::string& id, Race race) {
        for (int k = 0; k < 2; ++k) {
            LabelRecord r;
            r.subject_id = id;
            r.image_path = "img" + std::to_string(img++) + ".pgm";
            r.age = 25;
            r.gender = Gender::Male;
            r.race = k == 1 ? race : Race::Black;
            roster.push_back(std::move(r));
        }
    };
    for (int s = 0; s < 20; ++s) add("pure" + std::to_string(s), Race::Black);
    for (int s = 0; s < 20; ++s) add("mixed" + std::to_string(s), Race::Other);
    for (int s = 0; s < 8; ++s) {
        LabelRecord r;
        r.subject_id = "f" + std::to_string(s);
        r.image_path = "img" + std::to_string(img++) + ".pgm";
        r.age = 25;
        r.gender = Gender::Female;
        r.race = Race::White;
        roster.push_back(std::move(r));
    }

    SubsetOptions opt;
    opt.set_size = 8;  // 6 males + 2 females per set
    opt.subject_disjoint = true;
    const SplitSet split = guo_mu_subset(roster, 23, opt);
    for (const auto* s : {&split.s1, &split.s2})
        for (const LabelRecord& r : *s) CHECK(r.subject_id.find("mixed") == std::string::npos);
}

TEST_CASE("whole-subject mode reports quotas it cannot fill") {
    std::vector<LabelRecord> roster;
    int img = 0;
    auto add_subject = [&](const std::string& id, Gender g, int images) {
        for (int k = 0; k < images; ++k) {
            LabelRecord r;
            r.subject_id = id;
            r.image_path = "img" + std::to_string(img++) + ".pgm";
            r.age = 40;
            r.gender = g;
            r.race = Race::Black;
            roster.push_back(std::move(r));
        }
    };
    // Three 7-image male subjects cannot tile two male quotas of 9.
    for (int s = 0; s < 3; ++s) add_subject("m" + std::to_string(s), Gender::Male, 7);
    for (int s = 0; s < 6; ++s) add_subject("f" + std::to_string(s), Gender::Female, 1);

    SubsetOptions opt;
    opt.set_size = 12;  // 9 males + 3 females per set
    opt.subject_disjoint = true;
    CHECK_THROWS_WITH_AS(guo_mu_subset(roster, 2, opt), doctest::Contains("whole-subject"),
                         SizingError);
}
