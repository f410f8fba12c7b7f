#include "agelab/subset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include "agelab/rng.hpp"

namespace agelab {

namespace {

// Reference roster: two sets of 10,280 plus a remainder of 34,344.
constexpr double kReferenceRoster = 54904.0;
constexpr double kReferenceSetSize = 10280.0;

bool eligible(const LabelRecord& r) { return r.race == Race::Black || r.race == Race::White; }

[[noreturn]] void shortfall(const char* what, std::size_t have, std::size_t need) {
    throw SizingError(std::string("not enough eligible ") + what + " records: need " +
                      std::to_string(need) + ", have " + std::to_string(have));
}

} // namespace

int default_subset_size(std::size_t roster_size) {
    return static_cast<int>(
        std::llround(static_cast<double>(roster_size) * kReferenceSetSize / kReferenceRoster));
}

SplitSet guo_mu_subset(const std::vector<LabelRecord>& records, std::uint64_t seed,
                       SubsetOptions options) {
    const int size =
        options.set_size > 0 ? options.set_size : default_subset_size(records.size());
    if (size <= 0) throw SizingError("roster too small to form any subsets");
    const int females = static_cast<int>(std::llround(size / 4.0));
    const int males = size - females;

    // 0 = unassigned (ends up in S3), 1 = S1, 2 = S2.
    std::vector<int> assignment(records.size(), 0);

    if (!options.subject_disjoint) {
        std::vector<std::size_t> male_idx, female_idx;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (!eligible(records[i])) continue;
            (records[i].gender == Gender::Male ? male_idx : female_idx).push_back(i);
        }
        if (male_idx.size() < 2 * static_cast<std::size_t>(males)) {
            shortfall("black/white male", male_idx.size(), 2 * static_cast<std::size_t>(males));
        }
        if (female_idx.size() < 2 * static_cast<std::size_t>(females)) {
            shortfall("black/white female", female_idx.size(),
                      2 * static_cast<std::size_t>(females));
        }
        Rng male_rng(Rng::mix(seed, 1));
        Rng female_rng(Rng::mix(seed, 2));
        male_rng.shuffle(male_idx);
        female_rng.shuffle(female_idx);
        for (int k = 0; k < males; ++k) assignment[male_idx[k]] = 1;
        for (int k = 0; k < males; ++k) assignment[male_idx[males + k]] = 2;
        for (int k = 0; k < females; ++k) assignment[female_idx[k]] = 1;
        for (int k = 0; k < females; ++k) assignment[female_idx[females + k]] = 2;
    } else {
        // Whole subjects only. A subject qualifies when every one of its
        // records is black/white; quotas are filled subject by subject in
        // seeded random order.
        struct SubjectInfo {
            std::vector<std::size_t> rows;
            int m = 0, f = 0;
            bool all_eligible = true;
        };
        std::map<std::string, SubjectInfo> subjects;
        for (std::size_t i = 0; i < records.size(); ++i) {
            SubjectInfo& s = subjects[records[i].subject_id];
            s.rows.push_back(i);
            if (!eligible(records[i])) {
                s.all_eligible = false;
            } else {
                ++(records[i].gender == Gender::Male ? s.m : s.f);
            }
        }
        std::vector<const SubjectInfo*> pool;
        for (const auto& [id, info] : subjects) {
            if (info.all_eligible && info.m + info.f > 0) pool.push_back(&info);
        }
        Rng rng(Rng::mix(seed, 3));
        rng.shuffle(pool);

        int need_m1 = males, need_f1 = females, need_m2 = males, need_f2 = females;
        for (const SubjectInfo* s : pool) {
            if (s->m <= need_m1 && s->f <= need_f1) {
                for (std::size_t i : s->rows) assignment[i] = 1;
                need_m1 -= s->m;
                need_f1 -= s->f;
            } else if (s->m <= need_m2 && s->f <= need_f2) {
                for (std::size_t i : s->rows) assignment[i] = 2;
                need_m2 -= s->m;
                need_f2 -= s->f;
            }
            if (need_m1 == 0 && need_f1 == 0 && need_m2 == 0 && need_f2 == 0) break;
        }
        if (need_m1 > 0 || need_m2 > 0) {
            shortfall("male (whole-subject)", static_cast<std::size_t>(2 * males - need_m1 - need_m2),
                      static_cast<std::size_t>(2 * males));
        }
        if (need_f1 > 0 || need_f2 > 0) {
            shortfall("female (whole-subject)",
                      static_cast<std::size_t>(2 * females - need_f1 - need_f2),
                      static_cast<std::size_t>(2 * females));
        }
    }

    SplitSet out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (assignment[i] == 1 ? out.s1 : assignment[i] == 2 ? out.s2 : out.s3)
            .push_back(records[i]);
    }
    return out;
}

} // namespace agelab
