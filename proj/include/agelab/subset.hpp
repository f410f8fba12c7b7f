#pragma once

#include <cstdint>
#include <vector>

#include "agelab/labels.hpp"

namespace agelab {

struct SplitSet {
    std::vector<LabelRecord> s1, s2, s3;
};

struct SubsetOptions {
    // Target size of S1 and S2. Non-positive means proportional: the fraction
    // of the roster that makes a full-size roster yield sets of 10,280.
    int set_size = 0;
    // When true, no subject may span two sets; quotas are filled by whole
    // subjects, which can fail on rosters with large per-subject image counts.
    bool subject_disjoint = false;
};

// Splits a roster into S1/S2 of equal size, black/white records only with a
// 3:1 male:female count ratio, sampled uniformly without replacement under
// the seed; S3 takes everything else. Deterministic per (roster, seed).
SplitSet guo_mu_subset(const std::vector<LabelRecord>& records, std::uint64_t seed,
                       SubsetOptions options = {});

// The S1/S2 size used for a roster of the given size when none is configured.
int default_subset_size(std::size_t roster_size);

} // namespace agelab
