#pragma once

#include "agelab/dataset.hpp"
#include "agelab/model.hpp"
#include "agelab/train.hpp"

namespace agelab {

// A gender classifier routing each sample to a gender-specific age model.
struct HierarchyModel {
    nn::Model<float> gender;
    nn::Model<float> male_age;
    nn::Model<float> female_age;
};

// Heads must be 2-way gender and 81-way age respectively.
void validate_hierarchy(const HierarchyModel& h);

struct HierPrediction {
    Gender routed = Gender::Male;
    double age = 0.0;
};

// Classifies gender first (argmax; ties go male), then decodes age with the
// routed model. All three models see the same raw image, each prepared for
// its own input shape.
HierPrediction predict_age_hierarchical(const HierarchyModel& h, const nn::Tensor& image,
                                        AgeDecoder decoder,
                                        const StandardizationStats& stats = {0.0, 1.0});

struct HierarchyMetrics {
    double routing_accuracy = 0.0;  // gender decisions vs true labels
    double mae = 0.0;               // against true ages, routed models
};

HierarchyMetrics evaluate_hierarchy(const HierarchyModel& h, const Dataset& test,
                                    AgeDecoder decoder,
                                    const StandardizationStats& stats = {0.0, 1.0});

} // namespace agelab
