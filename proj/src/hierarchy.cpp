#include "agelab/hierarchy.hpp"

#include <cmath>
#include <vector>

#include "agelab/parallel.hpp"

namespace agelab {

using nn::Model;
using nn::RunMode;
using nn::Tensor;
using nn::Workspace;

void validate_hierarchy(const HierarchyModel& h) {
    if (h.gender.config().head != nn::Head::Gender) {
        throw ConfigError("hierarchy gender model must carry the 2-way gender head");
    }
    if (h.male_age.config().head != nn::Head::Age ||
        h.female_age.config().head != nn::Head::Age) {
        throw ConfigError("hierarchy age models must carry the 81-way age head");
    }
}

namespace {

double decode_age(const Tensor& out, AgeDecoder decoder) {
    AgeDistribution dist(out.numel());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = out[i];
    if (decoder == AgeDecoder::Argmax) return static_cast<double>(decode_argmax(dist));
    return decode_expected_value(dist);
}

} // namespace

HierPrediction predict_age_hierarchical(const HierarchyModel& h, const Tensor& image,
                                        AgeDecoder decoder, const StandardizationStats& stats) {
    Workspace<float> ws;
    const Tensor gender_out = h.gender.forward(
        prepare_input(image, h.gender.config().input_shape, stats), ws, RunMode::Inference);
    HierPrediction pred;
    pred.routed = gender_out[0] >= gender_out[1] ? Gender::Male : Gender::Female;
    const Model<float>& age_model = pred.routed == Gender::Male ? h.male_age : h.female_age;
    const Tensor age_out = age_model.forward(
        prepare_input(image, age_model.config().input_shape, stats), ws, RunMode::Inference);
    pred.age = decode_age(age_out, decoder);
    return pred;
}

HierarchyMetrics evaluate_hierarchy(const HierarchyModel& h, const Dataset& test,
                                    AgeDecoder decoder, const StandardizationStats& stats) {
    if (test.empty()) throw ConfigError("evaluation needs a non-empty test set");
    validate_hierarchy(h);
    std::vector<char> routed_right(test.size());
    std::vector<double> error(test.size());
    parallel_for(test.size(), [&](std::size_t i) {
        const HierPrediction pred = predict_age_hierarchical(h, test.images[i], decoder, stats);
        routed_right[i] = pred.routed == test.labels[i].gender ? 1 : 0;
        error[i] = std::abs(pred.age - static_cast<double>(test.labels[i].age));
    });
    HierarchyMetrics m;
    for (std::size_t i = 0; i < test.size(); ++i) {
        m.routing_accuracy += routed_right[i];
        m.mae += error[i];
    }
    m.routing_accuracy /= static_cast<double>(test.size());
    m.mae /= static_cast<double>(test.size());
    return m;
}

} // namespace agelab
