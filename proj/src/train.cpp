#include "agelab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "agelab/adadelta.hpp"
#include "agelab/augment.hpp"
#include "agelab/image.hpp"
#include "agelab/parallel.hpp"
#include "agelab/rng.hpp"

namespace agelab {

using nn::LayerGrads;
using nn::LayerKind;
using nn::LossKind;
using nn::Model;
using nn::RunMode;
using nn::Tensor;
using nn::Workspace;

namespace {

// Stream tags keep the validation draw, epoch shuffles and dropout masks on
// unrelated deterministic sequences.
constexpr std::uint64_t kValDrawStream = 0x56;
constexpr std::uint64_t kShuffleStream = 0x45;
constexpr std::uint64_t kDropoutStream = 0x44;

LossKind resolve_loss_kind(nn::Head head, const TrainConfig& cfg) {
    if (head == nn::Head::Gender) return cfg.gender_loss;
    return cfg.age_loss == AgeLossKind::DistributionMae ? LossKind::MeanAbsoluteError
                                                        : LossKind::CategoricalCrossEntropy;
}

// A dropout override rebuilds the model around edited layer configs so the
// stored architecture and the runtime rates can never disagree.
Model<float> with_dropout_rate(const Model<float>& model, double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ConfigError("dropout override must be in [0,1), got " + std::to_string(rate));
    }
    nn::ModelConfig cfg = model.config();
    bool changed = false;
    for (nn::LayerConfig& lc : cfg.layers) {
        if (lc.kind == LayerKind::Dropout && lc.rate != static_cast<float>(rate)) {
            lc.rate = static_cast<float>(rate);
            changed = true;
        }
    }
    if (!changed) return model;
    Model<float> out = Model<float>::build(cfg);
    for (std::size_t li = 0; li < out.layers().size(); ++li) {
        const nn::Layer<float>& src = model.layers()[li];
        nn::Layer<float>& dst = out.layers()[li];
        dst.weights = src.weights;
        dst.bias = src.bias;
        dst.frozen = src.frozen;
        dst.initialized = src.initialized;
    }
    return out;
}

StandardizationStats resolve_stats(const Dataset& train_set, InputMode mode) {
    switch (mode) {
        case InputMode::Raw:
            return {0.0, 1.0};
        case InputMode::ZeroCenter: {
            const StandardizationStats full = compute_standardization_stats(train_set.images);
            return {full.mean, 1.0};
        }
        case InputMode::Standardize:
            return compute_standardization_stats(train_set.images);
    }
    return {0.0, 1.0};
}

double decode_age_output(const Tensor& output, AgeDecoder decoder) {
    AgeDistribution dist(output.numel());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = output[i];
    if (decoder == AgeDecoder::Argmax) return static_cast<double>(decode_argmax(dist));
    return decode_expected_value(dist);
}

void check_disjoint(const Dataset& train_set, const Dataset& val_source) {
    std::unordered_set<std::string> train_paths;
    train_paths.reserve(train_set.labels.size());
    for (const LabelRecord& r : train_set.labels) train_paths.insert(r.image_path);
    for (const LabelRecord& r : val_source.labels) {
        if (train_paths.count(r.image_path)) {
            throw ConfigError("validation source shares image '" + r.image_path +
                              "' with the training set");
        }
    }
}

} // namespace

const char* input_mode_name(InputMode m) {
    switch (m) {
        case InputMode::Standardize: return "standardize";
        case InputMode::ZeroCenter: return "zero_center";
        case InputMode::Raw: return "raw";
    }
    return "?";
}

const char* age_encoding_name(AgeEncodingKind k) {
    return k == AgeEncodingKind::OneHot ? "one_hot" : "ldae";
}

const char* age_loss_name(AgeLossKind k) {
    return k == AgeLossKind::DistributionMae ? "distribution_mae" : "cross_entropy";
}

const char* age_decoder_name(AgeDecoder d) {
    return d == AgeDecoder::Argmax ? "argmax" : "expected_value";
}

double age_distribution_loss(const AgeDistribution& pred, const AgeDistribution& target,
                             AgeLossKind kind) {
    if (pred.size() != static_cast<std::size_t>(kAgeBins) ||
        target.size() != static_cast<std::size_t>(kAgeBins)) {
        throw ShapeError("age distributions must both have " + std::to_string(kAgeBins) +
                         " entries, got " + std::to_string(pred.size()) + " and " +
                         std::to_string(target.size()));
    }
    Tensor p({static_cast<int>(pred.size())}), t({static_cast<int>(target.size())});
    std::copy(pred.begin(), pred.end(), p.ptr());
    std::copy(target.begin(), target.end(), t.ptr());
    return loss_value(p, t, kind == AgeLossKind::DistributionMae
                                ? LossKind::MeanAbsoluteError
                                : LossKind::CategoricalCrossEntropy);
}

Tensor make_target(const LabelRecord& label, nn::Head head, const TrainConfig& cfg) {
    if (head == nn::Head::Gender) {
        Tensor t({2});
        t[label.gender == Gender::Male ? 0 : 1] = 1.0f;
        return t;
    }
    if (head == nn::Head::Age) {
        const AgeDistribution dist = cfg.encoding == AgeEncodingKind::OneHot
                                         ? one_hot_encode(label.age)
                                         : ldae_encode(label.age, cfg.alpha);
        Tensor t({static_cast<int>(dist.size())});
        std::copy(dist.begin(), dist.end(), t.ptr());
        return t;
    }
    throw ConfigError("training needs a gender or age head");
}

Tensor prepare_input(const Tensor& image, const std::vector<int>& input_shape,
                     const StandardizationStats& stats) {
    if (image.shape.size() != 3 || input_shape.size() != 3) {
        throw ShapeError("expected [C,H,W] image and input shape, got " +
                         nn::shape_to_string(image.shape) + " and " +
                         nn::shape_to_string(input_shape));
    }
    if (image.shape[0] != input_shape[0]) {
        throw ShapeError("image has " + std::to_string(image.shape[0]) +
                         " channel(s), model wants " + std::to_string(input_shape[0]));
    }
    Tensor out = image.shape == input_shape
                     ? image
                     : resize_bilinear(image, input_shape[1], input_shape[2]);
    standardize(out, stats);
    return out;
}

TrainResult train(Model<float> model, const Dataset& train_set, const Dataset& val_source,
                  const TrainConfig& cfg) {
    const nn::Head head = model.config().head;
    if (head == nn::Head::None) throw ConfigError("training needs a gender or age head");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.serial_splits < 1) throw ConfigError("serial_splits must be >= 1");
    if (train_set.empty()) throw ConfigError("training set is empty");
    if (cfg.val_sample_size < 1) throw ConfigError("val_sample_size must be >= 1");
    if (static_cast<std::size_t>(cfg.val_sample_size) > val_source.size()) {
        throw ConfigError("val_sample_size " + std::to_string(cfg.val_sample_size) +
                          " exceeds the validation source (" + std::to_string(val_source.size()) +
                          " samples)");
    }
    check_disjoint(train_set, val_source);

    if (cfg.dropout_override >= 0.0) model = with_dropout_rate(model, cfg.dropout_override);
    const std::vector<int>& input_shape = model.config().input_shape;
    if (cfg.augment) {
        if (cfg.crop_w < 1 || cfg.crop_h < 1) {
            throw ConfigError("augmentation needs positive crop dimensions");
        }
        const std::vector<int> want = {input_shape[0], cfg.crop_h, cfg.crop_w};
        if (input_shape != want) {
            throw ConfigError("augmented training feeds " + nn::shape_to_string(want) +
                              " crops, but the model takes " + nn::shape_to_string(input_shape));
        }
    }

    // Input statistics come from the raw training images, before any crops.
    const StandardizationStats stats = resolve_stats(train_set, cfg.input_mode);

    // Training pool: prepared inputs and targets, 12 entries per image when
    // augmenting, sharing the source image's target.
    std::vector<Tensor> pool, targets;
    pool.reserve(train_set.size() * (cfg.augment ? 12 : 1));
    targets.reserve(pool.capacity());
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        const Tensor target = make_target(train_set.labels[i], head, cfg);
        if (cfg.augment) {
            for (Tensor& view : twelve_crop(train_set.images[i], cfg.crop_w, cfg.crop_h)) {
                standardize(view, stats);
                pool.push_back(std::move(view));
                targets.push_back(target);
            }
        } else {
            pool.push_back(prepare_input(train_set.images[i], input_shape, stats));
            targets.push_back(target);
        }
    }
    if (static_cast<std::size_t>(cfg.serial_splits) > pool.size()) {
        throw ConfigError("cannot cut " + std::to_string(pool.size()) + " training samples into " +
                          std::to_string(cfg.serial_splits) + " serial chunks");
    }

    // The validation sample: drawn once, prepared once.
    const std::size_t val_n = static_cast<std::size_t>(cfg.val_sample_size);
    std::vector<std::size_t> val_pick(val_source.size());
    std::iota(val_pick.begin(), val_pick.end(), std::size_t{0});
    {
        Rng val_rng(Rng::mix(cfg.seed, kValDrawStream));
        for (std::size_t i = 0; i < val_n; ++i) {
            const std::size_t j = i + val_rng.below(static_cast<std::uint32_t>(val_pick.size() - i));
            std::swap(val_pick[i], val_pick[j]);
        }
        val_pick.resize(val_n);
    }
    std::vector<Tensor> val_images(val_n), val_targets(val_n);
    std::vector<int> val_ages(val_n);
    std::vector<Gender> val_genders(val_n);
    for (std::size_t i = 0; i < val_n; ++i) {
        const std::size_t src = val_pick[i];
        val_images[i] = prepare_input(val_source.images[src], input_shape, stats);
        val_targets[i] = make_target(val_source.labels[src], head, cfg);
        val_ages[i] = val_source.labels[src].age;
        val_genders[i] = val_source.labels[src].gender;
    }

    const LossKind loss_kind = resolve_loss_kind(head, cfg);
    nn::Adadelta<float> optimizer(model);
    Rng dropout_rng(Rng::mix(cfg.seed, kDropoutStream));
    Workspace<float> ws;

    std::vector<LayerGrads<float>> accum(model.layers().size());
    for (std::size_t li = 0; li < model.layers().size(); ++li) {
        const nn::Layer<float>& l = model.layers()[li];
        if (!nn::layer_has_weights(l.cfg.kind)) continue;
        accum[li].w = Tensor::zeros_like(l.weights);
        accum[li].b = Tensor::zeros_like(l.bias);
    }

    TrainResult result{model, model, {}, stats};
    double best_val_loss = std::numeric_limits<double>::infinity();
    int global_epoch = 0;

    for (int chunk = 0; chunk < cfg.serial_splits; ++chunk) {
        const std::size_t begin = pool.size() * static_cast<std::size_t>(chunk) /
                                  static_cast<std::size_t>(cfg.serial_splits);
        const std::size_t end = pool.size() * static_cast<std::size_t>(chunk + 1) /
                                static_cast<std::size_t>(cfg.serial_splits);
        std::vector<std::size_t> order(end - begin);
        std::iota(order.begin(), order.end(), begin);

        for (int e = 0; e < cfg.epochs; ++e) {
            ++global_epoch;
            const auto started = std::chrono::steady_clock::now();
            Rng shuffle_rng(Rng::mix(Rng::mix(cfg.seed, kShuffleStream),
                                     static_cast<std::uint64_t>(global_epoch)));
            shuffle_rng.shuffle(order);

            double epoch_loss = 0.0;
            for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
                const std::size_t bn =
                    std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - b);
                for (std::size_t li = 0; li < accum.size(); ++li) {
                    accum[li].w.fill(0.0f);
                    accum[li].b.fill(0.0f);
                }
                double batch_loss = 0.0;
                for (std::size_t k = 0; k < bn; ++k) {
                    const std::size_t s = order[b + k];
                    const Tensor out = model.forward(pool[s], ws, RunMode::Training, &dropout_rng);
                    batch_loss += loss_value(out, targets[s], loss_kind);
                    model.backward(loss_grad(out, targets[s], loss_kind), ws);
                    for (std::size_t li = 0; li < accum.size(); ++li) {
                        if (accum[li].w.numel() == 0 || model.layers()[li].frozen) continue;
                        for (std::size_t i = 0; i < accum[li].w.numel(); ++i) {
                            accum[li].w[i] += ws.grads[li].w[i];
                        }
                        for (std::size_t i = 0; i < accum[li].b.numel(); ++i) {
                            accum[li].b[i] += ws.grads[li].b[i];
                        }
                    }
                }
                batch_loss /= static_cast<double>(bn);
                if (!std::isfinite(batch_loss)) {
                    throw StateError("non-finite training loss " + std::to_string(batch_loss) +
                                     " at epoch " + std::to_string(global_epoch) + ", batch " +
                                     std::to_string(b / static_cast<std::size_t>(cfg.batch_size)));
                }
                const float inv = 1.0f / static_cast<float>(bn);
                for (std::size_t li = 0; li < accum.size(); ++li) {
                    if (accum[li].w.numel() == 0) continue;
                    for (std::size_t i = 0; i < accum[li].w.numel(); ++i) accum[li].w[i] *= inv;
                    for (std::size_t i = 0; i < accum[li].b.numel(); ++i) accum[li].b[i] *= inv;
                }
                optimizer.step(model, accum);
                epoch_loss += batch_loss * static_cast<double>(bn);
            }

            double val_loss = 0.0;
            double metric_sum = 0.0;
            for (std::size_t i = 0; i < val_n; ++i) {
                const Tensor out = model.forward(val_images[i], ws, RunMode::Inference);
                val_loss += loss_value(out, val_targets[i], loss_kind);
                if (head == nn::Head::Gender) {
                    const bool said_male = out[0] >= out[1];
                    metric_sum += said_male == (val_genders[i] == Gender::Male) ? 1.0 : 0.0;
                } else {
                    metric_sum += std::abs(decode_age_output(out, cfg.decoder) -
                                           static_cast<double>(val_ages[i]));
                }
            }
            val_loss /= static_cast<double>(val_n);
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

            result.log.epochs.push_back({global_epoch, epoch_loss / static_cast<double>(order.size()),
                                         val_loss, metric_sum / static_cast<double>(val_n), seconds});
            if (val_loss < best_val_loss) {
                best_val_loss = val_loss;
                result.best = model;
                result.log.best_epoch = global_epoch;
            }
        }
    }

    result.final = std::move(model);
    return result;
}

double evaluate_gender(const Model<float>& model, const Dataset& test,
                       const StandardizationStats& stats) {
    if (test.empty()) throw ConfigError("evaluation needs a non-empty test set");
    const std::vector<int>& input_shape = model.config().input_shape;
    std::vector<char> correct(test.size());
    parallel_for(test.size(), [&](std::size_t i) {
        Workspace<float> ws;
        const Tensor out =
            model.forward(prepare_input(test.images[i], input_shape, stats), ws, RunMode::Inference);
        const bool said_male = out[0] >= out[1];
        correct[i] = said_male == (test.labels[i].gender == Gender::Male) ? 1 : 0;
    });
    double hits = 0.0;
    for (char c : correct) hits += c;
    return hits / static_cast<double>(test.size());
}

double evaluate_age(const Model<float>& model, const Dataset& test, AgeDecoder decoder,
                    const StandardizationStats& stats) {
    if (test.empty()) throw ConfigError("evaluation needs a non-empty test set");
    const std::vector<int>& input_shape = model.config().input_shape;
    std::vector<double> error(test.size());
    parallel_for(test.size(), [&](std::size_t i) {
        Workspace<float> ws;
        const Tensor out =
            model.forward(prepare_input(test.images[i], input_shape, stats), ws, RunMode::Inference);
        error[i] =
            std::abs(decode_age_output(out, decoder) - static_cast<double>(test.labels[i].age));
    });
    double sum = 0.0;
    for (double e : error) sum += e;
    return sum / static_cast<double>(test.size());
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open train log for writing: " + path.string());
    out << "epoch,train_loss,val_loss,val_metric,seconds\n";
    char line[200];
    for (const EpochLog& e : log.epochs) {
        std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.3f\n", e.epoch, e.train_loss,
                      e.val_loss, e.val_metric, e.seconds);
        out << line;
    }
    out << "# best_epoch " << log.best_epoch << '\n';
    if (!out) throw FormatError("failed writing train log: " + path.string());
}

} // namespace agelab
