#include "agelab/sweep.hpp"

#include <cstdio>
#include <exception>
#include <fstream>

#include "agelab/model_build.hpp"
#include "agelab/parallel.hpp"
#include "agelab/parse_util.hpp"

namespace agelab {

using nn::Model;

namespace {

// The dropout rate a dense-size sweep should rebuild the top with: an active
// override wins, else the first configured dropout layer, else none.
float top_dropout_rate(const ExperimentSetup& base) {
    if (base.config.dropout_override >= 0.0) return static_cast<float>(base.config.dropout_override);
    for (const nn::LayerConfig& lc : base.model.layers) {
        if (lc.kind == nn::LayerKind::Dropout) return lc.rate;
    }
    return 0.0f;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

} // namespace

const char* sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Epochs: return "epochs";
        case SweepAxis::Dropout: return "dropout";
        case SweepAxis::DenseSizes: return "dense_sizes";
        case SweepAxis::AlphaSchedule: return "alpha_schedule";
        case SweepAxis::Encoding: return "encoding";
    }
    return "?";
}

SweepAxis parse_sweep_axis(const std::string& name) {
    for (SweepAxis axis : {SweepAxis::Epochs, SweepAxis::Dropout, SweepAxis::DenseSizes,
                           SweepAxis::AlphaSchedule, SweepAxis::Encoding}) {
        if (name == sweep_axis_name(axis)) return axis;
    }
    throw ConfigError("unknown sweep axis '" + name + "'");
}

ExperimentSetup apply_sweep_value(SweepAxis axis, const std::string& value,
                                  const ExperimentSetup& base) {
    ExperimentSetup out = base;
    switch (axis) {
        case SweepAxis::Epochs: {
            const int epochs = parse_strict_int(value);
            if (epochs < 1) throw ConfigError("epochs value must be >= 1, got '" + value + "'");
            out.config.epochs = epochs;
            break;
        }
        case SweepAxis::Dropout: {
            const double rate = parse_strict_double(value);
            if (!(rate >= 0.0 && rate < 1.0)) {
                throw ConfigError("dropout value must be in [0,1), got '" + value + "'");
            }
            out.config.dropout_override = rate;
            break;
        }
        case SweepAxis::DenseSizes: {
            std::vector<int> sizes;
            for (const std::string& part : split_on(value, ',')) {
                sizes.push_back(parse_strict_int(part));
            }
            out.model = nn::replace_top_config(base.model, sizes, top_dropout_rate(base),
                                               base.model.head);
            break;
        }
        case SweepAxis::AlphaSchedule:
            out.config.alpha = parse_alpha_schedule(value);
            out.config.encoding = AgeEncodingKind::Ldae;
            break;
        case SweepAxis::Encoding:
            if (value == "one-hot") {
                out.config.encoding = AgeEncodingKind::OneHot;
            } else {
                out.config.alpha = parse_alpha_schedule(value);
                out.config.encoding = AgeEncodingKind::Ldae;
            }
            break;
    }
    return out;
}

std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<std::string>& values,
                            const ExperimentSetup& base) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (!base.train || !base.val || !base.test) {
        throw ConfigError("sweep setup must reference train, validation and test sets");
    }
    std::vector<SweepRow> rows(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        SweepRow row;
        row.value = values[i];
        try {
            const ExperimentSetup setup = apply_sweep_value(axis, values[i], base);
            Model<float> model = Model<float>::build(setup.model);
            model.init_random(setup.config.seed);
            const TrainResult result = train(std::move(model), *setup.train, *setup.val, setup.config);
            if (setup.model.head == nn::Head::Gender) {
                row.best_metric = evaluate_gender(result.best, *setup.test, result.stats);
                row.final_metric = evaluate_gender(result.final, *setup.test, result.stats);
            } else {
                row.best_metric =
                    evaluate_age(result.best, *setup.test, setup.config.decoder, result.stats);
                row.final_metric =
                    evaluate_age(result.final, *setup.test, setup.config.decoder, result.stats);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows[i] = std::move(row);
    });
    return rows;
}

void save_sweep_table(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open sweep table for writing: " + path.string());
    out << "value,best,final,error\n";
    char buf[64];
    for (const SweepRow& row : rows) {
        out << csv_quote(row.value) << ',';
        if (row.failed()) {
            out << ",," << csv_quote(row.error) << '\n';
        } else {
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g,\n", row.best_metric, row.final_metric);
            out << buf;
        }
    }
    if (!out) throw FormatError("failed writing sweep table: " + path.string());
}

} // namespace agelab
