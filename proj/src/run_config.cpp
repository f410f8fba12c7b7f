#include "agelab/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace agelab {

using nlohmann::json;

namespace {

// Section-by-section reader that records every key it is asked for and
// afterwards refuses any it was not: the unknown-key guarantee.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(where("") + " must be a JSON object");
    }

    ~Section() = default;

    void finish() const {
        for (const auto& item : obj_.items()) {
            if (known_.count(item.key()) == 0) {
                throw ConfigError("unknown config key '" + join(item.key()) + "'");
            }
        }
    }

    bool has(const char* key) {
        known_.insert(key);
        return obj_.contains(key);
    }

    const json& at(const char* key) { return obj_.at(key); }

    int geti(const char* key, int def) {
        if (!has(key)) return def;
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
        return v.get<int>();
    }

    std::uint64_t getu64(const char* key, std::uint64_t def) {
        if (!has(key)) return def;
        const json& v = obj_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
        throw ConfigError(where(key) + " must be a non-negative integer");
    }

    double getd(const char* key, double def) {
        if (!has(key)) return def;
        const json& v = obj_.at(key);
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
        return v.get<double>();
    }

    float getf(const char* key, float def) {
        return static_cast<float>(getd(key, static_cast<double>(def)));
    }

    bool getb(const char* key, bool def) {
        if (!has(key)) return def;
        const json& v = obj_.at(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + " must be a boolean");
        return v.get<bool>();
    }

    std::string gets(const char* key, const std::string& def) {
        if (!has(key)) return def;
        const json& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
        return v.get<std::string>();
    }

    std::vector<int> get_ints(const char* key, std::vector<int> def) {
        if (!has(key)) return def;
        const json& v = obj_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + " must be an array of integers");
        std::vector<int> out;
        for (const json& item : v) {
            if (!item.is_number_integer()) {
                throw ConfigError(where(key) + " must be an array of integers");
            }
            out.push_back(item.get<int>());
        }
        return out;
    }

    std::vector<std::string> get_strings(const char* key, std::vector<std::string> def) {
        if (!has(key)) return def;
        const json& v = obj_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + " must be an array of strings");
        std::vector<std::string> out;
        for (const json& item : v) {
            if (!item.is_string()) {
                throw ConfigError(where(key) + " must be an array of strings");
            }
            out.push_back(item.get<std::string>());
        }
        return out;
    }

    // Sub-object access; absent sections fall back to an empty object.
    json child(const char* key) {
        if (!has(key)) return json::object();
        const json& v = obj_.at(key);
        if (!v.is_object()) throw ConfigError(where(key) + " must be a JSON object");
        return v;
    }

    std::string where(const char* key) const {
        return key[0] == '\0' ? (path_.empty() ? std::string("config") : "'" + path_ + "'")
                              : "'" + join(key) + "'";
    }

private:
    std::string join(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> known_;
};

template <class E>
E parse_named(const std::string& text, const std::string& where,
              std::initializer_list<E> all, const char* (*name)(E)) {
    for (E e : all) {
        if (text == name(e)) return e;
    }
    std::string choices;
    for (E e : all) {
        if (!choices.empty()) choices += ", ";
        choices += name(e);
    }
    throw ConfigError(where + ": unknown value '" + text + "' (want one of: " + choices + ")");
}

std::vector<nn::Stack> parse_stacks(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array of [filters, convs] pairs");
    std::vector<nn::Stack> stacks;
    for (const json& item : v) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
            !item[1].is_number_integer()) {
            throw ConfigError(where + " entries must be [filters, convs] integer pairs");
        }
        stacks.push_back({item[0].get<int>(), item[1].get<int>()});
    }
    return stacks;
}

void read_synth(const json& obj, SyntheticSpec& spec) {
    Section s(obj, "synth");
    spec.width = s.geti("width", spec.width);
    spec.height = s.geti("height", spec.height);
    spec.count = s.geti("count", spec.count);
    spec.age_lo = s.geti("age_lo", spec.age_lo);
    spec.age_hi = s.geti("age_hi", spec.age_hi);
    spec.male_fraction = s.getd("male_fraction", spec.male_fraction);
    spec.noise = s.getd("noise", spec.noise);
    spec.table1_profile = s.getb("table1_profile", spec.table1_profile);
    spec.brightness_delta = s.getd("brightness_delta", spec.brightness_delta);
    spec.disc_scale = s.getd("disc_scale", spec.disc_scale);
    s.finish();
}

void read_data(const json& obj, RunConfig::Data& data) {
    Section s(obj, "data");
    data.manifest = s.gets("manifest", data.manifest);
    data.overrides = s.gets("overrides", data.overrides);
    data.train_manifest = s.gets("train_manifest", data.train_manifest);
    data.val_manifest = s.gets("val_manifest", data.val_manifest);
    data.test_manifest = s.gets("test_manifest", data.test_manifest);
    data.work_width = s.geti("work_width", data.work_width);
    data.work_height = s.geti("work_height", data.work_height);
    data.age_lo = s.geti("age_lo", data.age_lo);
    data.age_hi = s.geti("age_hi", data.age_hi);
    s.finish();
}

void read_subset(const json& obj, RunConfig::Subset& subset) {
    Section s(obj, "subset");
    subset.size = s.geti("size", subset.size);
    subset.whole_subject = s.getb("whole_subject", subset.whole_subject);
    s.finish();
}

void read_model(const json& obj, RunConfig::ModelSpec& model) {
    Section s(obj, "model");
    model.input = s.get_ints("input", model.input);
    if (s.has("stacks")) model.stacks = parse_stacks(s.at("stacks"), "'model.stacks'");
    model.dense = s.get_ints("dense", model.dense);
    model.dropout = s.getf("dropout", model.dropout);
    if (s.has("head")) {
        model.head = parse_named<nn::Head>(s.gets("head", ""), "'model.head'",
                                           {nn::Head::Gender, nn::Head::Age}, nn::head_name);
    }
    s.finish();
}

void read_train(const json& obj, TrainConfig& train, RunConfig::Surgery& surgery) {
    Section s(obj, "train");
    train.batch_size = s.geti("batch_size", train.batch_size);
    train.epochs = s.geti("epochs", train.epochs);
    train.serial_splits = s.geti("serial_splits", train.serial_splits);
    train.val_sample_size = s.geti("val_sample_size", train.val_sample_size);
    if (s.has("gender_loss")) {
        train.gender_loss = parse_named<nn::LossKind>(
            s.gets("gender_loss", ""), "'train.gender_loss'",
            {nn::LossKind::BinaryCrossEntropy, nn::LossKind::MeanAbsoluteError,
             nn::LossKind::CategoricalCrossEntropy},
            nn::loss_kind_name);
    }
    if (s.has("age_loss")) {
        train.age_loss = parse_named<AgeLossKind>(
            s.gets("age_loss", ""), "'train.age_loss'",
            {AgeLossKind::DistributionMae, AgeLossKind::CrossEntropy}, age_loss_name);
    }
    if (s.has("encoding")) {
        train.encoding =
            parse_named<AgeEncodingKind>(s.gets("encoding", ""), "'train.encoding'",
                                         {AgeEncodingKind::OneHot, AgeEncodingKind::Ldae},
                                         age_encoding_name);
    }
    if (s.has("alpha")) train.alpha = parse_alpha_schedule(s.gets("alpha", ""));
    if (s.has("decoder")) {
        train.decoder = parse_named<AgeDecoder>(s.gets("decoder", ""), "'train.decoder'",
                                                {AgeDecoder::Argmax, AgeDecoder::ExpectedValue},
                                                age_decoder_name);
    }
    if (s.has("input_mode")) {
        train.input_mode = parse_named<InputMode>(
            s.gets("input_mode", ""), "'train.input_mode'",
            {InputMode::Standardize, InputMode::ZeroCenter, InputMode::Raw}, input_mode_name);
    }
    train.dropout_override = s.getd("dropout_override", train.dropout_override);
    train.augment = s.getb("augment", train.augment);
    train.crop_w = s.geti("crop_width", train.crop_w);
    train.crop_h = s.geti("crop_height", train.crop_h);
    surgery.init = s.gets("init", surgery.init);
    surgery.replace_top = s.getb("replace_top", surgery.replace_top);
    surgery.freeze_backbone = s.getb("freeze_backbone", surgery.freeze_backbone);
    s.finish();
}

void read_eval(const json& obj, RunConfig::Eval& eval) {
    Section s(obj, "eval");
    eval.checkpoint = s.gets("checkpoint", eval.checkpoint);
    eval.stats = s.gets("stats", eval.stats);
    s.finish();
}

void read_hier(const json& obj, RunConfig::Hier& hier) {
    Section s(obj, "hier");
    hier.gender_checkpoint = s.gets("gender_checkpoint", hier.gender_checkpoint);
    hier.male_checkpoint = s.gets("male_checkpoint", hier.male_checkpoint);
    hier.female_checkpoint = s.gets("female_checkpoint", hier.female_checkpoint);
    hier.single_checkpoint = s.gets("single_checkpoint", hier.single_checkpoint);
    hier.stats = s.gets("stats", hier.stats);
    if (s.has("decoder")) {
        hier.decoder = parse_named<AgeDecoder>(s.gets("decoder", ""), "'hier.decoder'",
                                               {AgeDecoder::Argmax, AgeDecoder::ExpectedValue},
                                               age_decoder_name);
    }
    s.finish();
}

void read_encode(const json& obj, RunConfig::Encode& encode) {
    Section s(obj, "encode");
    encode.age = s.geti("age", encode.age);
    if (s.has("encoding")) {
        encode.encoding =
            parse_named<AgeEncodingKind>(s.gets("encoding", ""), "'encode.encoding'",
                                         {AgeEncodingKind::OneHot, AgeEncodingKind::Ldae},
                                         age_encoding_name);
    }
    if (s.has("alpha")) encode.alpha = parse_alpha_schedule(s.gets("alpha", ""));
    s.finish();
}

void read_augment(const json& obj, RunConfig::Augment& augment) {
    Section s(obj, "augment");
    augment.crop_width = s.geti("crop_width", augment.crop_width);
    augment.crop_height = s.geti("crop_height", augment.crop_height);
    s.finish();
}

void read_sweep(const json& obj, RunConfig::Sweep& sweep) {
    Section s(obj, "sweep");
    if (s.has("axis")) sweep.axis = parse_sweep_axis(s.gets("axis", ""));
    sweep.values = s.get_strings("values", sweep.values);
    s.finish();
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError("config " + origin + " is not valid JSON: " + e.what());
    }

    RunConfig cfg;
    Section top(root, "");
    cfg.seed = top.getu64("seed", cfg.seed);
    cfg.out = top.gets("out", cfg.out);
    read_synth(top.child("synth"), cfg.synth);
    read_data(top.child("data"), cfg.data);
    read_subset(top.child("subset"), cfg.subset);
    read_model(top.child("model"), cfg.model);
    read_train(top.child("train"), cfg.train, cfg.surgery);
    read_eval(top.child("eval"), cfg.eval);
    read_hier(top.child("hier"), cfg.hier);
    read_encode(top.child("encode"), cfg.encode);
    read_augment(top.child("augment"), cfg.augment);
    read_sweep(top.child("sweep"), cfg.sweep);
    top.finish();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.string());
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
    json root;
    root["seed"] = cfg.seed;
    root["out"] = cfg.out;
    root["synth"] = {{"width", cfg.synth.width},
                     {"height", cfg.synth.height},
                     {"count", cfg.synth.count},
                     {"age_lo", cfg.synth.age_lo},
                     {"age_hi", cfg.synth.age_hi},
                     {"male_fraction", cfg.synth.male_fraction},
                     {"noise", cfg.synth.noise},
                     {"table1_profile", cfg.synth.table1_profile},
                     {"brightness_delta", cfg.synth.brightness_delta},
                     {"disc_scale", cfg.synth.disc_scale}};
    root["data"] = {{"manifest", cfg.data.manifest},
                    {"overrides", cfg.data.overrides},
                    {"train_manifest", cfg.data.train_manifest},
                    {"val_manifest", cfg.data.val_manifest},
                    {"test_manifest", cfg.data.test_manifest},
                    {"work_width", cfg.data.work_width},
                    {"work_height", cfg.data.work_height},
                    {"age_lo", cfg.data.age_lo},
                    {"age_hi", cfg.data.age_hi}};
    root["subset"] = {{"size", cfg.subset.size}, {"whole_subject", cfg.subset.whole_subject}};
    json stacks = json::array();
    for (const nn::Stack& st : cfg.model.stacks) stacks.push_back({st.filters, st.convs});
    root["model"] = {{"input", cfg.model.input},
                     {"stacks", stacks},
                     {"dense", cfg.model.dense},
                     {"dropout", cfg.model.dropout},
                     {"head", nn::head_name(cfg.model.head)}};
    root["train"] = {{"batch_size", cfg.train.batch_size},
                     {"epochs", cfg.train.epochs},
                     {"serial_splits", cfg.train.serial_splits},
                     {"val_sample_size", cfg.train.val_sample_size},
                     {"gender_loss", nn::loss_kind_name(cfg.train.gender_loss)},
                     {"age_loss", age_loss_name(cfg.train.age_loss)},
                     {"encoding", age_encoding_name(cfg.train.encoding)},
                     {"alpha", alpha_schedule_token(cfg.train.alpha)},
                     {"decoder", age_decoder_name(cfg.train.decoder)},
                     {"input_mode", input_mode_name(cfg.train.input_mode)},
                     {"dropout_override", cfg.train.dropout_override},
                     {"augment", cfg.train.augment},
                     {"crop_width", cfg.train.crop_w},
                     {"crop_height", cfg.train.crop_h},
                     {"init", cfg.surgery.init},
                     {"replace_top", cfg.surgery.replace_top},
                     {"freeze_backbone", cfg.surgery.freeze_backbone}};
    root["eval"] = {{"checkpoint", cfg.eval.checkpoint}, {"stats", cfg.eval.stats}};
    root["hier"] = {{"gender_checkpoint", cfg.hier.gender_checkpoint},
                    {"male_checkpoint", cfg.hier.male_checkpoint},
                    {"female_checkpoint", cfg.hier.female_checkpoint},
                    {"single_checkpoint", cfg.hier.single_checkpoint},
                    {"stats", cfg.hier.stats},
                    {"decoder", age_decoder_name(cfg.hier.decoder)}};
    root["encode"] = {{"age", cfg.encode.age},
                      {"encoding", age_encoding_name(cfg.encode.encoding)},
                      {"alpha", alpha_schedule_token(cfg.encode.alpha)}};
    root["augment"] = {{"crop_width", cfg.augment.crop_width},
                       {"crop_height", cfg.augment.crop_height}};
    root["sweep"] = {{"axis", sweep_axis_name(cfg.sweep.axis)}, {"values", cfg.sweep.values}};

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write config file: " + path.string());
    out << root.dump(2) << '\n';
    if (!out) throw FormatError("failed writing config file: " + path.string());
}

nn::ModelConfig build_model_config(const RunConfig::ModelSpec& spec) {
    nn::ModelConfig backbone = nn::build_backbone(spec.input, spec.stacks);
    return nn::replace_top_config(backbone, spec.dense, spec.dropout, spec.head);
}

} // namespace agelab
