#include "agelab/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>

#include "agelab/augment.hpp"
#include "agelab/checkpoint.hpp"
#include "agelab/dataset.hpp"
#include "agelab/hierarchy.hpp"
#include "agelab/image.hpp"
#include "agelab/labels.hpp"
#include "agelab/preprocess.hpp"
#include "agelab/subset.hpp"
#include "agelab/synth.hpp"

namespace agelab {

namespace fs = std::filesystem;

namespace {

// Staging: everything lands in <out>/failed/ first and is promoted into
// <out>/ by commit(). A run that dies leaves its partials, resolved config
// and error note under the marker directory.
class RunDir {
public:
    explicit RunDir(const RunConfig& cfg) : out_(cfg.out), stage_(out_ / "failed") {
        fs::create_directories(stage_);
        save_run_config(cfg, stage_ / "config.json");
    }

    const fs::path& dir() const { return stage_; }
    fs::path file(const std::string& name) const { return stage_ / name; }

    void commit() {
        for (const fs::directory_entry& entry : fs::directory_iterator(stage_)) {
            const fs::path target = out_ / entry.path().filename();
            fs::remove_all(target);
            fs::rename(entry.path(), target);
        }
        fs::remove(stage_);
    }

private:
    fs::path out_;
    fs::path stage_;
};

AgeWindow window_of(const RunConfig& cfg) { return {cfg.data.age_lo, cfg.data.age_hi}; }

fs::path need_path(const std::string& value, const char* key) {
    if (value.empty()) throw ConfigError(std::string("this command needs '") + key + "'");
    return value;
}

// Roster loads refuse manifests with rejected rows outright; quietly dropping
// samples would corrupt every result computed downstream.
std::vector<LabelRecord> load_roster(const fs::path& manifest, AgeWindow window) {
    LoadedLabels loaded = load_labels(manifest, window);
    if (!loaded.rejects.empty()) {
        throw FormatError(manifest.string() + " has " + std::to_string(loaded.rejects.size()) +
                          " malformed rows (first: line " +
                          std::to_string(loaded.rejects.front().line) + ", " +
                          loaded.rejects.front().reason + ")");
    }
    return loaded.records;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    for (const std::string& line : lines) out << line << '\n';
}

StandardizationStats stats_or_identity(const std::string& path) {
    if (path.empty()) return {0.0, 1.0};
    return load_stats(path);
}

void write_metrics(const fs::path& path, const std::vector<std::pair<std::string, double>>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "metric,value\n";
    char buf[64];
    for (const auto& [name, value] : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        out << name << ',' << buf << '\n';
    }
    if (!out) throw FormatError("failed writing " + path.string());
}

void cmd_synth(const RunConfig& cfg) {
    SyntheticSpec spec = cfg.synth;
    spec.seed = cfg.seed;
    RunDir run(cfg);
    write_synth_dataset(spec, run.dir());
    run.commit();
}

void cmd_clean(const RunConfig& cfg) {
    const fs::path manifest = need_path(cfg.data.manifest, "data.manifest");
    RunDir run(cfg);
    LoadedLabels loaded = load_labels(manifest, window_of(cfg));
    std::vector<Override> overrides;
    if (!cfg.data.overrides.empty()) overrides = load_overrides(cfg.data.overrides);

    InconsistencyReport report = detect_inconsistencies(loaded.records);
    CleanResult result = clean_labels(loaded.records, report, overrides);

    save_labels(result.records, run.file("cleaned.csv"));
    save_inconsistency_report(report, run.file("report.csv"));
    save_labels(result.quarantined, run.file("quarantined.csv"));
    std::vector<std::string> notes;
    for (const RejectedRow& r : loaded.rejects) {
        notes.push_back("line " + std::to_string(r.line) + ": " + r.reason);
    }
    for (const std::string& w : result.warnings) notes.push_back(w);
    write_lines(run.file("notes.txt"), notes);
    run.commit();
}

void cmd_subset(const RunConfig& cfg) {
    const fs::path manifest = need_path(cfg.data.manifest, "data.manifest");
    RunDir run(cfg);
    std::vector<LabelRecord> roster = load_roster(manifest, window_of(cfg));
    SplitSet split =
        guo_mu_subset(roster, cfg.seed, {cfg.subset.size, cfg.subset.whole_subject});
    save_labels(split.s1, run.file("s1.csv"));
    save_labels(split.s2, run.file("s2.csv"));
    save_labels(split.s3, run.file("s3.csv"));
    run.commit();
}

void cmd_stats(const RunConfig& cfg) {
    const fs::path manifest = need_path(cfg.data.manifest, "data.manifest");
    RunDir run(cfg);
    std::vector<LabelRecord> roster = load_roster(manifest, window_of(cfg));
    const fs::path root = manifest.parent_path();
    // Streamed one image at a time: a full-size roster never needs to fit in
    // memory just to produce two numbers.
    StatsAccumulator acc;
    for (const LabelRecord& rec : roster) {
        acc.add(load_image(root / rec.image_path, cfg.data.work_height, cfg.data.work_width));
    }
    save_stats(acc.finalize(), manifest.stem().string(), cfg.seed, run.file("stats.csv"));
    run.commit();
}

void cmd_encode(const RunConfig& cfg) {
    RunDir run(cfg);
    const AgeDistribution dist = cfg.encode.encoding == AgeEncodingKind::OneHot
                                     ? one_hot_encode(cfg.encode.age)
                                     : ldae_encode(cfg.encode.age, cfg.encode.alpha);
    std::ofstream out(run.file("encoding.csv"), std::ios::trunc);
    if (!out) throw FormatError("cannot write " + run.file("encoding.csv").string());
    out << "age,p\n";
    char buf[48];
    for (int i = 0; i < kAgeBins; ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g\n", kAgeLo + i,
                      static_cast<double>(dist[static_cast<std::size_t>(i)]));
        out << buf;
    }
    if (!out) throw FormatError("failed writing " + run.file("encoding.csv").string());
    run.commit();
}

void cmd_augment(const RunConfig& cfg) {
    const fs::path manifest = need_path(cfg.data.manifest, "data.manifest");
    if (cfg.augment.crop_width <= 0 || cfg.augment.crop_height <= 0) {
        throw ConfigError("augment needs positive 'augment.crop_width' and 'augment.crop_height'");
    }
    RunDir run(cfg);
    Dataset ds = load_dataset(manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));
    fs::create_directories(run.file("images"));

    std::vector<LabelRecord> out_records;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::vector<nn::Tensor> views =
            twelve_crop(ds.images[i], cfg.augment.crop_width, cfg.augment.crop_height);
        const std::string stem = fs::path(ds.labels[i].image_path).stem().string();
        for (std::size_t v = 0; v < views.size(); ++v) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s_c%02zu.pgm", stem.c_str(), v);
            save_pnm(views[v], run.file("images") / name);
            LabelRecord rec = ds.labels[i];
            rec.image_path = std::string("images/") + name;
            out_records.push_back(std::move(rec));
        }
    }
    save_labels(out_records, run.file("manifest.csv"));
    run.commit();
}

nn::Model<float> assemble_model(const RunConfig& cfg) {
    if (!cfg.surgery.init.empty()) {
        nn::Model<float> model = load_checkpoint(cfg.surgery.init).model;
        if (cfg.surgery.replace_top) {
            model = nn::replace_top(model, cfg.model.dense, cfg.model.dropout, cfg.model.head);
        }
        if (cfg.surgery.freeze_backbone) nn::freeze_backbone(model);
        model.init_random(cfg.seed);  // fills only layers the surgery left fresh
        return model;
    }
    nn::Model<float> model = nn::Model<float>::build(build_model_config(cfg.model));
    model.init_random(cfg.seed);
    return model;
}

void cmd_train(const RunConfig& cfg) {
    const fs::path train_manifest = need_path(cfg.data.train_manifest, "data.train_manifest");
    const fs::path val_manifest = need_path(cfg.data.val_manifest, "data.val_manifest");
    RunDir run(cfg);
    Dataset train_set =
        load_dataset(train_manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));
    Dataset val_set =
        load_dataset(val_manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    TrainResult res = train(assemble_model(cfg), train_set, val_set, tc);

    const int last_epoch = res.log.epochs.empty() ? 0 : res.log.epochs.back().epoch;
    save_checkpoint(res.best, {cfg.seed, "best epoch " + std::to_string(res.log.best_epoch)},
                    run.file("best.ckpt"));
    save_checkpoint(res.final, {cfg.seed, "final epoch " + std::to_string(last_epoch)},
                    run.file("final.ckpt"));
    save_train_log(res.log, run.file("train_log.csv"));
    save_stats(res.stats, train_manifest.stem().string(), cfg.seed, run.file("stats.csv"));
    run.commit();
}

void cmd_eval(const RunConfig& cfg) {
    const fs::path test_manifest = need_path(cfg.data.test_manifest, "data.test_manifest");
    const fs::path ckpt_path = need_path(cfg.eval.checkpoint, "eval.checkpoint");
    RunDir run(cfg);
    LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
    Dataset test =
        load_dataset(test_manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));
    const StandardizationStats stats = stats_or_identity(cfg.eval.stats);

    std::vector<std::pair<std::string, double>> rows;
    rows.emplace_back("samples", static_cast<double>(test.size()));
    switch (ckpt.model.config().head) {
        case nn::Head::Gender:
            rows.emplace_back("accuracy", evaluate_gender(ckpt.model, test, stats));
            break;
        case nn::Head::Age:
            // Both decoders side by side, one table row each.
            rows.emplace_back("mae_argmax",
                              evaluate_age(ckpt.model, test, AgeDecoder::Argmax, stats));
            rows.emplace_back("mae_expected_value",
                              evaluate_age(ckpt.model, test, AgeDecoder::ExpectedValue, stats));
            break;
        case nn::Head::None:
            throw ConfigError("checkpoint '" + ckpt_path.string() + "' has no evaluable head");
    }
    write_metrics(run.file("metrics.csv"), rows);
    run.commit();
}

void cmd_hier_eval(const RunConfig& cfg) {
    const fs::path test_manifest = need_path(cfg.data.test_manifest, "data.test_manifest");
    RunDir run(cfg);
    HierarchyModel h{
        load_checkpoint(need_path(cfg.hier.gender_checkpoint, "hier.gender_checkpoint")).model,
        load_checkpoint(need_path(cfg.hier.male_checkpoint, "hier.male_checkpoint")).model,
        load_checkpoint(need_path(cfg.hier.female_checkpoint, "hier.female_checkpoint")).model};
    Dataset test =
        load_dataset(test_manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));
    const StandardizationStats stats = stats_or_identity(cfg.hier.stats);

    HierarchyMetrics m = evaluate_hierarchy(h, test, cfg.hier.decoder, stats);
    std::vector<std::pair<std::string, double>> rows;
    rows.emplace_back("samples", static_cast<double>(test.size()));
    rows.emplace_back("routing_accuracy", m.routing_accuracy);
    rows.emplace_back("mae_hierarchical", m.mae);
    if (!cfg.hier.single_checkpoint.empty()) {
        LoadedCheckpoint single = load_checkpoint(cfg.hier.single_checkpoint);
        const double single_mae = evaluate_age(single.model, test, cfg.hier.decoder, stats);
        rows.emplace_back("mae_single", single_mae);
        rows.emplace_back("mae_delta", m.mae - single_mae);
    }
    write_metrics(run.file("metrics.csv"), rows);
    run.commit();
}

void cmd_sweep(const RunConfig& cfg) {
    const fs::path train_manifest = need_path(cfg.data.train_manifest, "data.train_manifest");
    const fs::path val_manifest = need_path(cfg.data.val_manifest, "data.val_manifest");
    const fs::path test_manifest = need_path(cfg.data.test_manifest, "data.test_manifest");
    RunDir run(cfg);
    Dataset train_set =
        load_dataset(train_manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));
    Dataset val_set =
        load_dataset(val_manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));
    Dataset test_set =
        load_dataset(test_manifest, cfg.data.work_height, cfg.data.work_width, window_of(cfg));

    ExperimentSetup setup;
    setup.model = build_model_config(cfg.model);
    setup.train = &train_set;
    setup.val = &val_set;
    setup.test = &test_set;
    setup.config = cfg.train;
    setup.config.seed = cfg.seed;

    save_sweep_table(sweep(cfg.sweep.axis, cfg.sweep.values, setup), run.file("sweep.csv"));
    run.commit();
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"synth", "clean",  "subset", "stats",
                                                   "encode", "augment", "train", "eval",
                                                   "hier-eval", "sweep"};
    return names;
}

void run_command(const std::string& command, const RunConfig& cfg) {
    try {
        if (command == "synth") cmd_synth(cfg);
        else if (command == "clean") cmd_clean(cfg);
        else if (command == "subset") cmd_subset(cfg);
        else if (command == "stats") cmd_stats(cfg);
        else if (command == "encode") cmd_encode(cfg);
        else if (command == "augment") cmd_augment(cfg);
        else if (command == "train") cmd_train(cfg);
        else if (command == "eval") cmd_eval(cfg);
        else if (command == "hier-eval") cmd_hier_eval(cfg);
        else if (command == "sweep") cmd_sweep(cfg);
        else {
            std::string all;
            for (const std::string& name : command_names()) {
                if (!all.empty()) all += "|";
                all += name;
            }
            throw ConfigError("unknown command '" + command + "' (want " + all + ")");
        }
    } catch (const std::exception& e) {
        // Leave a note beside whatever partial outputs the failed-run marker
        // directory already holds.
        try {
            fs::create_directories(fs::path(cfg.out) / "failed");
            std::ofstream note(fs::path(cfg.out) / "failed" / "error.txt", std::ios::trunc);
            note << e.what() << '\n';
        } catch (...) {
        }
        throw;
    }
}

} // namespace agelab
