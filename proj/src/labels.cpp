#include "agelab/labels.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace agelab {

namespace {

constexpr const char* kHeader = "subject_id,image_path,age,gender,race";

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_gender(const std::string& s, Gender& out) {
    if (s == "M") {
        out = Gender::Male;
        return true;
    }
    if (s == "F") {
        out = Gender::Female;
        return true;
    }
    return false;
}

bool parse_race(const std::string& s, Race& out) {
    if (s == "B") {
        out = Race::Black;
        return true;
    }
    if (s == "W") {
        out = Race::White;
        return true;
    }
    if (s == "O") {
        out = Race::Other;
        return true;
    }
    return false;
}

bool parse_age(const std::string& s, int& out) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stoi(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace

char gender_code(Gender g) { return g == Gender::Male ? 'M' : 'F'; }

char race_code(Race r) {
    switch (r) {
        case Race::Black: return 'B';
        case Race::White: return 'W';
        case Race::Other: return 'O';
    }
    return '?';
}

LoadedLabels load_labels(const std::filesystem::path& manifest, AgeWindow window) {
    std::ifstream in(manifest);
    if (!in) throw FormatError("cannot open manifest: " + manifest.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("manifest is empty (no header): " + manifest.string());
    if (strip_cr(line) != kHeader) {
        throw FormatError("manifest header must be '" + std::string(kHeader) + "', got '" +
                          strip_cr(line) + "' in " + manifest.string());
    }

    LoadedLabels out;
    std::unordered_set<std::string> seen_paths;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv(line);
        auto reject = [&](const std::string& why) { out.rejects.push_back({lineno, why}); };
        if (f.size() != 5) {
            reject("expected 5 fields, got " + std::to_string(f.size()));
            continue;
        }
        LabelRecord rec;
        rec.subject_id = f[0];
        rec.image_path = f[1];
        if (rec.subject_id.empty()) {
            reject("empty subject_id");
            continue;
        }
        if (rec.image_path.empty()) {
            reject("empty image_path");
            continue;
        }
        if (!parse_age(f[2], rec.age)) {
            reject("unparseable age '" + f[2] + "'");
            continue;
        }
        if (rec.age < window.lo || rec.age > window.hi) {
            reject("age " + f[2] + " outside " + std::to_string(window.lo) + ".." +
                   std::to_string(window.hi));
            continue;
        }
        if (!parse_gender(f[3], rec.gender)) {
            reject("unknown gender '" + f[3] + "' (want M or F)");
            continue;
        }
        if (!parse_race(f[4], rec.race)) {
            reject("unknown race '" + f[4] + "' (want B, W or O)");
            continue;
        }
        if (!seen_paths.insert(rec.image_path).second) {
            reject("duplicate image_path '" + rec.image_path + "'");
            continue;
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

void save_labels(const std::vector<LabelRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open manifest for writing: " + path.string());
    out << kHeader << '\n';
    for (const LabelRecord& r : records) {
        out << r.subject_id << ',' << r.image_path << ',' << r.age << ',' << gender_code(r.gender)
            << ',' << race_code(r.race) << '\n';
    }
    if (!out) throw FormatError("failed writing manifest: " + path.string());
}

InconsistencyReport detect_inconsistencies(const std::vector<LabelRecord>& records) {
    std::map<std::string, SubjectConflict> all;
    for (const LabelRecord& r : records) {
        SubjectConflict& c = all[r.subject_id];
        c.ages.insert(r.age);
        c.genders.insert(r.gender);
        c.races.insert(r.race);
    }
    InconsistencyReport report;
    for (auto& [id, c] : all) {
        if (c.ages.size() > 1 || c.genders.size() > 1 || c.races.size() > 1) {
            report.subjects.emplace(id, std::move(c));
        }
    }
    return report;
}

void save_inconsistency_report(const InconsistencyReport& report,
                               const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open report for writing: " + path.string());
    out << "subject_id,field,values\n";
    for (const auto& [id, c] : report.subjects) {
        auto emit = [&](const char* field, const std::string& values) {
            out << id << ',' << field << ',' << values << '\n';
        };
        if (c.ages.size() > 1) {
            std::string vals;
            for (int a : c.ages) {
                if (!vals.empty()) vals += ' ';
                vals += std::to_string(a);
            }
            emit("age", vals);
        }
        if (c.genders.size() > 1) {
            std::string vals;
            for (Gender g : c.genders) {
                if (!vals.empty()) vals += ' ';
                vals += gender_code(g);
            }
            emit("gender", vals);
        }
        if (c.races.size() > 1) {
            std::string vals;
            for (Race r : c.races) {
                if (!vals.empty()) vals += ' ';
                vals += race_code(r);
            }
            emit("race", vals);
        }
    }
    if (!out) throw FormatError("failed writing report: " + path.string());
}

std::vector<Override> load_overrides(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open overrides: " + path.string());
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "subject_id,field,value") {
        throw FormatError("overrides header must be 'subject_id,field,value' in " + path.string());
    }
    std::vector<Override> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 3 || f[0].empty()) {
            throw FormatError("bad override at line " + std::to_string(lineno) + " of " +
                              path.string());
        }
        if (f[1] != "age" && f[1] != "gender" && f[1] != "race") {
            throw FormatError("unknown override field '" + f[1] + "' at line " +
                              std::to_string(lineno) + " of " + path.string());
        }
        out.push_back({f[0], f[1], f[2]});
    }
    return out;
}

CleanResult clean_labels(const std::vector<LabelRecord>& records,
                         const InconsistencyReport& report,
                         const std::vector<Override>& overrides) {
    CleanResult result;

    std::unordered_set<std::string> known;
    for (const LabelRecord& r : records) known.insert(r.subject_id);

    struct Fix {
        bool has_age = false, has_gender = false, has_race = false;
        int age = 0;
        Gender gender = Gender::Male;
        Race race = Race::Other;
    };
    std::unordered_map<std::string, Fix> fixes;
    for (const Override& o : overrides) {
        if (!known.count(o.subject_id)) {
            result.warnings.push_back("override for unknown subject '" + o.subject_id + "'");
            continue;
        }
        Fix& f = fixes[o.subject_id];
        if (o.field == "age") {
            int v = 0;
            if (!parse_age(o.value, v)) {
                throw FormatError("bad age override '" + o.value + "' for subject " + o.subject_id);
            }
            f.has_age = true;
            f.age = v;
        } else if (o.field == "gender") {
            Gender g;
            if (!parse_gender(o.value, g)) {
                throw FormatError("bad gender override '" + o.value + "' for subject " +
                                  o.subject_id);
            }
            f.has_gender = true;
            f.gender = g;
        } else {
            Race rc;
            if (!parse_race(o.value, rc)) {
                throw FormatError("bad race override '" + o.value + "' for subject " +
                                  o.subject_id);
            }
            f.has_race = true;
            f.race = rc;
        }
    }

    // Majority votes for the fields we auto-resolve.
    std::unordered_map<std::string, std::map<Gender, int>> gender_votes;
    std::unordered_map<std::string, std::map<Race, int>> race_votes;
    for (const LabelRecord& r : records) {
        ++gender_votes[r.subject_id][r.gender];
        ++race_votes[r.subject_id][r.race];
    }
    auto majority = [](const auto& votes, auto& winner) {
        int best = 0, runner_up = 0;
        for (const auto& [value, n] : votes) {
            if (n > best) {
                runner_up = best;
                best = n;
                winner = value;
            } else if (n > runner_up) {
                runner_up = n;
            }
        }
        return best > runner_up;  // false on a tie
    };

    std::unordered_set<std::string> quarantine_ids;
    std::unordered_map<std::string, Gender> resolved_gender;
    std::unordered_map<std::string, Race> resolved_race;
    for (const auto& [id, conflict] : report.subjects) {
        const auto fit = fixes.find(id);
        if (conflict.genders.size() > 1 && (fit == fixes.end() || !fit->second.has_gender)) {
            Gender g = Gender::Male;
            if (majority(gender_votes[id], g)) {
                resolved_gender[id] = g;
            } else {
                quarantine_ids.insert(id);
            }
        }
        if (conflict.races.size() > 1 && (fit == fixes.end() || !fit->second.has_race)) {
            Race rc = Race::Other;
            if (majority(race_votes[id], rc)) {
                resolved_race[id] = rc;
            } else {
                quarantine_ids.insert(id);
            }
        }
    }

    for (const LabelRecord& rec : records) {
        LabelRecord r = rec;
        const auto fit = fixes.find(r.subject_id);
        if (fit != fixes.end()) {
            if (fit->second.has_age) r.age = fit->second.age;
            if (fit->second.has_gender) r.gender = fit->second.gender;
            if (fit->second.has_race) r.race = fit->second.race;
        }
        if (quarantine_ids.count(r.subject_id)) {
            result.quarantined.push_back(std::move(r));
            continue;
        }
        const auto g = resolved_gender.find(r.subject_id);
        if (g != resolved_gender.end()) r.gender = g->second;
        const auto rc = resolved_race.find(r.subject_id);
        if (rc != resolved_race.end()) r.race = rc->second;
        result.records.push_back(std::move(r));
    }
    return result;
}

} // namespace agelab
