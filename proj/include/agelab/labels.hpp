#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "agelab/error.hpp"

namespace agelab {

enum class Gender { Male, Female };
enum class Race { Black, White, Other };

char gender_code(Gender g);
char race_code(Race r);

struct LabelRecord {
    std::string subject_id;
    std::string image_path;
    int age = 0;
    Gender gender = Gender::Male;
    Race race = Race::Other;
};

struct RejectedRow {
    int line = 0;  // 1-based line number in the manifest
    std::string reason;
};

struct LoadedLabels {
    std::vector<LabelRecord> records;
    std::vector<RejectedRow> rejects;
};

// Accepted age window for manifest rows; rows outside land in the rejects.
struct AgeWindow {
    int lo = 16;
    int hi = 77;
};

// Manifest CSV: header `subject_id,image_path,age,gender,race`, gender M/F,
// race B/W/O. Malformed rows are collected, never silently dropped; a missing
// or wrong header is fatal.
LoadedLabels load_labels(const std::filesystem::path& manifest, AgeWindow window = {});

void save_labels(const std::vector<LabelRecord>& records, const std::filesystem::path& path);

// Which subjects carry conflicting metadata, and the conflicting values.
// Subjects appear only when some field has two or more distinct values.
struct SubjectConflict {
    std::set<int> ages;
    std::set<Gender> genders;
    std::set<Race> races;
};

struct InconsistencyReport {
    std::map<std::string, SubjectConflict> subjects;
    bool empty() const { return subjects.empty(); }
};

InconsistencyReport detect_inconsistencies(const std::vector<LabelRecord>& records);
void save_inconsistency_report(const InconsistencyReport& report,
                               const std::filesystem::path& path);

// Overrides CSV: `subject_id,field,value` with field in {age, gender, race}.
struct Override {
    std::string subject_id;
    std::string field;
    std::string value;
};

std::vector<Override> load_overrides(const std::filesystem::path& path);

struct CleanResult {
    std::vector<LabelRecord> records;
    std::vector<LabelRecord> quarantined;  // subjects with unresolvable ties
    std::vector<std::string> warnings;     // e.g. overrides naming unknown subjects
};

// Resolves conflicting gender/race per subject: override first, then majority
// vote, then quarantine on an unbroken tie. Ages are only changed by an
// explicit override, since one subject legitimately appears at several ages;
// age conflicts stay visible in the report instead.
CleanResult clean_labels(const std::vector<LabelRecord>& records,
                         const InconsistencyReport& report,
                         const std::vector<Override>& overrides);

} // namespace agelab
