#include "agelab/dataset.hpp"

#include <string>

#include "agelab/image.hpp"
#include "agelab/parallel.hpp"

namespace agelab {

Dataset load_dataset(const std::vector<LabelRecord>& records, const std::filesystem::path& root,
                     int work_h, int work_w) {
    Dataset out;
    out.labels = records;
    out.images.resize(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        out.images[i] = load_image(root / records[i].image_path, work_h, work_w);
    });
    return out;
}

Dataset load_dataset(const std::filesystem::path& manifest, int work_h, int work_w,
                     AgeWindow window) {
    const LoadedLabels loaded = load_labels(manifest, window);
    if (!loaded.rejects.empty()) {
        const RejectedRow& first = loaded.rejects.front();
        throw FormatError("manifest " + manifest.string() + " has " +
                          std::to_string(loaded.rejects.size()) + " bad row(s); first at line " +
                          std::to_string(first.line) + ": " + first.reason);
    }
    return load_dataset(loaded.records, manifest.parent_path(), work_h, work_w);
}

} // namespace agelab
