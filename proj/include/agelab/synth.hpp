#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "agelab/dataset.hpp"
#include "agelab/labels.hpp"
#include "agelab/tensor.hpp"

namespace agelab {

// Deterministic stand-in for a face dataset. Gender is encoded as a
// left/right mean-brightness asymmetry, age as the radius of a centered
// anti-aliased disc; both cues are recoverable analytically from the pixels,
// so training results on this data are falsifiable.
struct SyntheticSpec {
    int width = 64;
    int height = 64;
    int count = 0;
    int age_lo = 16;
    int age_hi = 77;
    double male_fraction = 0.75;  // three males per female
    double noise = 0.0;           // gaussian pixel noise sigma
    std::uint64_t seed = 0;
    bool table1_profile = false;  // age-by-gender cell counts matching the reference marginals
    double brightness_delta = 12.0;  // half the left/right brightness gap
    double disc_scale = 0.35;        // disc radius in pixels per year of age
};

void validate_synth_spec(const SyntheticSpec& spec);

// The full label roster for a spec, deterministic given (spec, seed).
std::vector<LabelRecord> synth_labels(const SyntheticSpec& spec);

// The image for one roster entry, already quantized to the byte grid so the
// in-memory tensor equals what a written PGM file reads back as.
nn::Tensor synth_image(const SyntheticSpec& spec, const LabelRecord& label, int index);

// Pixel-statistic oracles used by the generator self-check and the tests.
// Positive asymmetry means brighter on the left, the male cue.
double brightness_asymmetry(const nn::Tensor& image);
// Recovers age from the disc area; exact on noiseless images.
int recover_age_from_disc(const nn::Tensor& image, const SyntheticSpec& spec, Gender gender);

// Regenerates every image at noise 0 and verifies both oracles recover the
// labels exactly; throws on any miss.
void synth_self_check(const SyntheticSpec& spec);

// Runs the self-check, then writes images/ and manifest.csv under out_dir.
void write_synth_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

// In-memory convenience for tests and the training harness: labels plus
// generated images, no disk involved.
using SynthDataset = Dataset;
SynthDataset synth_in_memory(const SyntheticSpec& spec);

} // namespace agelab
