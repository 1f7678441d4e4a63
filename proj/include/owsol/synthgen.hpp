#pragma once

#include <cstdint>
#include <vector>

#include "owsol/core.hpp"
#include "owsol/rng.hpp"

namespace owsol {

enum class BaseShape { Blob, Bar, Ring, Cross, Checker };

const char* shape_name(BaseShape s);

// One prototype per family; classes perturb these. Distinct families get
// distinct (shape, intensity-band) pairs.
struct FamilyPrototype {
    int family_id = 0;
    BaseShape base_shape = BaseShape::Blob;
    float base_scale = 0.5f;     // fraction of image side
    float base_intensity = 0.9f; // [0,1]
};

struct GenConfig {
    int n_known = 12;
    int n_nov_s = 6;
    int n_nov_d = 6;
    int samples_per_class = 40;
    int image_side = 16;
    float noise_std = 0.05f;
    float distractor_prob = 0.3f;
    float labeled_fraction = 0.5f; // of each known class
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
};

// Fully resolved rendering recipe for one category.
struct ClassSpec {
    int category_id = 0;
    int family_id = 0;
    Role role = Role::Known;
    BaseShape shape = BaseShape::Blob;
    float scale = 0.5f;
    float intensity = 0.9f;
    float center_dx = 0.0f; // class-level mean offset, fraction of side
    float center_dy = 0.0f;
    float jitter = 0.08f;   // per-sample position jitter, fraction of side
};

std::vector<FamilyPrototype> build_family_prototypes(const GenConfig& cfg);
std::vector<ClassSpec> build_class_specs(const GenConfig& cfg);
CategoryTaxonomy taxonomy_from_specs(const std::vector<ClassSpec>& specs);

struct RenderResult {
    Sample sample;
    std::vector<std::uint8_t> foreground_mask; // image_side x image_side
};

// Pure in (spec, cfg, families, rng): identical rng state => identical pixels.
// The gt box is the tight bound of the foreground support; distractors and
// noise never move it.
RenderResult render_sample_full(const ClassSpec& spec, const GenConfig& cfg,
                                const std::vector<FamilyPrototype>& families,
                                long sample_id, SplitRole split_role, Rng rng);

Sample render_sample(const ClassSpec& spec, const GenConfig& cfg,
                     const std::vector<FamilyPrototype>& families, long sample_id,
                     SplitRole split_role, Rng rng);

// Deterministic open-world split: known classes feed D_l and D_u, novel
// classes feed D_u only, val/test carved per class from the unlabeled pool.
DatasetSplit generate_dataset(const GenConfig& cfg);

// Rng stream ids so renders stay reproducible per (seed, sample index).
inline constexpr std::uint64_t kStreamClass = 101;
inline constexpr std::uint64_t kStreamSample = 202;

} // namespace owsol
