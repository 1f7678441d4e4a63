#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "owsol/errors.hpp"
#include "owsol/tensor.hpp"

namespace owsol {

// ---------------------------------------------------------------------------
// Images and boxes
// ---------------------------------------------------------------------------

// Row-major [channel][row][col] intensities in [0,1].
struct ToyImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<float> data;

    float at(int c, int y, int x) const {
        return data[static_cast<std::size_t>((c * height + y) * width + x)];
    }
    float& at(int c, int y, int x) {
        return data[static_cast<std::size_t>((c * height + y) * width + x)];
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
               static_cast<std::size_t>(channels);
    }
};

// Half-open pixel box [x_min, x_max) x [y_min, y_max); area is exact integer.
struct Box {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min; }
    int height() const { return y_max - y_min; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    bool valid() const { return x_min < x_max && y_min < y_max; }
    bool operator==(const Box&) const = default;
};

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

enum class Role { Known, NovS, NovD };

const char* role_name(Role r);

struct Category {
    int id = 0;
    int family = 0;
    Role role = Role::Known;
};

// Immutable after construction; safe for concurrent reads.
class CategoryTaxonomy {
public:
    CategoryTaxonomy() = default;
    explicit CategoryTaxonomy(std::vector<Category> cats);

    const std::vector<Category>& categories() const { return cats_; }
    bool contains(int cat_id) const { return index_.count(cat_id) != 0; }
    Role role_of(int cat_id) const;    // throws UnknownCategory
    int family_of(int cat_id) const;   // throws UnknownCategory
    std::vector<int> ids_with_role(Role r) const;
    std::vector<int> all_ids() const;

private:
    const Category& find(int cat_id) const;

    std::vector<Category> cats_;
    std::map<int, std::size_t> index_; // first occurrence wins on duplicates
};

// ---------------------------------------------------------------------------
// Samples and splits
// ---------------------------------------------------------------------------

enum class SplitRole { Labeled, Unlabeled, Val, Test };

const char* split_role_name(SplitRole r);

class Sample {
public:
    Sample() = default;
    Sample(long id, ToyImage image, int gt_label, std::vector<Box> gt_boxes,
           SplitRole split_role)
        : id_(id),
          image_(std::move(image)),
          gt_boxes_(std::move(gt_boxes)),
          split_role_(split_role),
          gt_label_(gt_label) {}

    long id() const { return id_; }
    const ToyImage& image() const { return image_; }
    const std::vector<Box>& gt_boxes() const { return gt_boxes_; }
    SplitRole split_role() const { return split_role_; }

    // Label as seen by training code. Refuses anything outside the labeled
    // set so unlabeled ground truth cannot leak into a loss.
    int supervised_label() const {
        if (split_role_ != SplitRole::Labeled)
            throw LabelAccessDenied("supervised_label on non-labeled sample " +
                                    std::to_string(id_));
        return gt_label_;
    }

    // Label for evaluation and dataset tooling; unrestricted.
    int eval_label() const { return gt_label_; }

private:
    long id_ = 0;
    ToyImage image_;
    std::vector<Box> gt_boxes_;
    SplitRole split_role_ = SplitRole::Unlabeled;
    int gt_label_ = 0;
};

struct DatasetSplit {
    std::vector<Sample> labeled;
    std::vector<Sample> unlabeled;
    std::vector<Sample> val;
    std::vector<Sample> test;
    CategoryTaxonomy taxonomy;

    // Training corpus view in stable (labeled..., unlabeled...) order.
    std::vector<const Sample*> train_view() const;
};

// ---------------------------------------------------------------------------
// Hyper-parameters
// ---------------------------------------------------------------------------

struct HyperParams {
    float tau = 0.007f;          // contrastive softmax temperature
    int n_z = 12;                // queue length per known class
    int n_c = 64;                // number of semantic centroids
    int l_pos = 5;               // positive centroids per anchor
    float alpha = 1.0f;          // supervised loss weight
    float beta = 0.5f;           // centroid loss weight
    int n_neg = 59;              // sampled negative centroids per anchor
    float momentum_coef = 0.99f; // momentum-encoder coefficient
    float lr = 0.02f;
    float weight_decay = 1e-4f;
    float sgd_momentum = 0.9f;
    int batch_size = 32;
    int epochs = 30;
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
};

// ---------------------------------------------------------------------------
// Split validation
// ---------------------------------------------------------------------------

// A violation is data, not a failure: rule id plus the offending entity.
struct Violation {
    std::string rule;
    long offending_id = 0;
    std::string detail;
};

// Pure; returns empty iff all taxonomy and split invariants hold.
std::vector<Violation> validate_split(const DatasetSplit& split);

Role role_of(const CategoryTaxonomy& taxonomy, int cat_id);

} // namespace owsol
