#include "owsol/core.hpp"

#include <cmath>
#include <set>

namespace owsol {

const char* role_name(Role r) {
    switch (r) {
        case Role::Known: return "known";
        case Role::NovS: return "nov_s";
        case Role::NovD: return "nov_d";
    }
    return "?";
}

const char* split_role_name(SplitRole r) {
    switch (r) {
        case SplitRole::Labeled: return "labeled";
        case SplitRole::Unlabeled: return "unlabeled";
        case SplitRole::Val: return "val";
        case SplitRole::Test: return "test";
    }
    return "?";
}

CategoryTaxonomy::CategoryTaxonomy(std::vector<Category> cats) : cats_(std::move(cats)) {
    for (std::size_t i = 0; i < cats_.size(); ++i)
        index_.emplace(cats_[i].id, i); // emplace keeps the first on duplicates
}

const Category& CategoryTaxonomy::find(int cat_id) const {
    auto it = index_.find(cat_id);
    if (it == index_.end())
        throw UnknownCategory("unknown category id " + std::to_string(cat_id));
    return cats_[it->second];
}

Role CategoryTaxonomy::role_of(int cat_id) const { return find(cat_id).role; }

int CategoryTaxonomy::family_of(int cat_id) const { return find(cat_id).family; }

std::vector<int> CategoryTaxonomy::ids_with_role(Role r) const {
    std::vector<int> out;
    for (const auto& c : cats_)
        if (c.role == r) out.push_back(c.id);
    return out;
}

std::vector<int> CategoryTaxonomy::all_ids() const {
    std::vector<int> out;
    out.reserve(cats_.size());
    for (const auto& c : cats_) out.push_back(c.id);
    return out;
}

std::vector<const Sample*> DatasetSplit::train_view() const {
    std::vector<const Sample*> out;
    out.reserve(labeled.size() + unlabeled.size());
    for (const auto& s : labeled) out.push_back(&s);
    for (const auto& s : unlabeled) out.push_back(&s);
    return out;
}

void HyperParams::validate() const {
    if (!(tau > 0.0f)) throw ConfigError("tau must be > 0");
    if (n_z < 1) throw ConfigError("n_z must be >= 1");
    if (n_c < 1) throw ConfigError("n_c must be >= 1");
    if (l_pos < 1 || l_pos >= n_c)
        throw ConfigError("l_pos must satisfy 1 <= l_pos < n_c");
    if (n_neg < 0 || n_neg > n_c - l_pos)
        throw ConfigError("n_neg must satisfy 0 <= n_neg <= n_c - l_pos");
    if (!(momentum_coef >= 0.0f && momentum_coef < 1.0f))
        throw ConfigError("momentum_coef must be in [0, 1)");
    if (!(alpha >= 0.0f) || !(beta >= 0.0f))
        throw ConfigError("alpha and beta must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(lr >= 0.0f)) throw ConfigError("lr must be >= 0");
    if (!(weight_decay >= 0.0f)) throw ConfigError("weight_decay must be >= 0");
    if (!(sgd_momentum >= 0.0f && sgd_momentum < 1.0f))
        throw ConfigError("sgd_momentum must be in [0, 1)");
}

Role role_of(const CategoryTaxonomy& taxonomy, int cat_id) {
    return taxonomy.role_of(cat_id);
}

namespace {

void check_image(const Sample& s, std::vector<Violation>& out) {
    const ToyImage& im = s.image();
    if (im.data.size() != im.pixel_count()) {
        out.push_back({"ImageDataSizeMismatch", s.id(),
                       "data length != width*height*channels"});
        return;
    }
    for (float v : im.data) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
            out.push_back({"ImageValueOutOfRange", s.id(),
                           "intensity outside [0,1] or non-finite"});
            break;
        }
    }
}

void check_sample(const Sample& s, const CategoryTaxonomy& tax,
                  std::vector<Violation>& out) {
    check_image(s, out);
    if (!tax.contains(s.eval_label()))
        out.push_back({"UnknownCategoryLabel", s.id(),
                       "gt_label " + std::to_string(s.eval_label()) +
                           " not in taxonomy"});
    if (s.gt_boxes().empty())
        out.push_back({"SampleNeedsBox", s.id(), "no ground-truth box"});
    for (const Box& b : s.gt_boxes()) {
        if (!b.valid()) {
            out.push_back({"BoxEmpty", s.id(), "x_min >= x_max or y_min >= y_max"});
            continue;
        }
        if (b.x_min < 0 || b.y_min < 0 || b.x_max > s.image().width ||
            b.y_max > s.image().height)
            out.push_back({"BoxOutOfBounds", s.id(), "box exceeds image bounds"});
    }
}

} // namespace

std::vector<Violation> validate_split(const DatasetSplit& split) {
    std::vector<Violation> out;
    const CategoryTaxonomy& tax = split.taxonomy;

    std::set<int> seen_ids;
    std::set<int> known_families;
    for (const auto& c : tax.categories()) {
        if (!seen_ids.insert(c.id).second)
            out.push_back({"DuplicateCategoryId", c.id, "category id repeated"});
        if (c.role == Role::Known) known_families.insert(c.family);
    }
    for (const auto& c : tax.categories()) {
        if (c.role == Role::NovS && known_families.count(c.family) == 0)
            out.push_back({"NovSNeedsKnownFamily", c.id,
                           "family " + std::to_string(c.family) +
                               " has no Known member"});
        if (c.role == Role::NovD && known_families.count(c.family) != 0)
            out.push_back({"NovDFamilyMustBeDisjoint", c.id,
                           "family " + std::to_string(c.family) +
                               " overlaps Known families"});
    }

    for (const auto& s : split.labeled) {
        check_sample(s, tax, out);
        if (tax.contains(s.eval_label()) &&
            tax.role_of(s.eval_label()) != Role::Known)
            out.push_back({"LabeledMustBeKnown", s.id(),
                           "labeled sample carries a novel-class label"});
        if (s.split_role() != SplitRole::Labeled)
            out.push_back({"SplitRoleMismatch", s.id(),
                           "sample in labeled set not tagged Labeled"});
    }
    auto check_pool = [&](const std::vector<Sample>& pool, SplitRole expect) {
        for (const auto& s : pool) {
            check_sample(s, tax, out);
            if (s.split_role() != expect)
                out.push_back({"SplitRoleMismatch", s.id(),
                               std::string("sample not tagged ") +
                                   split_role_name(expect)});
        }
    };
    check_pool(split.unlabeled, SplitRole::Unlabeled);
    check_pool(split.val, SplitRole::Val);
    check_pool(split.test, SplitRole::Test);
    return out;
}

} // namespace owsol
