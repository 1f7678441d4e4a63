#include "owsol/synthgen.hpp"

#include <algorithm>
#include <cmath>

namespace owsol {

const char* shape_name(BaseShape s) {
    switch (s) {
        case BaseShape::Blob: return "blob";
        case BaseShape::Bar: return "bar";
        case BaseShape::Ring: return "ring";
        case BaseShape::Cross: return "cross";
        case BaseShape::Checker: return "checker";
    }
    return "?";
}

void GenConfig::validate() const {
    if (n_known < 1) throw ConfigError("n_known must be >= 1");
    if (n_nov_s < 0 || n_nov_d < 0) throw ConfigError("novel counts must be >= 0");
    if (n_nov_s > n_known)
        throw ConfigError("n_nov_s must be <= n_known (each Nov-S borrows a Known family)");
    if (samples_per_class < 1) throw ConfigError("samples_per_class must be >= 1");
    if (image_side < 8) throw ConfigError("image_side must be >= 8");
    if (!(noise_std >= 0.0f)) throw ConfigError("noise_std must be >= 0");
    if (!(distractor_prob >= 0.0f && distractor_prob <= 1.0f))
        throw ConfigError("distractor_prob must be in [0,1]");
    if (!(labeled_fraction >= 0.0f && labeled_fraction <= 1.0f))
        throw ConfigError("labeled_fraction must be in [0,1]");
}

std::vector<FamilyPrototype> build_family_prototypes(const GenConfig& cfg) {
    const int n_fam = cfg.n_known + cfg.n_nov_d;
    const int n_bands = (n_fam + 4) / 5;
    std::vector<FamilyPrototype> out;
    out.reserve(static_cast<std::size_t>(n_fam));
    for (int f = 0; f < n_fam; ++f) {
        FamilyPrototype p;
        p.family_id = f;
        p.base_shape = static_cast<BaseShape>(f % 5);
        const int band = f / 5;
        p.base_intensity =
            n_bands <= 1 ? 0.9f
                         : 0.9f - 0.55f * static_cast<float>(band) /
                                      static_cast<float>(n_bands - 1);
        p.base_scale = 0.5f;
        out.push_back(p);
    }
    return out;
}

namespace {

// Slot 0 = the family's Known look, slot 1 = the Nov-S perturbation of it.
ClassSpec make_spec(const FamilyPrototype& fam, int category_id, Role role, int slot,
                    std::uint64_t seed) {
    ClassSpec c;
    c.category_id = category_id;
    c.family_id = fam.family_id;
    c.role = role;
    c.shape = fam.base_shape;
    Rng rng = Rng::keyed(seed, kStreamClass, static_cast<std::uint64_t>(category_id));
    const float mult = static_cast<float>(rng.uniform(0.96, 1.04));
    if (slot == 0) {
        c.scale = fam.base_scale * 0.95f * mult;
        c.intensity = fam.base_intensity;
        c.center_dx = 0.0f;
        c.center_dy = 0.0f;
    } else {
        c.scale = fam.base_scale * 1.3f * mult;
        c.intensity = std::max(0.15f, fam.base_intensity - 0.08f);
        c.center_dx = 0.05f;
        c.center_dy = -0.03f;
    }
    c.jitter = 0.08f;
    return c;
}

} // namespace

std::vector<ClassSpec> build_class_specs(const GenConfig& cfg) {
    const auto fams = build_family_prototypes(cfg);
    std::vector<ClassSpec> specs;
    specs.reserve(static_cast<std::size_t>(cfg.n_known + cfg.n_nov_s + cfg.n_nov_d));
    int next_id = 0;
    for (int k = 0; k < cfg.n_known; ++k)
        specs.push_back(make_spec(fams[static_cast<std::size_t>(k)], next_id++,
                                  Role::Known, 0, cfg.seed));
    for (int j = 0; j < cfg.n_nov_s; ++j)
        specs.push_back(make_spec(fams[static_cast<std::size_t>(j)], next_id++,
                                  Role::NovS, 1, cfg.seed));
    for (int j = 0; j < cfg.n_nov_d; ++j)
        specs.push_back(make_spec(fams[static_cast<std::size_t>(cfg.n_known + j)],
                                  next_id++, Role::NovD, 0, cfg.seed));
    return specs;
}

CategoryTaxonomy taxonomy_from_specs(const std::vector<ClassSpec>& specs) {
    std::vector<Category> cats;
    cats.reserve(specs.size());
    for (const auto& s : specs) cats.push_back({s.category_id, s.family_id, s.role});
    return CategoryTaxonomy(std::move(cats));
}

namespace {

std::vector<std::uint8_t> rasterize(BaseShape shape, int side, double cx, double cy,
                                    double half) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(side) * side, 0);
    const double a = std::max(half, 0.8);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            bool on = false;
            switch (shape) {
                case BaseShape::Blob:
                    on = dx * dx + dy * dy <= a * a;
                    break;
                case BaseShape::Bar:
                    on = std::abs(dx) <= a && std::abs(dy) <= std::max(0.3 * a, 0.6);
                    break;
                case BaseShape::Ring: {
                    const double r2 = dx * dx + dy * dy;
                    const double inner = std::max(0.0, std::min(0.6 * a, a - 1.1));
                    on = r2 <= a * a && r2 >= inner * inner;
                    break;
                }
                case BaseShape::Cross: {
                    const double t = std::max(0.22 * a, 0.6);
                    on = (std::abs(dx) <= t && std::abs(dy) <= a) ||
                         (std::abs(dy) <= t && std::abs(dx) <= a);
                    break;
                }
                case BaseShape::Checker: {
                    if (std::abs(dx) <= a && std::abs(dy) <= a) {
                        const double cell = std::max(a / 2.0, 1.0);
                        const int ix = static_cast<int>(std::floor((dx + a) / cell));
                        const int iy = static_cast<int>(std::floor((dy + a) / cell));
                        on = ((ix + iy) & 1) == 0;
                    }
                    break;
                }
            }
            if (on) mask[static_cast<std::size_t>(y) * side + x] = 1;
        }
    }
    return mask;
}

Box tight_bound(const std::vector<std::uint8_t>& mask, int side) {
    int x0 = side, y0 = side, x1 = -1, y1 = -1;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            if (mask[static_cast<std::size_t>(y) * side + x]) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return Box{0, 0, 0, 0};
    return Box{x0, y0, x1 + 1, y1 + 1};
}

} // namespace

RenderResult render_sample_full(const ClassSpec& spec, const GenConfig& cfg,
                                const std::vector<FamilyPrototype>& families,
                                long sample_id, SplitRole split_role, Rng rng) {
    const int s = cfg.image_side;
    ToyImage img;
    img.width = s;
    img.height = s;
    img.channels = 1;
    img.data.assign(static_cast<std::size_t>(s) * s, 0.0f);

    const double cx = s * (0.5 + spec.center_dx + rng.uniform(-spec.jitter, spec.jitter));
    const double cy = s * (0.5 + spec.center_dy + rng.uniform(-spec.jitter, spec.jitter));

    // Distractor draws happen unconditionally so the stream layout is fixed.
    const double coin = rng.uniform();
    const std::size_t pick = families.size() > 1
                                 ? static_cast<std::size_t>(
                                       rng.next_below(families.size() - 1))
                                 : 0;
    const double dcx = s * rng.uniform(0.25, 0.75);
    const double dcy = s * rng.uniform(0.25, 0.75);
    if (coin < cfg.distractor_prob && families.size() > 1) {
        std::size_t fi = pick;
        if (static_cast<int>(fi) >= spec.family_id) ++fi; // skip own family
        const FamilyPrototype& d = families[fi];
        const auto dmask =
            rasterize(d.base_shape, s, dcx, dcy, 0.5 * 0.6 * d.base_scale * s);
        const float dval = spec.intensity * 0.35f;
        for (std::size_t p = 0; p < dmask.size(); ++p)
            if (dmask[p]) img.data[p] = dval;
    }

    auto fg = rasterize(spec.shape, s, cx, cy, 0.5 * spec.scale * s);
    for (std::size_t p = 0; p < fg.size(); ++p)
        if (fg[p]) img.data[p] = spec.intensity;

    if (cfg.noise_std > 0.0f) {
        for (auto& v : img.data) {
            v = static_cast<float>(v + cfg.noise_std * rng.gaussian());
            v = std::clamp(v, 0.0f, 1.0f);
        }
    }

    Box box = tight_bound(fg, s);
    RenderResult out;
    out.sample = Sample(sample_id, std::move(img), spec.category_id, {box}, split_role);
    out.foreground_mask = std::move(fg);
    return out;
}

Sample render_sample(const ClassSpec& spec, const GenConfig& cfg,
                     const std::vector<FamilyPrototype>& families, long sample_id,
                     SplitRole split_role, Rng rng) {
    return render_sample_full(spec, cfg, families, sample_id, split_role, std::move(rng))
        .sample;
}

DatasetSplit generate_dataset(const GenConfig& cfg) {
    cfg.validate();
    const auto families = build_family_prototypes(cfg);
    const auto specs = build_class_specs(cfg);

    DatasetSplit split;
    split.taxonomy = taxonomy_from_specs(specs);

    const int spc = cfg.samples_per_class;
    for (std::size_t ci = 0; ci < specs.size(); ++ci) {
        const ClassSpec& spec = specs[ci];
        const bool known = spec.role == Role::Known;
        const int n_lab =
            known ? static_cast<int>(std::llround(spc * double(cfg.labeled_fraction))) : 0;
        const int pool = spc - n_lab;
        const int n_test = pool * 15 / 100;
        const int n_val = pool * 10 / 100;
        const int n_unlab = pool - n_val - n_test;

        for (int j = 0; j < spc; ++j) {
            const long gid = static_cast<long>(ci) * spc + j;
            SplitRole role;
            if (j < n_lab)
                role = SplitRole::Labeled;
            else if (j - n_lab < n_unlab)
                role = SplitRole::Unlabeled;
            else if (j - n_lab < n_unlab + n_val)
                role = SplitRole::Val;
            else
                role = SplitRole::Test;
            Rng rng = Rng::keyed(cfg.seed, kStreamSample, static_cast<std::uint64_t>(gid));
            Sample s = render_sample(spec, cfg, families, gid, role, rng);
            switch (role) {
                case SplitRole::Labeled: split.labeled.push_back(std::move(s)); break;
                case SplitRole::Unlabeled: split.unlabeled.push_back(std::move(s)); break;
                case SplitRole::Val: split.val.push_back(std::move(s)); break;
                case SplitRole::Test: split.test.push_back(std::move(s)); break;
            }
        }
    }
    return split;
}

} // namespace owsol
