#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "owsol/core.hpp"
#include "owsol/rng.hpp"

namespace owsol {

struct EncoderConfig {
    int image_side = 16;
    int channels = 1;
    int patch_size = 4;
    int d1 = 64;       // feature-map channels
    int d_hidden = 64; // projection-head hidden width
    int d2 = 32;       // representation width

    int map_side() const { return image_side / patch_size; }
    int positions() const { return map_side() * map_side(); }
    int patch_dim() const { return channels * patch_size * patch_size; }
    void validate() const; // throws ConfigError
};

// Row-major [out][in] weights.
struct LinearLayer {
    int in = 0;
    int out = 0;
    std::vector<float> w;
    std::vector<float> b;

    static LinearLayer zeros(int in, int out) {
        LinearLayer l;
        l.in = in;
        l.out = out;
        l.w.assign(static_cast<std::size_t>(in) * out, 0.0f);
        l.b.assign(static_cast<std::size_t>(out), 0.0f);
        return l;
    }
};

// Patch embed + two per-position mixer layers give the spatial map; a
// two-layer MLP head projects the pooled vector onto the unit sphere.
struct EncoderParams {
    LinearLayer patch_embed; // patch_dim -> d1
    LinearLayer mixer1;      // d1 -> d1 (ReLU after)
    LinearLayer mixer2;      // d1 -> d1
    LinearLayer proj1;       // d1 -> d_hidden (ReLU after)
    LinearLayer proj2;       // d_hidden -> d2

    template <typename F>
    void for_each(F&& fn) {
        fn("patch_embed", patch_embed);
        fn("mixer1", mixer1);
        fn("mixer2", mixer2);
        fn("proj1", proj1);
        fn("proj2", proj2);
    }
    template <typename F>
    void for_each(F&& fn) const {
        fn("patch_embed", patch_embed);
        fn("mixer1", mixer1);
        fn("mixer2", mixer2);
        fn("proj1", proj1);
        fn("proj2", proj2);
    }
};

using ParamGrads = EncoderParams;

struct EncoderState {
    EncoderParams online;
    EncoderParams momentum;
    long step_count = 0;
};

struct FeatureMap {
    int d1 = 0;
    int h = 0;
    int w = 0;
    std::vector<float> data; // [d1][h][w]

    float at(int c, int i, int j) const {
        return data[static_cast<std::size_t>((c * h + i) * w + j)];
    }
};

struct ForwardCache {
    std::vector<float> patches; // [P][patch_dim]
    std::vector<float> embed;   // [P][d1]
    std::vector<float> pre1;    // [P][d1] mixer1 pre-activation
    std::vector<float> act1;    // [P][d1]
    std::vector<float> map_pos; // [P][d1] mixer2 output, position-major
    std::vector<float> pooled;  // [d1]
    std::vector<float> proj_pre;  // [d_hidden]
    std::vector<float> proj_act;  // [d_hidden]
    std::vector<float> z_raw;     // [d2] pre-normalization
    std::vector<float> z;         // [d2] unit norm
    double z_norm = 0.0;
};

EncoderParams init_params(const EncoderConfig& cfg, Rng& rng);
EncoderState init_state(const EncoderConfig& cfg, std::uint64_t seed);

FeatureMap forward_map(const EncoderConfig& cfg, const EncoderParams& p,
                       const ToyImage& image);
std::vector<float> pool(const FeatureMap& m);
// Unit-norm projection; throws DegenerateNorm when the raw output collapses.
std::vector<float> project(const EncoderConfig& cfg, const EncoderParams& p,
                           std::span<const float> pooled);
ForwardCache forward_full(const EncoderConfig& cfg, const EncoderParams& p,
                          const ToyImage& image);

ParamGrads zero_grads(const EncoderConfig& cfg);

// Accumulates d(z . grad_z)/d(theta) into grads, normalization Jacobian included.
void backward(const EncoderConfig& cfg, const EncoderParams& p, const ForwardCache& c,
              std::span<const float> grad_z, ParamGrads& grads);
// Same but with the upstream gradient arriving at the pooled vector.
void backward_from_pooled(const EncoderConfig& cfg, const EncoderParams& p,
                          const ForwardCache& c, std::span<const float> grad_pooled,
                          ParamGrads& grads);

void momentum_update(EncoderState& state, float coef);

struct SgdState {
    EncoderParams velocity;
};
SgdState init_sgd_state(const EncoderConfig& cfg);
// SGD with momentum; L2 decay is added to the gradient before the momentum step.
void sgd_step(EncoderParams& params, const ParamGrads& grads, SgdState& state, float lr,
              float weight_decay, float sgd_momentum);
void sgd_step_layer(LinearLayer& layer, const LinearLayer& grad, LinearLayer& velocity,
                    float lr, float weight_decay, float sgd_momentum);

// ---------------------------------------------------------------------------
// Batch representation extraction
// ---------------------------------------------------------------------------

enum class RepSource { Online, Momentum };

struct RepMatrix {
    int rows = 0;
    int dim = 0;
    std::vector<float> data;
    std::vector<long> sample_ids;
    RepSource source = RepSource::Momentum;

    std::span<const float> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * dim,
                static_cast<std::size_t>(dim)};
    }
};

RepMatrix extract_representations(const EncoderConfig& cfg, const EncoderParams& p,
                                  const std::vector<const Sample*>& samples,
                                  RepSource tag, int workers = 1);

// Pooled features plus per-sample maps, for the localization pipeline.
struct FeatureSet {
    int d1 = 0;
    std::vector<long> sample_ids;
    std::vector<float> pooled; // [n][d1]
    std::vector<FeatureMap> maps;
};

FeatureSet extract_features(const EncoderConfig& cfg, const EncoderParams& p,
                            const std::vector<const Sample*>& samples, int workers = 1);

} // namespace owsol
