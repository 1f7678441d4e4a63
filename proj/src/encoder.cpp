#include "owsol/encoder.hpp"

#include <cmath>

#include "owsol/parallel.hpp"

namespace owsol {

void EncoderConfig::validate() const {
    if (image_side < 1 || channels < 1 || patch_size < 1)
        throw ConfigError("encoder dims must be positive");
    if (image_side % patch_size != 0)
        throw ConfigError("patch_size must divide image_side");
    if (d1 < 1 || d_hidden < 1 || d2 < 1)
        throw ConfigError("d1, d_hidden, d2 must be positive");
}

namespace {

// y = W x + b, double accumulation, f32 storage.
void matvec(const LinearLayer& l, const float* x, float* y) {
    for (int o = 0; o < l.out; ++o) {
        double acc = l.b[static_cast<std::size_t>(o)];
        const float* wr = l.w.data() + static_cast<std::size_t>(o) * l.in;
        for (int i = 0; i < l.in; ++i) acc += double(wr[i]) * double(x[i]);
        y[o] = static_cast<float>(acc);
    }
}

// x_grad += W^T g; also accumulates layer grads from (g, x).
void matvec_backward(const LinearLayer& l, const float* x, const float* g,
                     LinearLayer& grad, float* x_grad) {
    for (int o = 0; o < l.out; ++o) {
        const double go = g[o];
        grad.b[static_cast<std::size_t>(o)] += static_cast<float>(go);
        const float* wr = l.w.data() + static_cast<std::size_t>(o) * l.in;
        float* gr = grad.w.data() + static_cast<std::size_t>(o) * l.in;
        for (int i = 0; i < l.in; ++i) {
            gr[i] += static_cast<float>(go * x[i]);
            if (x_grad) x_grad[i] += static_cast<float>(go * wr[i]);
        }
    }
}

void relu_inplace(float* v, int n) {
    for (int i = 0; i < n; ++i) v[i] = v[i] > 0.0f ? v[i] : 0.0f;
}

LinearLayer init_layer(int in, int out, Rng& rng) {
    LinearLayer l = LinearLayer::zeros(in, out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& w : l.w) w = static_cast<float>(rng.uniform(-bound, bound));
    for (auto& b : l.b) b = static_cast<float>(rng.uniform(-bound, bound));
    return l;
}

void gather_patch(const EncoderConfig& cfg, const ToyImage& img, int pi, int pj,
                  float* out) {
    const int p = cfg.patch_size;
    int idx = 0;
    for (int c = 0; c < cfg.channels; ++c)
        for (int dy = 0; dy < p; ++dy)
            for (int dx = 0; dx < p; ++dx)
                out[idx++] = img.at(c, pi * p + dy, pj * p + dx);
}

} // namespace

EncoderParams init_params(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    EncoderParams p;
    p.patch_embed = init_layer(cfg.patch_dim(), cfg.d1, rng);
    p.mixer1 = init_layer(cfg.d1, cfg.d1, rng);
    p.mixer2 = init_layer(cfg.d1, cfg.d1, rng);
    p.proj1 = init_layer(cfg.d1, cfg.d_hidden, rng);
    p.proj2 = init_layer(cfg.d_hidden, cfg.d2, rng);
    return p;
}

EncoderState init_state(const EncoderConfig& cfg, std::uint64_t seed) {
    Rng rng = Rng::keyed(seed, 7001);
    EncoderState s;
    s.online = init_params(cfg, rng);
    s.momentum = s.online;
    s.step_count = 0;
    return s;
}

ForwardCache forward_full(const EncoderConfig& cfg, const EncoderParams& p,
                          const ToyImage& image) {
    if (image.width != cfg.image_side || image.height != cfg.image_side ||
        image.channels != cfg.channels)
        throw ShapeMismatch("image dims do not match encoder config");

    const int P = cfg.positions();
    const int pd = cfg.patch_dim();
    const int ms = cfg.map_side();
    ForwardCache c;
    c.patches.resize(static_cast<std::size_t>(P) * pd);
    c.embed.resize(static_cast<std::size_t>(P) * cfg.d1);
    c.pre1.resize(static_cast<std::size_t>(P) * cfg.d1);
    c.act1.resize(static_cast<std::size_t>(P) * cfg.d1);
    c.map_pos.resize(static_cast<std::size_t>(P) * cfg.d1);

    for (int pi = 0; pi < ms; ++pi) {
        for (int pj = 0; pj < ms; ++pj) {
            const int pos = pi * ms + pj;
            float* patch = c.patches.data() + static_cast<std::size_t>(pos) * pd;
            gather_patch(cfg, image, pi, pj, patch);
            float* e = c.embed.data() + static_cast<std::size_t>(pos) * cfg.d1;
            matvec(p.patch_embed, patch, e);
            float* pre = c.pre1.data() + static_cast<std::size_t>(pos) * cfg.d1;
            matvec(p.mixer1, e, pre);
            float* act = c.act1.data() + static_cast<std::size_t>(pos) * cfg.d1;
            std::copy(pre, pre + cfg.d1, act);
            relu_inplace(act, cfg.d1);
            matvec(p.mixer2, act,
                   c.map_pos.data() + static_cast<std::size_t>(pos) * cfg.d1);
        }
    }

    c.pooled.assign(static_cast<std::size_t>(cfg.d1), 0.0f);
    for (int ch = 0; ch < cfg.d1; ++ch) {
        double acc = 0.0;
        for (int pos = 0; pos < P; ++pos)
            acc += c.map_pos[static_cast<std::size_t>(pos) * cfg.d1 + ch];
        c.pooled[static_cast<std::size_t>(ch)] = static_cast<float>(acc / P);
    }

    c.proj_pre.resize(static_cast<std::size_t>(cfg.d_hidden));
    matvec(p.proj1, c.pooled.data(), c.proj_pre.data());
    c.proj_act = c.proj_pre;
    relu_inplace(c.proj_act.data(), cfg.d_hidden);
    c.z_raw.resize(static_cast<std::size_t>(cfg.d2));
    matvec(p.proj2, c.proj_act.data(), c.z_raw.data());

    double nrm = 0.0;
    for (float v : c.z_raw) nrm += double(v) * double(v);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw DegenerateNorm("projection output norm below 1e-12");
    c.z_norm = nrm;
    c.z.resize(static_cast<std::size_t>(cfg.d2));
    for (int i = 0; i < cfg.d2; ++i)
        c.z[static_cast<std::size_t>(i)] =
            static_cast<float>(c.z_raw[static_cast<std::size_t>(i)] / nrm);
    return c;
}

FeatureMap forward_map(const EncoderConfig& cfg, const EncoderParams& p,
                       const ToyImage& image) {
    ForwardCache c = forward_full(cfg, p, image);
    const int ms = cfg.map_side();
    FeatureMap m;
    m.d1 = cfg.d1;
    m.h = ms;
    m.w = ms;
    m.data.resize(static_cast<std::size_t>(cfg.d1) * ms * ms);
    for (int pos = 0; pos < cfg.positions(); ++pos)
        for (int ch = 0; ch < cfg.d1; ++ch)
            m.data[static_cast<std::size_t>(ch) * ms * ms + pos] =
                c.map_pos[static_cast<std::size_t>(pos) * cfg.d1 + ch];
    return m;
}

std::vector<float> pool(const FeatureMap& m) {
    std::vector<float> out(static_cast<std::size_t>(m.d1), 0.0f);
    const int hw = m.h * m.w;
    for (int c = 0; c < m.d1; ++c) {
        double acc = 0.0;
        for (int p = 0; p < hw; ++p)
            acc += m.data[static_cast<std::size_t>(c) * hw + p];
        out[static_cast<std::size_t>(c)] = static_cast<float>(acc / hw);
    }
    return out;
}

std::vector<float> project(const EncoderConfig& cfg, const EncoderParams& p,
                           std::span<const float> pooled) {
    if (static_cast<int>(pooled.size()) != cfg.d1)
        throw ShapeMismatch("pooled vector size != d1");
    std::vector<float> hidden(static_cast<std::size_t>(cfg.d_hidden));
    matvec(p.proj1, pooled.data(), hidden.data());
    relu_inplace(hidden.data(), cfg.d_hidden);
    std::vector<float> z(static_cast<std::size_t>(cfg.d2));
    matvec(p.proj2, hidden.data(), z.data());
    double nrm = 0.0;
    for (float v : z) nrm += double(v) * double(v);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw DegenerateNorm("projection output norm below 1e-12");
    for (auto& v : z) v = static_cast<float>(v / nrm);
    return z;
}

ParamGrads zero_grads(const EncoderConfig& cfg) {
    ParamGrads g;
    g.patch_embed = LinearLayer::zeros(cfg.patch_dim(), cfg.d1);
    g.mixer1 = LinearLayer::zeros(cfg.d1, cfg.d1);
    g.mixer2 = LinearLayer::zeros(cfg.d1, cfg.d1);
    g.proj1 = LinearLayer::zeros(cfg.d1, cfg.d_hidden);
    g.proj2 = LinearLayer::zeros(cfg.d_hidden, cfg.d2);
    return g;
}

void backward_from_pooled(const EncoderConfig& cfg, const EncoderParams& p,
                          const ForwardCache& c, std::span<const float> grad_pooled,
                          ParamGrads& grads) {
    const int P = cfg.positions();
    // Pool backward: every position sees grad_pooled / P.
    std::vector<float> g_map(static_cast<std::size_t>(cfg.d1));
    std::vector<float> g_act(static_cast<std::size_t>(cfg.d1));
    std::vector<float> g_embed(static_cast<std::size_t>(cfg.d1));
    for (int ch = 0; ch < cfg.d1; ++ch)
        g_map[static_cast<std::size_t>(ch)] = grad_pooled[static_cast<std::size_t>(ch)] / P;

    for (int pos = 0; pos < P; ++pos) {
        const float* act = c.act1.data() + static_cast<std::size_t>(pos) * cfg.d1;
        const float* pre = c.pre1.data() + static_cast<std::size_t>(pos) * cfg.d1;
        const float* emb = c.embed.data() + static_cast<std::size_t>(pos) * cfg.d1;
        const float* patch =
            c.patches.data() + static_cast<std::size_t>(pos) * cfg.patch_dim();

        std::fill(g_act.begin(), g_act.end(), 0.0f);
        matvec_backward(p.mixer2, act, g_map.data(), grads.mixer2, g_act.data());
        for (int i = 0; i < cfg.d1; ++i)
            if (pre[i] <= 0.0f) g_act[static_cast<std::size_t>(i)] = 0.0f;
        std::fill(g_embed.begin(), g_embed.end(), 0.0f);
        matvec_backward(p.mixer1, emb, g_act.data(), grads.mixer1, g_embed.data());
        matvec_backward(p.patch_embed, patch, g_embed.data(), grads.patch_embed,
                        nullptr);
    }
}

void backward(const EncoderConfig& cfg, const EncoderParams& p, const ForwardCache& c,
              std::span<const float> grad_z, ParamGrads& grads) {
    if (static_cast<int>(grad_z.size()) != cfg.d2)
        throw ShapeMismatch("grad_z size != d2");

    // Through z = u / |u|:  du = (g - (g.z) z) / |u|.
    double gdotz = 0.0;
    for (int i = 0; i < cfg.d2; ++i)
        gdotz += double(grad_z[static_cast<std::size_t>(i)]) *
                 double(c.z[static_cast<std::size_t>(i)]);
    std::vector<float> g_raw(static_cast<std::size_t>(cfg.d2));
    for (int i = 0; i < cfg.d2; ++i)
        g_raw[static_cast<std::size_t>(i)] = static_cast<float>(
            (double(grad_z[static_cast<std::size_t>(i)]) -
             gdotz * double(c.z[static_cast<std::size_t>(i)])) /
            c.z_norm);

    std::vector<float> g_hidden(static_cast<std::size_t>(cfg.d_hidden), 0.0f);
    matvec_backward(p.proj2, c.proj_act.data(), g_raw.data(), grads.proj2,
                    g_hidden.data());
    for (int i = 0; i < cfg.d_hidden; ++i)
        if (c.proj_pre[static_cast<std::size_t>(i)] <= 0.0f)
            g_hidden[static_cast<std::size_t>(i)] = 0.0f;
    std::vector<float> g_pooled(static_cast<std::size_t>(cfg.d1), 0.0f);
    matvec_backward(p.proj1, c.pooled.data(), g_hidden.data(), grads.proj1,
                    g_pooled.data());
    backward_from_pooled(cfg, p, c, g_pooled, grads);
}

void momentum_update(EncoderState& state, float coef) {
    if (!(coef >= 0.0f && coef < 1.0f))
        throw ConfigError("momentum coefficient must be in [0, 1)");
    const double m = coef;
    auto blend = [m](LinearLayer& mom, const LinearLayer& onl) {
        for (std::size_t i = 0; i < mom.w.size(); ++i)
            mom.w[i] = static_cast<float>(m * mom.w[i] + (1.0 - m) * onl.w[i]);
        for (std::size_t i = 0; i < mom.b.size(); ++i)
            mom.b[i] = static_cast<float>(m * mom.b[i] + (1.0 - m) * onl.b[i]);
    };
    blend(state.momentum.patch_embed, state.online.patch_embed);
    blend(state.momentum.mixer1, state.online.mixer1);
    blend(state.momentum.mixer2, state.online.mixer2);
    blend(state.momentum.proj1, state.online.proj1);
    blend(state.momentum.proj2, state.online.proj2);
}

SgdState init_sgd_state(const EncoderConfig& cfg) { return SgdState{zero_grads(cfg)}; }

void sgd_step_layer(LinearLayer& layer, const LinearLayer& grad, LinearLayer& velocity,
                    float lr, float weight_decay, float sgd_momentum) {
    auto step = [&](std::vector<float>& p, const std::vector<float>& g,
                    std::vector<float>& v, bool decay) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            double d = g[i];
            if (decay) d += double(weight_decay) * p[i];
            v[i] = static_cast<float>(double(sgd_momentum) * v[i] + d);
            p[i] = static_cast<float>(p[i] - double(lr) * v[i]);
        }
    };
    step(layer.w, grad.w, velocity.w, true);
    step(layer.b, grad.b, velocity.b, true);
}

void sgd_step(EncoderParams& params, const ParamGrads& grads, SgdState& state, float lr,
              float weight_decay, float sgd_momentum) {
    sgd_step_layer(params.patch_embed, grads.patch_embed, state.velocity.patch_embed, lr,
                   weight_decay, sgd_momentum);
    sgd_step_layer(params.mixer1, grads.mixer1, state.velocity.mixer1, lr, weight_decay,
                   sgd_momentum);
    sgd_step_layer(params.mixer2, grads.mixer2, state.velocity.mixer2, lr, weight_decay,
                   sgd_momentum);
    sgd_step_layer(params.proj1, grads.proj1, state.velocity.proj1, lr, weight_decay,
                   sgd_momentum);
    sgd_step_layer(params.proj2, grads.proj2, state.velocity.proj2, lr, weight_decay,
                   sgd_momentum);
}

RepMatrix extract_representations(const EncoderConfig& cfg, const EncoderParams& p,
                                  const std::vector<const Sample*>& samples,
                                  RepSource tag, int workers) {
    RepMatrix m;
    m.rows = static_cast<int>(samples.size());
    m.dim = cfg.d2;
    m.source = tag;
    m.data.resize(static_cast<std::size_t>(m.rows) * m.dim);
    m.sample_ids.resize(samples.size());
    parallel_for(m.rows, workers, [&](int i) {
        ForwardCache c = forward_full(cfg, p, samples[static_cast<std::size_t>(i)]->image());
        std::copy(c.z.begin(), c.z.end(),
                  m.data.begin() + static_cast<std::size_t>(i) * cfg.d2);
        m.sample_ids[static_cast<std::size_t>(i)] =
            samples[static_cast<std::size_t>(i)]->id();
    });
    return m;
}

FeatureSet extract_features(const EncoderConfig& cfg, const EncoderParams& p,
                            const std::vector<const Sample*>& samples, int workers) {
    FeatureSet fs;
    fs.d1 = cfg.d1;
    fs.sample_ids.resize(samples.size());
    fs.pooled.resize(samples.size() * static_cast<std::size_t>(cfg.d1));
    fs.maps.resize(samples.size());
    parallel_for(static_cast<int>(samples.size()), workers, [&](int i) {
        const Sample* s = samples[static_cast<std::size_t>(i)];
        FeatureMap map = forward_map(cfg, p, s->image());
        std::vector<float> h = pool(map);
        std::copy(h.begin(), h.end(),
                  fs.pooled.begin() + static_cast<std::size_t>(i) * cfg.d1);
        fs.maps[static_cast<std::size_t>(i)] = std::move(map);
        fs.sample_ids[static_cast<std::size_t>(i)] = s->id();
    });
    return fs;
}

} // namespace owsol
