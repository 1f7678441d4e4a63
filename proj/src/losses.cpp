#include "owsol/losses.hpp"

#include <algorithm>
#include <cmath>

namespace owsol {

namespace {

double dot_fd(std::span<const float> a, const float* b, int dim) {
    double acc = 0.0;
    for (int i = 0; i < dim; ++i) acc += double(a[static_cast<std::size_t>(i)]) * double(b[i]);
    return acc;
}

// Max-subtracted log-sum-exp plus softmax weights.
double log_sum_exp(const std::vector<double>& logits, std::vector<double>& softmax) {
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    double sum = 0.0;
    softmax.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        softmax[i] = std::exp(logits[i] - mx);
        sum += softmax[i];
    }
    for (auto& s : softmax) s /= sum;
    return mx + std::log(sum);
}

} // namespace

LossOutput scl_loss(std::span<const float> z, int y, const RepBank& bank, double tau) {
    if (tau <= 0.0) throw ConfigError("tau must be > 0");
    if (!bank.has_class(y))
        throw UnknownClass("scl_loss anchor class " + std::to_string(y) +
                           " not in bank");
    const auto& flat = bank.flat();
    const int dim = flat.dim;
    const auto [pos_begin, pos_end] = flat.class_rows.at(y);
    const int n_pos = pos_end - pos_begin;

    std::vector<double> logits(static_cast<std::size_t>(flat.rows));
    for (int r = 0; r < flat.rows; ++r)
        logits[static_cast<std::size_t>(r)] =
            dot_fd(z, flat.data.data() + static_cast<std::size_t>(r) * dim, dim) / tau;

    std::vector<double> softmax;
    const double lse = log_sum_exp(logits, softmax);

    double pos_mean_logit = 0.0;
    for (int r = pos_begin; r < pos_end; ++r)
        pos_mean_logit += logits[static_cast<std::size_t>(r)];
    pos_mean_logit /= n_pos;

    LossOutput out;
    out.value = lse - pos_mean_logit;
    out.grad_z.assign(static_cast<std::size_t>(dim), 0.0);
    for (int r = 0; r < flat.rows; ++r) {
        const double w = softmax[static_cast<std::size_t>(r)] / tau;
        const float* row = flat.data.data() + static_cast<std::size_t>(r) * dim;
        for (int d = 0; d < dim; ++d) out.grad_z[static_cast<std::size_t>(d)] += w * row[d];
    }
    const double wp = 1.0 / (tau * n_pos);
    for (int r = pos_begin; r < pos_end; ++r) {
        const float* row = flat.data.data() + static_cast<std::size_t>(r) * dim;
        for (int d = 0; d < dim; ++d) out.grad_z[static_cast<std::size_t>(d)] -= wp * row[d];
    }
    return out;
}

LossOutput ocl_loss(std::span<const float> z, const CentroidBank& bank) {
    if (bank.n_c < 1) throw RangeInvalid("empty centroid bank");
    const int dim = bank.dim;
    int nearest = 0;
    double best_dot = -std::numeric_limits<double>::infinity();
    std::vector<double> logits(static_cast<std::size_t>(bank.n_c));
    for (int c = 0; c < bank.n_c; ++c) {
        const double d = dot_fd(z, bank.centroids.data() + static_cast<std::size_t>(c) * dim, dim);
        if (d > best_dot) {
            best_dot = d;
            nearest = c;
        }
        logits[static_cast<std::size_t>(c)] = d / bank.phi[static_cast<std::size_t>(c)];
    }
    std::vector<double> softmax;
    const double lse = log_sum_exp(logits, softmax);

    LossOutput out;
    out.value = lse - logits[static_cast<std::size_t>(nearest)];
    out.grad_z.assign(static_cast<std::size_t>(dim), 0.0);
    for (int c = 0; c < bank.n_c; ++c) {
        double w = softmax[static_cast<std::size_t>(c)] / bank.phi[static_cast<std::size_t>(c)];
        if (c == nearest) w -= 1.0 / bank.phi[static_cast<std::size_t>(c)];
        const float* cen = bank.centroids.data() + static_cast<std::size_t>(c) * dim;
        for (int d = 0; d < dim; ++d) out.grad_z[static_cast<std::size_t>(d)] += w * cen[d];
    }
    return out;
}

LossOutput mcl_loss_with_sets(std::span<const float> z, const CentroidBank& bank,
                              std::span<const int> positive_indices,
                              std::span<const int> negative_indices,
                              bool divide_positive) {
    if (positive_indices.empty()) throw ConfigError("mcl needs >= 1 positive centroid");
    const int dim = bank.dim;
    const int L = static_cast<int>(positive_indices.size());

    // c* = mean of phi-scaled positives.
    std::vector<double> pooled(static_cast<std::size_t>(dim), 0.0);
    double phi_mean = 0.0;
    for (int idx : positive_indices) {
        const float* cen = bank.centroids.data() + static_cast<std::size_t>(idx) * dim;
        const double inv = 1.0 / bank.phi[static_cast<std::size_t>(idx)];
        for (int d = 0; d < dim; ++d) pooled[static_cast<std::size_t>(d)] += inv * cen[d];
        phi_mean += bank.phi[static_cast<std::size_t>(idx)];
    }
    for (auto& v : pooled) v /= L;
    phi_mean /= L;
    const double pos_scale = divide_positive ? 1.0 / phi_mean : 1.0;

    double pos_logit = 0.0;
    for (int d = 0; d < dim; ++d)
        pos_logit += double(z[static_cast<std::size_t>(d)]) * pooled[static_cast<std::size_t>(d)];
    pos_logit *= pos_scale;

    std::vector<double> logits;
    logits.reserve(negative_indices.size() + 1);
    logits.push_back(pos_logit);
    for (int idx : negative_indices) {
        const float* cen = bank.centroids.data() + static_cast<std::size_t>(idx) * dim;
        logits.push_back(dot_fd(z, cen, dim) / bank.phi[static_cast<std::size_t>(idx)]);
    }

    std::vector<double> softmax;
    const double lse = log_sum_exp(logits, softmax);

    LossOutput out;
    out.value = lse - pos_logit;
    out.grad_z.assign(static_cast<std::size_t>(dim), 0.0);
    const double wp = (softmax[0] - 1.0) * pos_scale;
    for (int d = 0; d < dim; ++d)
        out.grad_z[static_cast<std::size_t>(d)] += wp * pooled[static_cast<std::size_t>(d)];
    for (std::size_t j = 0; j < negative_indices.size(); ++j) {
        const int idx = negative_indices[j];
        const double w = softmax[j + 1] / bank.phi[static_cast<std::size_t>(idx)];
        const float* cen = bank.centroids.data() + static_cast<std::size_t>(idx) * dim;
        for (int d = 0; d < dim; ++d) out.grad_z[static_cast<std::size_t>(d)] += w * cen[d];
    }
    return out;
}

LossOutput mcl_loss(std::span<const float> z, const CentroidBank& bank, int l_pos,
                    int n_neg, Rng& rng, bool divide_positive) {
    if (l_pos < 1 || l_pos > bank.n_c || n_neg < 0 || l_pos + n_neg > bank.n_c)
        throw ConfigError("mcl_loss requires 1 <= l_pos and l_pos + n_neg <= n_c");

    const auto nearest = nearest_centroids(bank, z, l_pos);
    std::vector<char> is_pos(static_cast<std::size_t>(bank.n_c), 0);
    std::vector<int> pos;
    pos.reserve(nearest.size());
    for (const auto& nc : nearest) {
        pos.push_back(nc.index);
        is_pos[static_cast<std::size_t>(nc.index)] = 1;
    }

    std::vector<int> candidates;
    candidates.reserve(static_cast<std::size_t>(bank.n_c - l_pos));
    for (int c = 0; c < bank.n_c; ++c)
        if (!is_pos[static_cast<std::size_t>(c)]) candidates.push_back(c);

    std::vector<int> negs;
    if (n_neg == static_cast<int>(candidates.size())) {
        negs = candidates;
    } else {
        for (int slot : rng.sample_without_replacement(
                 static_cast<int>(candidates.size()), n_neg))
            negs.push_back(candidates[static_cast<std::size_t>(slot)]);
    }
    return mcl_loss_with_sets(z, bank, pos, negs, divide_positive);
}

LossOutput total_loss(const LossOutput& scl, const LossOutput& mcl, double alpha,
                      double beta) {
    LossOutput out;
    out.value = alpha * scl.value + beta * mcl.value;
    const std::size_t dim = std::max(scl.grad_z.size(), mcl.grad_z.size());
    if (!scl.grad_z.empty() && !mcl.grad_z.empty() &&
        scl.grad_z.size() != mcl.grad_z.size())
        throw LengthMismatch("total_loss gradient sizes differ");
    out.grad_z.assign(dim, 0.0);
    for (std::size_t i = 0; i < scl.grad_z.size(); ++i)
        out.grad_z[i] += alpha * scl.grad_z[i];
    for (std::size_t i = 0; i < mcl.grad_z.size(); ++i)
        out.grad_z[i] += beta * mcl.grad_z[i];
    return out;
}

} // namespace owsol
