#pragma once

#include <span>
#include <vector>

#include "owsol/banks.hpp"
#include "owsol/rng.hpp"

namespace owsol {

// Loss value plus the gradient with respect to the anchor representation.
// Banks hold detached snapshots; nothing flows into queue entries or
// centroids.
struct LossOutput {
    double value = 0.0;
    std::vector<double> grad_z;
};

// Supervised contrastive loss over the representation bank: positives are the
// anchor's class queue, the denominator runs over the whole bank.
LossOutput scl_loss(std::span<const float> z, int y, const RepBank& bank, double tau);

// One-centroid loss with the per-cluster density as adaptive temperature.
LossOutput ocl_loss(std::span<const float> z, const CentroidBank& bank);

// Multi-centroid loss with an explicit positive set (the l nearest) and an
// explicit negative index set. The positive logit carries no temperature
// unless divide_positive is set (then it divides by the mean positive phi).
LossOutput mcl_loss_with_sets(std::span<const float> z, const CentroidBank& bank,
                              std::span<const int> positive_indices,
                              std::span<const int> negative_indices,
                              bool divide_positive = false);

// Samples n_neg negatives uniformly without replacement from the centroids
// outside the anchor's positive set. n_neg = n_c - l_pos covers them all.
LossOutput mcl_loss(std::span<const float> z, const CentroidBank& bank, int l_pos,
                    int n_neg, Rng& rng, bool divide_positive = false);

// Weighted combination; gradients combine linearly.
LossOutput total_loss(const LossOutput& scl, const LossOutput& mcl, double alpha,
                      double beta);

} // namespace owsol
