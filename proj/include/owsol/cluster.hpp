#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "owsol/errors.hpp"

namespace owsol {

inline constexpr double kPhiFloor = 0.01;

struct KMeansResult {
    int k = 0;
    int dim = 0;
    std::vector<double> centroids; // [k][dim]
    std::vector<int> assignment;   // per point
    double inertia = 0.0;
    int iterations_run = 0;
    std::vector<double> inertia_history; // one entry per Lloyd iteration

    std::span<const double> centroid(int c) const {
        return {centroids.data() + static_cast<std::size_t>(c) * dim,
                static_cast<std::size_t>(dim)};
    }
};

// k-means++ seeding, Lloyd iterations until the assignment is stable or
// max_iters; empty clusters are repaired by stealing the point farthest from
// its centroid. Bit-deterministic given (points, k, seed).
KMeansResult kmeans(std::span<const float> points, int n, int dim, int k,
                    int max_iters, std::uint64_t seed);

// Mean member distance clamped from below; used as the adaptive temperature.
double density(std::span<const double> member_dists, int v,
               double floor = kPhiFloor);

struct SweepPoint {
    int k = 0;
    double inertia = 0.0;
    double labeled_acc = 0.0;
};

struct ClassCountResult {
    int k_hat = 0;
    std::vector<SweepPoint> sweep; // all evaluated candidates, ascending k
};

// Shrinking-grid search over [k_min, k_max]; each candidate k is scored by
// Hungarian clustering accuracy on a held-out half of the labeled rows.
ClassCountResult estimate_class_count(std::span<const float> reps, int n, int dim,
                                      std::span<const int> labeled_rows,
                                      std::span<const int> labels, int k_min,
                                      int k_max, std::uint64_t seed);

} // namespace owsol
