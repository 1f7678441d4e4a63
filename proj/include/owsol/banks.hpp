#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "owsol/cluster.hpp"
#include "owsol/encoder.hpp"

namespace owsol {

// Per-known-class FIFO of exactly n_z unit-norm representations. Single
// writer; snapshots handed out are copies.
class RepBank {
public:
    RepBank() = default;
    RepBank(std::vector<int> class_ids, int n_z, int dim);

    int n_z() const { return n_z_; }
    int dim() const { return dim_; }
    const std::vector<int>& class_ids() const { return class_ids_; }
    bool has_class(int y) const { return class_index_.count(y) != 0; }

    void enqueue(int y, std::span<const float> z); // throws UnknownClass

    std::vector<std::vector<float>> positives(int y) const; // throws UnknownClass

    // All entries in stable (class, age) order, one row per entry.
    RepMatrix all() const;

    // Flattened view for the hot loss path; rebuilt lazily after enqueues.
    struct Flat {
        int rows = 0;
        int dim = 0;
        std::vector<float> data;
        std::map<int, std::pair<int, int>> class_rows; // y -> [begin, end)
    };
    const Flat& flat() const;

    bool lengths_ok() const; // every queue exactly n_z

private:
    std::vector<int> class_ids_;
    std::map<int, std::size_t> class_index_;
    std::vector<std::deque<std::vector<float>>> queues_;
    int n_z_ = 0;
    int dim_ = 0;
    mutable Flat flat_;
    mutable bool flat_dirty_ = true;
};

// Fills each class queue by sampling rows of that class from the provided
// momentum representations, with replacement when a class has fewer than n_z.
RepBank init_rep_bank(const RepMatrix& reps, std::span<const int> labels,
                      const std::vector<int>& known_ids, int n_z, Rng& rng);

// Semantic-centroid bank: unit-normalized centroids, per-cluster density phi
// (floor-clamped), point assignments keyed by sample id.
struct CentroidBank {
    int n_c = 0;
    int dim = 0;
    std::vector<float> centroids; // [n_c][dim], unit norm
    std::vector<float> phi;       // >= kPhiFloor
    std::map<long, int> assignment;
    std::vector<int> member_counts;

    std::span<const float> centroid(int c) const {
        return {centroids.data() + static_cast<std::size_t>(c) * dim,
                static_cast<std::size_t>(dim)};
    }
};

// k-means over the rows, phi from raw (pre-normalization) centroid distances,
// then centroids scaled to unit length.
CentroidBank rebuild_centroids(const RepMatrix& reps, int n_c, int kmeans_max_iters,
                               std::uint64_t seed);

struct NearestCentroid {
    int index = 0;
    float dot = 0.0f;
    float phi = 0.0f;
};

// Top-l by descending dot product, ties by ascending index.
std::vector<NearestCentroid> nearest_centroids(const CentroidBank& bank,
                                               std::span<const float> z, int l);

} // namespace owsol
