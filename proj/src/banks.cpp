#include "owsol/banks.hpp"

#include <algorithm>
#include <cmath>

namespace owsol {

RepBank::RepBank(std::vector<int> class_ids, int n_z, int dim)
    : class_ids_(std::move(class_ids)), n_z_(n_z), dim_(dim) {
    std::sort(class_ids_.begin(), class_ids_.end());
    queues_.resize(class_ids_.size());
    for (std::size_t i = 0; i < class_ids_.size(); ++i)
        class_index_.emplace(class_ids_[i], i);
}

void RepBank::enqueue(int y, std::span<const float> z) {
    auto it = class_index_.find(y);
    if (it == class_index_.end())
        throw UnknownClass("enqueue for unknown class " + std::to_string(y));
    auto& q = queues_[it->second];
    q.emplace_back(z.begin(), z.end());
    if (static_cast<int>(q.size()) > n_z_) q.pop_front();
    flat_dirty_ = true;
}

std::vector<std::vector<float>> RepBank::positives(int y) const {
    auto it = class_index_.find(y);
    if (it == class_index_.end())
        throw UnknownClass("positives for unknown class " + std::to_string(y));
    const auto& q = queues_[it->second];
    return {q.begin(), q.end()};
}

RepMatrix RepBank::all() const {
    RepMatrix m;
    m.dim = dim_;
    m.rows = static_cast<int>(class_ids_.size()) * n_z_;
    m.source = RepSource::Momentum;
    m.data.reserve(static_cast<std::size_t>(m.rows) * dim_);
    for (const auto& q : queues_)
        for (const auto& z : q) m.data.insert(m.data.end(), z.begin(), z.end());
    return m;
}

const RepBank::Flat& RepBank::flat() const {
    if (flat_dirty_) {
        flat_.rows = static_cast<int>(class_ids_.size()) * n_z_;
        flat_.dim = dim_;
        flat_.data.clear();
        flat_.data.reserve(static_cast<std::size_t>(flat_.rows) * dim_);
        flat_.class_rows.clear();
        int row = 0;
        for (std::size_t c = 0; c < class_ids_.size(); ++c) {
            const int begin = row;
            for (const auto& z : queues_[c]) {
                flat_.data.insert(flat_.data.end(), z.begin(), z.end());
                ++row;
            }
            flat_.class_rows[class_ids_[c]] = {begin, row};
        }
        flat_dirty_ = false;
    }
    return flat_;
}

bool RepBank::lengths_ok() const {
    for (const auto& q : queues_)
        if (static_cast<int>(q.size()) != n_z_) return false;
    return true;
}

RepBank init_rep_bank(const RepMatrix& reps, std::span<const int> labels,
                      const std::vector<int>& known_ids, int n_z, Rng& rng) {
    if (static_cast<std::size_t>(reps.rows) != labels.size())
        throw LengthMismatch("labels misaligned with representations");
    RepBank bank(known_ids, n_z, reps.dim);
    std::map<int, std::vector<int>> rows_by_class;
    for (int r = 0; r < reps.rows; ++r)
        rows_by_class[labels[static_cast<std::size_t>(r)]].push_back(r);
    for (int y : bank.class_ids()) {
        auto it = rows_by_class.find(y);
        if (it == rows_by_class.end() || it->second.empty())
            throw EmptyClass("no labeled samples for class " + std::to_string(y));
        const auto& rows = it->second;
        for (int i = 0; i < n_z; ++i) {
            const int pick = rows[static_cast<std::size_t>(
                rng.next_below(static_cast<std::uint64_t>(rows.size())))];
            bank.enqueue(y, reps.row(pick));
        }
    }
    return bank;
}

CentroidBank rebuild_centroids(const RepMatrix& reps, int n_c, int kmeans_max_iters,
                               std::uint64_t seed) {
    if (reps.rows < n_c)
        throw TooFewPoints("need >= n_c representations, got " +
                           std::to_string(reps.rows));
    KMeansResult km = kmeans(reps.data, reps.rows, reps.dim, n_c, kmeans_max_iters, seed);

    CentroidBank bank;
    bank.n_c = n_c;
    bank.dim = reps.dim;
    bank.member_counts.assign(static_cast<std::size_t>(n_c), 0);
    std::vector<double> dist_sums(static_cast<std::size_t>(n_c), 0.0);
    for (int r = 0; r < reps.rows; ++r) {
        const int a = km.assignment[static_cast<std::size_t>(r)];
        bank.member_counts[static_cast<std::size_t>(a)]++;
        double d2 = 0.0;
        auto row = reps.row(r);
        auto cen = km.centroid(a);
        for (int d = 0; d < reps.dim; ++d) {
            const double diff = double(row[static_cast<std::size_t>(d)]) -
                                cen[static_cast<std::size_t>(d)];
            d2 += diff * diff;
        }
        dist_sums[static_cast<std::size_t>(a)] += std::sqrt(d2);
        const long sid = reps.sample_ids.empty()
                             ? static_cast<long>(r)
                             : reps.sample_ids[static_cast<std::size_t>(r)];
        bank.assignment[sid] = a;
    }

    bank.phi.resize(static_cast<std::size_t>(n_c));
    for (int c = 0; c < n_c; ++c) {
        const int v = bank.member_counts[static_cast<std::size_t>(c)];
        bank.phi[static_cast<std::size_t>(c)] = static_cast<float>(
            v > 0 ? std::max(kPhiFloor, dist_sums[static_cast<std::size_t>(c)] / v)
                  : kPhiFloor);
    }

    // Unit-normalize after the density pass so dot products stay in [-1, 1].
    bank.centroids.resize(static_cast<std::size_t>(n_c) * reps.dim);
    for (int c = 0; c < n_c; ++c) {
        auto cen = km.centroid(c);
        double nrm = 0.0;
        for (double v : cen) nrm += v * v;
        nrm = std::sqrt(nrm);
        const double inv = nrm > 1e-12 ? 1.0 / nrm : 0.0;
        for (int d = 0; d < reps.dim; ++d)
            bank.centroids[static_cast<std::size_t>(c) * reps.dim + d] =
                static_cast<float>(cen[static_cast<std::size_t>(d)] * inv);
    }
    return bank;
}

std::vector<NearestCentroid> nearest_centroids(const CentroidBank& bank,
                                               std::span<const float> z, int l) {
    if (l < 1 || l > bank.n_c)
        throw RangeInvalid("l must be in [1, n_c]");
    std::vector<NearestCentroid> all(static_cast<std::size_t>(bank.n_c));
    for (int c = 0; c < bank.n_c; ++c) {
        double dot = 0.0;
        auto cen = bank.centroid(c);
        for (int d = 0; d < bank.dim; ++d)
            dot += double(z[static_cast<std::size_t>(d)]) *
                   double(cen[static_cast<std::size_t>(d)]);
        all[static_cast<std::size_t>(c)] = {c, static_cast<float>(dot),
                                            bank.phi[static_cast<std::size_t>(c)]};
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.dot > b.dot; // ties keep ascending index via stable sort
    });
    all.resize(static_cast<std::size_t>(l));
    return all;
}

} // namespace owsol
