#include "owsol/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "owsol/core.hpp"
#include "owsol/evalkit.hpp"
#include "owsol/rng.hpp"

namespace owsol {

namespace {

double sq_dist(const double* a, const float* b, int dim) {
    double acc = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = a[i] - double(b[i]);
        acc += d * d;
    }
    return acc;
}

std::vector<double> kmeanspp_seed(std::span<const float> pts, int n, int dim, int k,
                                  Rng& rng) {
    std::vector<double> centroids(static_cast<std::size_t>(k) * dim);
    std::vector<double> mind(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
    int first = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    for (int d = 0; d < dim; ++d)
        centroids[static_cast<std::size_t>(d)] =
            pts[static_cast<std::size_t>(first) * dim + d];
    for (int c = 1; c < k; ++c) {
        const double* last = centroids.data() + static_cast<std::size_t>(c - 1) * dim;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d2 =
                sq_dist(last, pts.data() + static_cast<std::size_t>(i) * dim, dim);
            if (d2 < mind[static_cast<std::size_t>(i)])
                mind[static_cast<std::size_t>(i)] = d2;
            total += mind[static_cast<std::size_t>(i)];
        }
        int chosen;
        if (total <= 0.0) {
            chosen = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        } else {
            const double target = rng.uniform() * total;
            double run = 0.0;
            chosen = n - 1;
            for (int i = 0; i < n; ++i) {
                run += mind[static_cast<std::size_t>(i)];
                if (run >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        for (int d = 0; d < dim; ++d)
            centroids[static_cast<std::size_t>(c) * dim + d] =
                pts[static_cast<std::size_t>(chosen) * dim + d];
    }
    return centroids;
}

} // namespace

KMeansResult kmeans(std::span<const float> points, int n, int dim, int k,
                    int max_iters, std::uint64_t seed) {
    if (k < 1) throw RangeInvalid("k must be >= 1");
    if (n < k) throw TooFewPoints("need at least k points, got " + std::to_string(n));
    if (static_cast<std::size_t>(n) * dim != points.size())
        throw LengthMismatch("points span does not match n*dim");

    Rng rng = Rng::keyed(seed, 31337);
    KMeansResult res;
    res.k = k;
    res.dim = dim;
    res.centroids = kmeanspp_seed(points, n, dim, k, rng);
    res.assignment.assign(static_cast<std::size_t>(n), -1);

    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<int> counts(static_cast<std::size_t>(k));
    std::vector<double> dists(static_cast<std::size_t>(n));

    for (int iter = 0; iter < max_iters; ++iter) {
        // Assign to the nearest centroid, ties to the lowest index.
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const float* p = points.data() + static_cast<std::size_t>(i) * dim;
            int best = 0;
            double bestd = sq_dist(res.centroids.data(), p, dim);
            for (int c = 1; c < k; ++c) {
                const double d =
                    sq_dist(res.centroids.data() + static_cast<std::size_t>(c) * dim, p,
                            dim);
                if (d < bestd) {
                    bestd = d;
                    best = c;
                }
            }
            dists[static_cast<std::size_t>(i)] = bestd;
            if (res.assignment[static_cast<std::size_t>(i)] != best) {
                res.assignment[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        // Repair empty clusters with the globally farthest point, ascending
        // cluster order so bank shapes stay stable at exactly k.
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(res.assignment[static_cast<std::size_t>(i)])]++;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            int far = -1;
            double fard = -1.0;
            for (int i = 0; i < n; ++i) {
                const int a = res.assignment[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] <= 1) continue;
                if (dists[static_cast<std::size_t>(i)] > fard) {
                    fard = dists[static_cast<std::size_t>(i)];
                    far = i;
                }
            }
            if (far < 0) continue;
            counts[static_cast<std::size_t>(res.assignment[static_cast<std::size_t>(far)])]--;
            res.assignment[static_cast<std::size_t>(far)] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            dists[static_cast<std::size_t>(far)] = 0.0;
            changed = true;
        }

        // Update step: centroid = member mean.
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const int a = res.assignment[static_cast<std::size_t>(i)];
            const float* p = points.data() + static_cast<std::size_t>(i) * dim;
            double* s = sums.data() + static_cast<std::size_t>(a) * dim;
            for (int d = 0; d < dim; ++d) s[d] += p[d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) continue;
            for (int d = 0; d < dim; ++d)
                res.centroids[static_cast<std::size_t>(c) * dim + d] =
                    sums[static_cast<std::size_t>(c) * dim + d] /
                    counts[static_cast<std::size_t>(c)];
        }

        double inertia = 0.0;
        for (int i = 0; i < n; ++i)
            inertia += sq_dist(
                res.centroids.data() +
                    static_cast<std::size_t>(res.assignment[static_cast<std::size_t>(i)]) *
                        dim,
                points.data() + static_cast<std::size_t>(i) * dim, dim);
        res.inertia = inertia;
        res.inertia_history.push_back(inertia);
        res.iterations_run = iter + 1;
        if (!changed) break;
    }
    return res;
}

double density(std::span<const double> member_dists, int v, double floor) {
    if (v < 1) throw RangeInvalid("density needs v >= 1");
    double acc = 0.0;
    for (double d : member_dists) acc += d;
    return std::max(floor, acc / static_cast<double>(v));
}

namespace {

// Hungarian-matched accuracy of cluster assignments against labels on the
// held-out rows only.
double holdout_accuracy(const KMeansResult& km, std::span<const int> rows,
                        std::span<const int> labels) {
    std::vector<int> pred;
    std::vector<int> gt;
    std::vector<Role> roles;
    pred.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pred.push_back(km.assignment[static_cast<std::size_t>(rows[i])]);
        gt.push_back(labels[i]);
        roles.push_back(Role::Known);
    }
    return clus_acc(pred, gt, roles).acc.all;
}

} // namespace

ClassCountResult estimate_class_count(std::span<const float> reps, int n, int dim,
                                      std::span<const int> labeled_rows,
                                      std::span<const int> labels, int k_min,
                                      int k_max, std::uint64_t seed) {
    if (k_min < 1 || k_min > k_max || k_max > n)
        throw RangeInvalid("need 1 <= k_min <= k_max <= n");
    if (labeled_rows.empty() || labeled_rows.size() != labels.size())
        throw RangeInvalid("labeled subset empty or misaligned");

    ClassCountResult res;
    if (k_min == k_max) {
        res.k_hat = k_min;
        return res;
    }

    // Deterministic half split of the labeled rows; only the held-out half
    // scores candidates.
    std::vector<int> order(labeled_rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng split_rng = Rng::keyed(seed, 424242);
    split_rng.shuffle(order);
    std::vector<int> hold_rows;
    std::vector<int> hold_labels;
    for (std::size_t i = order.size() / 2; i < order.size(); ++i) {
        hold_rows.push_back(labeled_rows[static_cast<std::size_t>(order[i])]);
        hold_labels.push_back(labels[static_cast<std::size_t>(order[i])]);
    }

    std::map<int, SweepPoint> cache;
    auto score = [&](int k) -> const SweepPoint& {
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        KMeansResult km = kmeans(reps, n, dim, k, 100, seed + static_cast<std::uint64_t>(k));
        SweepPoint sp;
        sp.k = k;
        sp.inertia = km.inertia;
        sp.labeled_acc = holdout_accuracy(km, hold_rows, hold_labels);
        return cache.emplace(k, sp).first->second;
    };

    int lo = k_min, hi = k_max;
    while (hi - lo > 4) {
        std::set<int> grid;
        for (int g = 0; g < 5; ++g)
            grid.insert(lo + static_cast<int>(std::llround(double(hi - lo) * g / 4.0)));
        int best_k = *grid.begin();
        double best_acc = -1.0;
        for (int k : grid) {
            const SweepPoint& sp = score(k);
            if (sp.labeled_acc > best_acc) {
                best_acc = sp.labeled_acc;
                best_k = k;
            }
        }
        std::vector<int> gv(grid.begin(), grid.end());
        const auto pos = static_cast<std::size_t>(
            std::find(gv.begin(), gv.end(), best_k) - gv.begin());
        lo = gv[pos == 0 ? 0 : pos - 1];
        hi = gv[std::min(pos + 1, gv.size() - 1)];
    }
    int best_k = lo;
    double best_acc = -1.0;
    for (int k = lo; k <= hi; ++k) {
        const SweepPoint& sp = score(k);
        if (sp.labeled_acc > best_acc) {
            best_acc = sp.labeled_acc;
            best_k = k;
        }
    }
    res.k_hat = best_k;
    for (const auto& [k, sp] : cache) res.sweep.push_back(sp);
    return res;
}

} // namespace owsol
