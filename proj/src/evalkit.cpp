#include "owsol/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "owsol/errors.hpp"

namespace owsol {

namespace {

// Jonker-Volgenant style shortest augmenting path, O(n^2 m), rows <= cols.
// p[j] = row assigned to column j (1-based, 0 = free).
std::vector<int> solve_rect(const std::vector<std::vector<double>>& a, int n, int m) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(m) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = a[static_cast<std::size_t>(i0 - 1)]
                                    [static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    return p;
}

} // namespace

std::vector<std::pair<int, int>> hungarian(
    const std::vector<std::vector<double>>& cost) {
    const int r = static_cast<int>(cost.size());
    const int c = r > 0 ? static_cast<int>(cost[0].size()) : 0;
    if (r == 0 || c == 0) return {};
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != c)
            throw LengthMismatch("ragged cost matrix");
        for (double x : row)
            if (!std::isfinite(x)) throw RangeInvalid("non-finite cost");
    }

    std::vector<std::pair<int, int>> out;
    if (r <= c) {
        auto p = solve_rect(cost, r, c);
        for (int j = 1; j <= c; ++j)
            if (p[static_cast<std::size_t>(j)] != 0)
                out.emplace_back(p[static_cast<std::size_t>(j)] - 1, j - 1);
    } else {
        std::vector<std::vector<double>> t(static_cast<std::size_t>(c),
                                           std::vector<double>(static_cast<std::size_t>(r)));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                t[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                    cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        auto p = solve_rect(t, c, r);
        for (int j = 1; j <= r; ++j)
            if (p[static_cast<std::size_t>(j)] != 0)
                out.emplace_back(j - 1, p[static_cast<std::size_t>(j)] - 1);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ClusAccResult clus_acc(std::span<const int> pred_clusters,
                       std::span<const int> gt_labels, std::span<const Role> roles) {
    if (pred_clusters.size() != gt_labels.size() || gt_labels.size() != roles.size())
        throw LengthMismatch("clus_acc inputs must have equal length");

    std::vector<int> cluster_ids(pred_clusters.begin(), pred_clusters.end());
    std::sort(cluster_ids.begin(), cluster_ids.end());
    cluster_ids.erase(std::unique(cluster_ids.begin(), cluster_ids.end()),
                      cluster_ids.end());
    std::vector<int> class_ids(gt_labels.begin(), gt_labels.end());
    std::sort(class_ids.begin(), class_ids.end());
    class_ids.erase(std::unique(class_ids.begin(), class_ids.end()), class_ids.end());

    std::map<int, int> cl_idx, cs_idx;
    for (std::size_t i = 0; i < cluster_ids.size(); ++i)
        cl_idx[cluster_ids[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < class_ids.size(); ++i)
        cs_idx[class_ids[i]] = static_cast<int>(i);

    std::vector<std::vector<double>> cost(
        cluster_ids.size(), std::vector<double>(class_ids.size(), 0.0));
    for (std::size_t i = 0; i < pred_clusters.size(); ++i)
        cost[static_cast<std::size_t>(cl_idx[pred_clusters[i]])]
            [static_cast<std::size_t>(cs_idx[gt_labels[i]])] -= 1.0;

    ClusAccResult res;
    for (const auto& [ci, cj] : hungarian(cost))
        res.mapping[cluster_ids[static_cast<std::size_t>(ci)]] =
            class_ids[static_cast<std::size_t>(cj)];

    RoleCounts hit{};
    for (std::size_t i = 0; i < pred_clusters.size(); ++i) {
        const auto it = res.mapping.find(pred_clusters[i]);
        const bool ok = it != res.mapping.end() && it->second == gt_labels[i];
        res.counts.all++;
        if (ok) hit.all++;
        switch (roles[i]) {
            case Role::Known: res.counts.known++; hit.known += ok; break;
            case Role::NovS: res.counts.nov_s++; hit.nov_s += ok; break;
            case Role::NovD: res.counts.nov_d++; hit.nov_d += ok; break;
        }
    }
    auto frac = [](long h, long n) { return n > 0 ? double(h) / double(n) : 0.0; };
    res.acc.known = frac(hit.known, res.counts.known);
    res.acc.nov_s = frac(hit.nov_s, res.counts.nov_s);
    res.acc.nov_d = frac(hit.nov_d, res.counts.nov_d);
    res.acc.all = frac(hit.all, res.counts.all);
    return res;
}

double iou(const Box& a, const Box& b) {
    const long long ix = std::max(
        0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const long long iy = std::max(
        0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const long long inter = ix * iy;
    const long long uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

namespace {

LocAccResult score_boxes(const std::map<long, BoxPrediction>& preds,
                         const std::vector<GtEntry>& gts,
                         std::span<const double> ratios,
                         const std::map<int, int>* cluster_mapping) {
    LocAccResult res;
    std::array<RoleCounts, 3> hits{};
    for (const auto& gt : gts) {
        const auto it = preds.find(gt.sample_id);
        if (it == preds.end())
            throw MissingPrediction("no prediction for sample " +
                                    std::to_string(gt.sample_id));
        const BoxPrediction& pred = it->second;
        double best = 0.0;
        for (const Box& b : gt.gt_boxes) best = std::max(best, iou(pred.box, b));
        bool class_ok = true;
        if (cluster_mapping) {
            const auto mit = cluster_mapping->find(pred.cluster_id);
            class_ok = mit != cluster_mapping->end() && mit->second == gt.gt_label;
        }
        res.counts.all++;
        switch (gt.role) {
            case Role::Known: res.counts.known++; break;
            case Role::NovS: res.counts.nov_s++; break;
            case Role::NovD: res.counts.nov_d++; break;
        }
        for (std::size_t r = 0; r < ratios.size(); ++r) {
            const bool ok = class_ok && best >= ratios[r];
            if (!ok) continue;
            hits[r].all++;
            switch (gt.role) {
                case Role::Known: hits[r].known++; break;
                case Role::NovS: hits[r].nov_s++; break;
                case Role::NovD: hits[r].nov_d++; break;
            }
        }
    }
    auto frac = [](long h, long n) { return n > 0 ? double(h) / double(n) : 0.0; };
    for (std::size_t r = 0; r < ratios.size(); ++r) {
        res.per_ratio[r].known = frac(hits[r].known, res.counts.known);
        res.per_ratio[r].nov_s = frac(hits[r].nov_s, res.counts.nov_s);
        res.per_ratio[r].nov_d = frac(hits[r].nov_d, res.counts.nov_d);
        res.per_ratio[r].all = frac(hits[r].all, res.counts.all);
        res.avg.known += res.per_ratio[r].known / static_cast<double>(ratios.size());
        res.avg.nov_s += res.per_ratio[r].nov_s / static_cast<double>(ratios.size());
        res.avg.nov_d += res.per_ratio[r].nov_d / static_cast<double>(ratios.size());
        res.avg.all += res.per_ratio[r].all / static_cast<double>(ratios.size());
    }
    return res;
}

} // namespace

LocAccResult loc_acc(const std::map<long, BoxPrediction>& preds,
                     const std::vector<GtEntry>& gts, std::span<const double> ratios) {
    return score_boxes(preds, gts, ratios, nullptr);
}

LocAccResult clus_loc_acc(const std::map<long, BoxPrediction>& preds,
                          const std::map<int, int>& cluster_mapping,
                          const std::vector<GtEntry>& gts,
                          std::span<const double> ratios) {
    return score_boxes(preds, gts, ratios, &cluster_mapping);
}

} // namespace owsol
