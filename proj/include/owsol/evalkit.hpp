#pragma once

#include <array>
#include <map>
#include <span>
#include <vector>

#include "owsol/core.hpp"

namespace owsol {

// Minimum-cost assignment of size min(rows, cols); the smaller side is
// implicitly zero-padded. Returns (row, col) pairs sorted by row.
std::vector<std::pair<int, int>> hungarian(
    const std::vector<std::vector<double>>& cost);

struct PerRole {
    double known = 0.0;
    double nov_s = 0.0;
    double nov_d = 0.0;
    double all = 0.0;

    double get(Role r) const {
        switch (r) {
            case Role::Known: return known;
            case Role::NovS: return nov_s;
            case Role::NovD: return nov_d;
        }
        return 0.0;
    }
};

struct RoleCounts {
    long known = 0, nov_s = 0, nov_d = 0, all = 0;
};

struct ClusAccResult {
    PerRole acc;
    RoleCounts counts;
    std::map<int, int> mapping; // cluster id -> class id; unmatched clusters absent
};

// One Hungarian mapping fixed over the whole evaluation set, then sliced per
// role. Members of unmatched (surplus) clusters count as wrong.
ClusAccResult clus_acc(std::span<const int> pred_clusters,
                       std::span<const int> gt_labels, std::span<const Role> roles);

double iou(const Box& a, const Box& b);

inline constexpr std::array<double, 3> kLocRatios = {0.3, 0.5, 0.7};

struct BoxPrediction {
    int cluster_id = -1;
    Box box;
    float score = 0.0f;
};

struct GtEntry {
    long sample_id = 0;
    int gt_label = 0;
    Role role = Role::Known;
    std::vector<Box> gt_boxes;
};

struct LocAccResult {
    PerRole avg;                      // mean over the three ratios
    std::array<PerRole, 3> per_ratio; // indexed like kLocRatios
    RoleCounts counts;
};

// Localization judged against the sample's own boxes; clustering ignored.
LocAccResult loc_acc(const std::map<long, BoxPrediction>& preds,
                     const std::vector<GtEntry>& gts,
                     std::span<const double> ratios = kLocRatios);

// Conjunction: mapped cluster must equal the gt class AND the IoU test must
// pass; averaged over the same ratios.
LocAccResult clus_loc_acc(const std::map<long, BoxPrediction>& preds,
                          const std::map<int, int>& cluster_mapping,
                          const std::vector<GtEntry>& gts,
                          std::span<const double> ratios = kLocRatios);

struct EvalReport {
    PerRole clus;
    PerRole loc;
    PerRole clus_loc;
    std::array<PerRole, 3> loc_per_ratio;
    std::array<PerRole, 3> clus_loc_per_ratio;
    RoleCounts counts;
    double theta = 0.0;
    int k = 0;
};

} // namespace owsol
