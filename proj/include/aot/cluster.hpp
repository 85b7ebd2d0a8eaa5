#pragma once

#include <functional>
#include <span>
#include <vector>

namespace aot {

struct IsodataConfig {
    // Merge two clusters when their centroid distance is at most
    // merge_factor * (mean member-to-centroid distance over all points).
    double merge_factor = 0.5;
    // Split a cluster when a 2-means partition reduces its SSE to at most
    // split_gain * the current SSE.
    double split_gain = 0.5;
    int min_split_size = 4;
    int max_sweeps = 5;
};

// A proposed set of membership changes: (point index, target cluster handle).
// The callback applies domain bookkeeping and returns false to veto; vetoed
// moves leave the partition untouched.
using MoveAttempt = std::function<bool(std::span<const std::pair<int, int>> moves)>;

struct IsodataResult {
    std::vector<int> assignment;  // point -> cluster handle
    std::vector<char> alive;      // handle -> still populated
    int n_clusters = 0;
    int merges = 0;
    int splits = 0;
    int reassigns = 0;
};

// ISODATA over Euclidean feature rows: alternating reassignment, merge and
// split passes, each change routed through try_move. Cluster handles are
// stable; splits allocate the next handle. Handles never exceed max_k alive
// at once. Deterministic: points, pairs and clusters are visited in fixed
// sorted orders with index tie-breaks.
IsodataResult isodata(const std::vector<std::vector<double>>& feats, std::vector<int> init,
                      int max_k, const IsodataConfig& cfg, const MoveAttempt& try_move = {});

}  // namespace aot
