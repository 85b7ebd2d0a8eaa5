#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "aot/model.hpp"

namespace aot {

// Candidate block positions: anchor plus offsets {-r,0,+r}^2 with
// r = radius_frac * block width, ordered lexicographically by (x, y). The
// anchor itself is always among the candidates.
struct SearchConfig {
    double radius_frac = 0.125;
};

std::vector<Point2> candidate_positions(Point2 anchor, double block_w, const SearchConfig& cfg);

// Memo of fragment features keyed by (polyline, exact block rect). One
// instance per thread; hits require bit-identical rects, which the fixed
// per-window position grids guarantee.
class FeatureCache {
public:
    const std::vector<double>& fragment(const EdgeMap& map, int poly_index, const Rect& block);
    std::size_t size() const { return cache_.size(); }

private:
    struct Key {
        int poly;
        std::uint64_t bits[4];
        bool operator==(const Key& o) const {
            return poly == o.poly && bits[0] == o.bits[0] && bits[1] == o.bits[1] &&
                   bits[2] == o.bits[2] && bits[3] == o.bits[3];
        }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };
    std::unordered_map<Key, std::vector<double>, KeyHash> cache_;
};

struct LeafResult {
    double score = 0.0;
    int fragment = -1;  // polyline id, -1 = no fragment
};

struct OrResult {
    double score = 0.0;
    int slot = -1;  // local leaf index, -1 = null switch (no active leaves)
    Point2 position;
    int fragment = -1;
};

struct Detection {
    Window window;
    double score = 0.0;
    LatentAssignment latent;
};

// Best classifier response over candidate fragments clipped to the block,
// including the explicit no-fragment option scoring 0. Ties go to the lowest
// fragment id, with no-fragment counting as lowest.
LeafResult leaf_score(const EdgeMap& map, const AndOrModel& model, int slot, const Rect& block,
                      FeatureCache* cache = nullptr);

// Max over (active leaf, candidate position, fragment) of leaf response minus
// deformation cost. Ties go to the lowest slot, then lexicographic position.
OrResult or_score(const EdgeMap& map, const AndOrModel& model, int or_node, const Window& window,
                  const SearchConfig& cfg, FeatureCache* cache = nullptr);

// Bottom-up or-node maxima plus root verification of the assembled fragments.
Detection window_score(const EdgeMap& map, const AndOrModel& model, const Window& window,
                       const SearchConfig& cfg, FeatureCache* cache = nullptr);

// Exact dot(weights, packed feature) for an assignment; detections reproduce
// their score through this.
double assignment_score(const EdgeMap& map, const AndOrModel& model, const Window& window,
                        const LatentAssignment& h);

// Best latent assignment at a fixed window. When `retain` is given and scores
// strictly higher than the fresh inference, it is kept instead.
LatentAssignment latent_infer_positive(const EdgeMap& map, const AndOrModel& model,
                                       const Window& gt_window, const SearchConfig& cfg,
                                       const LatentAssignment* retain = nullptr,
                                       FeatureCache* cache = nullptr);

struct LossAugResult {
    int y = 0;
    LatentAssignment latent;  // meaningful only for y = +1
    double value = 0.0;       // max over (y,H) of score + 0/1 loss
};

// Loss-augmented inference with the 0/1 loss; ties prefer y = y_true.
LossAugResult loss_augmented_infer(const EdgeMap& map, int y_true, const AndOrModel& model,
                                   const Window& window, const SearchConfig& cfg,
                                   FeatureCache* cache = nullptr);

// Greedy NMS by descending score; a detection is suppressed when its IoU with
// a kept one exceeds the threshold.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh);

// Sliding-window detection over all positions and scales. threads = 1 runs
// the serial reference loop, 0 uses all cores; results are identical.
std::vector<Detection> detect(const EdgeMap& map, const AndOrModel& model,
                              const SlidingConfig& sliding, const SearchConfig& search,
                              double nms_iou = 0.5, int threads = 0);

double box_iou(const Rect& a, const Rect& b);

}  // namespace aot
