#include "aot/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aot/log.hpp"

namespace aot {

std::vector<Point2> candidate_positions(Point2 anchor, double block_w, const SearchConfig& cfg) {
    const double r = cfg.radius_frac * block_w;
    std::vector<Point2> out;
    if (r <= 0.0) {
        out.push_back(anchor);
        return out;
    }
    const double offs[3] = {-r, 0.0, r};
    for (double dx : offs)
        for (double dy : offs) out.push_back({anchor.x + dx, anchor.y + dy});
    std::sort(out.begin(), out.end(), [](Point2 a, Point2 b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    return out;
}

std::size_t FeatureCache::KeyHash::operator()(const Key& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(k.poly);
    for (std::uint64_t b : k.bits) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
}

const std::vector<double>& FeatureCache::fragment(const EdgeMap& map, int poly_index,
                                                  const Rect& block) {
    Key key;
    key.poly = poly_index;
    std::memcpy(&key.bits[0], &block.x, 8);
    std::memcpy(&key.bits[1], &block.y, 8);
    std::memcpy(&key.bits[2], &block.w, 8);
    std::memcpy(&key.bits[3], &block.h, 8);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<double> f;
    if (map.bbox(poly_index).intersects(block)) {
        f = fragment_feature(block, map.polylines()[poly_index]);
    } else {
        f.assign(kDescriptorDims, 0.0);
    }
    return cache_.emplace(key, std::move(f)).first->second;
}

namespace {

// Fragment candidates at one block position: (polyline id, feature), ordered
// by ascending id, empty clips skipped.
struct BlockCandidates {
    std::vector<int> ids;
    std::vector<const std::vector<double>*> feats;
    std::vector<std::vector<double>> owned;  // backing store when no cache is used
};

BlockCandidates gather_candidates(const EdgeMap& map, const Rect& block, FeatureCache* cache) {
    BlockCandidates out;
    for (int index : map.by_id_order()) {
        if (!map.bbox(index).intersects(block)) continue;
        if (cache) {
            const std::vector<double>& f = cache->fragment(map, index, block);
            if (is_zero(f)) continue;
            out.ids.push_back(map.polylines()[index].id);
            out.feats.push_back(&f);
        } else {
            std::vector<double> f = fragment_feature(block, map.polylines()[index]);
            if (is_zero(f)) continue;
            out.ids.push_back(map.polylines()[index].id);
            out.owned.push_back(std::move(f));
        }
    }
    if (!cache) {
        for (const auto& f : out.owned) out.feats.push_back(&f);
    }
    return out;
}

LeafResult best_fragment_response(std::span<const double> leaf_w, const BlockCandidates& cands) {
    LeafResult best;  // the no-fragment option: score 0, id -1
    for (std::size_t i = 0; i < cands.ids.size(); ++i) {
        const double s = dot(leaf_w, *cands.feats[i]);
        if (s > best.score) {
            best.score = s;
            best.fragment = cands.ids[i];
        }
    }
    return best;
}

}  // namespace

LeafResult leaf_score(const EdgeMap& map, const AndOrModel& model, int slot, const Rect& block,
                      FeatureCache* cache) {
    if (!model.slot_active(slot)) return {};
    const BlockCandidates cands = gather_candidates(map, block, cache);
    return best_fragment_response(model.leaf_weights(slot), cands);
}

OrResult or_score(const EdgeMap& map, const AndOrModel& model, int or_node, const Window& window,
                  const SearchConfig& cfg, FeatureCache* cache) {
    const ModelConfig& mc = model.config();
    const Point2 anchor = model.anchor_in(window, or_node);
    if (!model.any_active(or_node)) {
        AOT_LOG_DEBUG("or-node %d has no active leaves; null switch", or_node);
        return {0.0, -1, anchor, -1};
    }
    const double bw = BlockGrid::block_w(window.width);
    const double bh = BlockGrid::block_h(window.height);
    const std::vector<Point2> positions = candidate_positions(anchor, bw, cfg);

    std::vector<BlockCandidates> cands;
    cands.reserve(positions.size());
    for (const Point2& p : positions)
        cands.push_back(gather_candidates(map, BlockGrid::block_at(p, window.width, window.height), cache));

    OrResult best;
    bool first = true;
    for (int leaf = 0; leaf < mc.max_leaves; ++leaf) {
        const int slot = mc.slot_index(or_node, leaf);
        if (!model.slot_active(slot)) continue;
        const auto leaf_w = model.leaf_weights(slot);
        const auto deform_w = model.deform_weights(slot);
        for (std::size_t pi = 0; pi < positions.size(); ++pi) {
            const LeafResult lr = best_fragment_response(leaf_w, cands[pi]);
            const auto def = deformation_feature(window.origin, anchor - window.origin,
                                                 positions[pi], bw, bh);
            const double total = lr.score + dot(deform_w, def);
            if (first || total > best.score) {
                first = false;
                best = {total, leaf, positions[pi], lr.fragment};
            }
        }
    }
    return best;
}

Detection window_score(const EdgeMap& map, const AndOrModel& model, const Window& window,
                       const SearchConfig& cfg, FeatureCache* cache) {
    Detection det;
    det.window = window;
    double sum = 0.0;
    for (int i = 0; i < ModelConfig::kOrNodes; ++i) {
        const OrResult r = or_score(map, model, i, window, cfg, cache);
        det.latent.nodes[i] = {r.slot, r.position, r.fragment};
        sum += r.score;
    }
    const std::vector<Polyline> chains = collect_root_chains(map, det.latent, window);
    if (!chains.empty()) {
        const std::vector<double> root = chains_feature(window.rect(), chains);
        sum += dot(model.root_weights(), root);
    }
    det.score = sum;
    return det;
}

double assignment_score(const EdgeMap& map, const AndOrModel& model, const Window& window,
                        const LatentAssignment& h) {
    const std::vector<double> packed = pack_feature(map, h, window, model);
    return dot(model.weights(), packed);
}

LatentAssignment latent_infer_positive(const EdgeMap& map, const AndOrModel& model,
                                       const Window& gt_window, const SearchConfig& cfg,
                                       const LatentAssignment* retain, FeatureCache* cache) {
    const Detection det = window_score(map, model, gt_window, cfg, cache);
    if (retain) {
        const double kept = assignment_score(map, model, gt_window, *retain);
        if (kept > det.score) return *retain;
    }
    return det.latent;
}

LossAugResult loss_augmented_infer(const EdgeMap& map, int y_true, const AndOrModel& model,
                                   const Window& window, const SearchConfig& cfg,
                                   FeatureCache* cache) {
    const Detection det = window_score(map, model, window, cfg, cache);
    const double pos_value = det.score + (y_true == 1 ? 0.0 : 1.0);
    const double neg_value = y_true == -1 ? 0.0 : 1.0;

    LossAugResult out;
    out.latent = det.latent;
    const bool pick_pos = pos_value > neg_value || (pos_value == neg_value && y_true == 1);
    if (pick_pos) {
        out.y = 1;
        out.value = pos_value;
    } else {
        out.y = -1;
        out.value = neg_value;
    }
    return out;
}

double box_iou(const Rect& a, const Rect& b) {
    if (a.area() <= 0.0 || b.area() <= 0.0) return 0.0;
    const double ix = std::max(0.0, std::min(a.x1(), b.x1()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y1(), b.y1()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {
bool detection_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.window.origin.y != b.window.origin.y) return a.window.origin.y < b.window.origin.y;
    if (a.window.origin.x != b.window.origin.x) return a.window.origin.x < b.window.origin.x;
    return a.window.scale < b.window.scale;
}
}  // namespace

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh) {
    std::sort(dets.begin(), dets.end(), detection_order);
    std::vector<Detection> kept;
    for (Detection& d : dets) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (box_iou(d.window.rect(), k.window.rect()) > iou_thresh) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(std::move(d));
    }
    return kept;
}

std::vector<Detection> detect(const EdgeMap& map, const AndOrModel& model,
                              const SlidingConfig& sliding, const SearchConfig& search,
                              double nms_iou, int threads) {
    const std::vector<Window> windows = enumerate_windows(map, sliding);
    std::vector<Detection> scored(windows.size());
    if (threads == 1) {
        for (std::size_t i = 0; i < windows.size(); ++i)
            scored[i] = window_score(map, model, windows[i], search);
    } else {
#ifdef _OPENMP
        const int n_threads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(n_threads)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(windows.size()); ++i)
            scored[i] = window_score(map, model, windows[i], search);
#else
        for (std::size_t i = 0; i < windows.size(); ++i)
            scored[i] = window_score(map, model, windows[i], search);
#endif
    }
    return nms(std::move(scored), nms_iou);
}

}  // namespace aot
