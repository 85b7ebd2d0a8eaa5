#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aot/descriptor.hpp"
#include "aot/geometry.hpp"

namespace aot {

struct ModelConfig {
    static constexpr int kOrNodes = BlockGrid::kCount;  // 6, fixed
    int max_leaves = 3;                                 // m
    double base_w = 0, base_h = 0;

    int slot_count() const { return kOrNodes * max_leaves; }
    int packed_dim() const { return slot_count() * (kDescriptorDims + kDeformDims) + kDescriptorDims; }
    int leaf_offset(int slot) const { return slot * kDescriptorDims; }
    int deform_offset(int slot) const { return slot_count() * kDescriptorDims + slot * kDeformDims; }
    int root_offset() const { return slot_count() * (kDescriptorDims + kDeformDims); }
    int slot_index(int or_node, int leaf) const { return or_node * max_leaves + leaf; }
};

// Three-layer tree: root verifier over 6 or-nodes, each switching between at
// most m leaf classifiers. All parameters live in one packed vector whose
// layout matches the packed feature: leaf blocks, then deformation blocks
// (stored negated, so scores are plain dot products), then the root block.
class AndOrModel {
public:
    AndOrModel() = default;
    explicit AndOrModel(const ModelConfig& cfg);

    const ModelConfig& config() const { return config_; }
    // Block-center anchors in the base window frame, relative to the origin.
    const std::array<Point2, ModelConfig::kOrNodes>& anchors() const { return anchors_; }
    Point2 anchor_in(const Window& w, int or_node) const;

    bool slot_active(int slot) const { return active_[slot] != 0; }
    void set_slot_active(int slot, bool on);
    bool any_active(int or_node) const;
    int active_leaves(int or_node) const;
    // Lowest inactive slot of this or-node, -1 when full.
    int free_slot(int or_node) const;

    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    std::span<const double> leaf_weights(int slot) const;
    // Negated deformation weights: score contribution is dot(these, phi_s).
    std::span<const double> deform_weights(int slot) const;
    std::span<const double> root_weights() const;
    void zero_slot(int slot);

private:
    ModelConfig config_;
    std::array<Point2, ModelConfig::kOrNodes> anchors_{};
    std::vector<unsigned char> active_;
    std::vector<double> weights_;
};

// Per-or-node latent choice: which leaf slot is switched on (local index,
// -1 = designated null switch for or-nodes with no active leaves), the block
// center position, and the chosen fragment's polyline id (-1 = no fragment).
struct OrAssignment {
    int slot = -1;
    Point2 position;
    int fragment = -1;
};

struct LatentAssignment {
    std::array<OrAssignment, ModelConfig::kOrNodes> nodes;
};

// The block-clipped chains of every activated fragment, in or-node order,
// additionally clipped to the window. Shared by scoring and feature packing.
std::vector<Polyline> collect_root_chains(const EdgeMap& map, const LatentAssignment& h,
                                          const Window& window);

// Packed joint feature: per-slot leaf blocks, per-slot deformation blocks,
// root block. Switched-off slots contribute zeros. Throws DataError on a
// fragment id that is not in the map.
std::vector<double> pack_feature(const EdgeMap& map, const LatentAssignment& h,
                                 const Window& window, const AndOrModel& model);

// Feature of a labeled sample: the packed feature for y = +1, zeros for y = -1.
std::vector<double> labeled_feature(const EdgeMap& map, int y, const LatentAssignment& h,
                                    const Window& window, const AndOrModel& model);

double dot(std::span<const double> a, std::span<const double> b);

std::string serialize_model(const AndOrModel& model);
AndOrModel deserialize_model(const std::string& text);
void save_model(const AndOrModel& model, const std::filesystem::path& file);
AndOrModel load_model(const std::filesystem::path& file);

}  // namespace aot
