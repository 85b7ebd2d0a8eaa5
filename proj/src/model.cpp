#include "aot/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "aot/error.hpp"

namespace aot {

namespace {
constexpr int kModelVersion = 1;

// base64 of little-endian IEEE doubles
const char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        unsigned v = data[i] << 16;
        if (i + 1 < len) v |= data[i + 1] << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(kB64Chars[(v >> 18) & 63]);
        out.push_back(kB64Chars[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64Chars[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64Chars[v & 63] : '=');
    }
    return out;
}

std::vector<unsigned char> b64_decode(const std::string& text) {
    auto decode_char = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<unsigned char> out;
    int acc = 0, bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = decode_char(c);
        if (v < 0) throw DataError("invalid base64 payload");
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
        }
    }
    return out;
}

std::string encode_doubles(std::span<const double> values) {
    std::vector<unsigned char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t u;
        std::memcpy(&u, &values[i], 8);
        if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
        std::memcpy(&bytes[i * 8], &u, 8);
    }
    return b64_encode(bytes.data(), bytes.size());
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected) {
    const std::vector<unsigned char> bytes = b64_decode(text);
    if (bytes.size() != expected * 8) throw DataError("model weight payload has wrong length");
    std::vector<double> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint64_t u;
        std::memcpy(&u, &bytes[i * 8], 8);
        if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
        std::memcpy(&out[i], &u, 8);
    }
    return out;
}

}  // namespace

AndOrModel::AndOrModel(const ModelConfig& cfg) : config_(cfg) {
    if (cfg.max_leaves < 1) throw std::invalid_argument("max_leaves must be >= 1");
    if (cfg.base_w <= 0 || cfg.base_h <= 0) throw std::invalid_argument("base window must be positive");
    for (int i = 0; i < ModelConfig::kOrNodes; ++i)
        anchors_[i] = BlockGrid::anchor_offset(i, cfg.base_w, cfg.base_h);
    active_.assign(cfg.slot_count(), 0);
    weights_.assign(cfg.packed_dim(), 0.0);
}

Point2 AndOrModel::anchor_in(const Window& w, int or_node) const {
    const double sx = w.width / config_.base_w;
    const double sy = w.height / config_.base_h;
    return {w.origin.x + anchors_[or_node].x * sx, w.origin.y + anchors_[or_node].y * sy};
}

void AndOrModel::set_slot_active(int slot, bool on) {
    active_[slot] = on ? 1 : 0;
    if (!on) zero_slot(slot);
}

bool AndOrModel::any_active(int or_node) const {
    for (int s = 0; s < config_.max_leaves; ++s)
        if (active_[config_.slot_index(or_node, s)]) return true;
    return false;
}

int AndOrModel::active_leaves(int or_node) const {
    int n = 0;
    for (int s = 0; s < config_.max_leaves; ++s)
        if (active_[config_.slot_index(or_node, s)]) ++n;
    return n;
}

int AndOrModel::free_slot(int or_node) const {
    for (int s = 0; s < config_.max_leaves; ++s)
        if (!active_[config_.slot_index(or_node, s)]) return s;
    return -1;
}

std::span<const double> AndOrModel::leaf_weights(int slot) const {
    return {weights_.data() + config_.leaf_offset(slot), kDescriptorDims};
}

std::span<const double> AndOrModel::deform_weights(int slot) const {
    return {weights_.data() + config_.deform_offset(slot), kDeformDims};
}

std::span<const double> AndOrModel::root_weights() const {
    return {weights_.data() + config_.root_offset(), kDescriptorDims};
}

void AndOrModel::zero_slot(int slot) {
    std::fill_n(weights_.begin() + config_.leaf_offset(slot), kDescriptorDims, 0.0);
    std::fill_n(weights_.begin() + config_.deform_offset(slot), kDeformDims, 0.0);
}

std::vector<Polyline> collect_root_chains(const EdgeMap& map, const LatentAssignment& h,
                                          const Window& window) {
    std::vector<Polyline> chains;
    const Rect win = window.rect();
    for (int i = 0; i < ModelConfig::kOrNodes; ++i) {
        const OrAssignment& a = h.nodes[i];
        if (a.slot < 0 || a.fragment < 0) continue;
        const Polyline* poly = map.find(a.fragment);
        if (!poly) throw DataError("dangling fragment id " + std::to_string(a.fragment));
        const Rect block = BlockGrid::block_at(a.position, window.width, window.height);
        for (Polyline& sub : clip_to_block(*poly, block)) {
            for (Polyline& piece : clip_to_block(sub, win)) chains.push_back(std::move(piece));
        }
    }
    return chains;
}

std::vector<double> pack_feature(const EdgeMap& map, const LatentAssignment& h,
                                 const Window& window, const AndOrModel& model) {
    const ModelConfig& cfg = model.config();
    std::vector<double> packed(cfg.packed_dim(), 0.0);
    for (int i = 0; i < ModelConfig::kOrNodes; ++i) {
        const OrAssignment& a = h.nodes[i];
        if (a.slot < 0) continue;
        const int slot = cfg.slot_index(i, a.slot);
        if (a.fragment >= 0) {
            const Polyline* poly = map.find(a.fragment);
            if (!poly) throw DataError("dangling fragment id " + std::to_string(a.fragment));
            const Rect block = BlockGrid::block_at(a.position, window.width, window.height);
            const std::vector<double> f = fragment_feature(block, *poly);
            std::copy(f.begin(), f.end(), packed.begin() + cfg.leaf_offset(slot));
        }
        const Point2 anchor = model.anchor_in(window, i);
        const auto def = deformation_feature(window.origin, anchor - window.origin, a.position,
                                             BlockGrid::block_w(window.width),
                                             BlockGrid::block_h(window.height));
        std::copy(def.begin(), def.end(), packed.begin() + cfg.deform_offset(slot));
    }
    const std::vector<Polyline> chains = collect_root_chains(map, h, window);
    if (!chains.empty()) {
        const std::vector<double> root = chains_feature(window.rect(), chains);
        std::copy(root.begin(), root.end(), packed.begin() + cfg.root_offset());
    }
    return packed;
}

std::vector<double> labeled_feature(const EdgeMap& map, int y, const LatentAssignment& h,
                                    const Window& window, const AndOrModel& model) {
    if (y != 1 && y != -1) throw std::invalid_argument("label must be +1 or -1");
    if (y < 0) return std::vector<double>(model.config().packed_dim(), 0.0);
    return pack_feature(map, h, window, model);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

std::string serialize_model(const AndOrModel& model) {
    const ModelConfig& cfg = model.config();
    nlohmann::json j;
    j["format"] = "aot-model";
    j["version"] = kModelVersion;
    j["config"] = {{"or_nodes", ModelConfig::kOrNodes},
                   {"max_leaves", cfg.max_leaves},
                   {"base_window", {cfg.base_w, cfg.base_h}}};
    auto& anchors = j["anchors"] = nlohmann::json::array();
    for (const Point2& a : model.anchors()) anchors.push_back({a.x, a.y});
    auto& active = j["active"] = nlohmann::json::array();
    for (int s = 0; s < cfg.slot_count(); ++s) active.push_back(model.slot_active(s));
    j["weights"] = encode_doubles(model.weights());
    return j.dump(2) + "\n";
}

AndOrModel deserialize_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    try {
        if (j.value("format", "") != "aot-model") throw DataError("not an aot-model file");
        if (j.at("version").get<int>() != kModelVersion)
            throw DataError("unsupported model version " + j.at("version").dump() +
                            " (expected " + std::to_string(kModelVersion) + ")");
        ModelConfig cfg;
        cfg.max_leaves = j.at("config").at("max_leaves").get<int>();
        cfg.base_w = j.at("config").at("base_window").at(0).get<double>();
        cfg.base_h = j.at("config").at("base_window").at(1).get<double>();
        AndOrModel model(cfg);
        const auto& active = j.at("active");
        if (static_cast<int>(active.size()) != cfg.slot_count())
            throw DataError("model active flags have wrong length");
        for (int s = 0; s < cfg.slot_count(); ++s)
            if (active.at(s).get<bool>()) model.set_slot_active(s, true);
        model.weights() = decode_doubles(j.at("weights").get<std::string>(),
                                         static_cast<std::size_t>(cfg.packed_dim()));
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void save_model(const AndOrModel& model, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write model: " + file.string());
    out << serialize_model(model);
}

AndOrModel load_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + file.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return deserialize_model(text);
    } catch (DataError& e) {
        throw DataError(file.string() + ": " + e.what());
    }
}

}  // namespace aot
