#include "aot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace aot {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

Point2 lerp(Point2 a, Point2 b, double t) {
    if (t <= 0.0) return a;
    if (t >= 1.0) return b;
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

double chain_length(std::span<const Point2> pts) {
    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) total += distance(pts[i - 1], pts[i]);
    return total;
}

double polyline_length(const Polyline& c) { return chain_length(c.points); }

Rect polyline_bbox(const Polyline& c) {
    double x0 = c.points[0].x, x1 = x0, y0 = c.points[0].y, y1 = y0;
    for (const Point2& p : c.points) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    return {x0, y0, x1 - x0, y1 - y0};
}

void validate_polyline(const Polyline& c) {
    if (c.points.size() < 2) throw std::invalid_argument("polyline needs at least 2 points");
    for (const Point2& p : c.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("polyline has non-finite coordinates");
    }
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        if (c.points[i] == c.points[i - 1])
            throw std::invalid_argument("polyline has repeated consecutive points");
    }
    if (!(polyline_length(c) > 0.0)) throw std::invalid_argument("degenerate contour");
}

void EdgeMap::add(Polyline poly) {
    validate_polyline(poly);
    if (index_by_id_.count(poly.id))
        throw std::invalid_argument("duplicate polyline id " + std::to_string(poly.id));
    const Rect bounds{0.0, 0.0, width_, height_};
    for (const Point2& p : poly.points) {
        if (!bounds.contains(p)) throw std::invalid_argument("polyline point outside edge map");
    }
    const int index = static_cast<int>(polylines_.size());
    bboxes_.push_back(polyline_bbox(poly));
    index_by_id_[poly.id] = index;
    polylines_.push_back(std::move(poly));
    id_order_.push_back(index);
    std::sort(id_order_.begin(), id_order_.end(),
              [this](int a, int b) { return polylines_[a].id < polylines_[b].id; });
}

const Polyline* EdgeMap::find(int id) const {
    auto it = index_by_id_.find(id);
    return it == index_by_id_.end() ? nullptr : &polylines_[it->second];
}

Point2 BlockGrid::anchor_offset(int i, double window_w, double window_h) {
    const int row = i / kCols;
    const int col = i % kCols;
    return {(col + 0.5) * block_w(window_w), (row + 0.5) * block_h(window_h)};
}

Rect BlockGrid::block_at(Point2 center, double window_w, double window_h) {
    const double bw = block_w(window_w);
    const double bh = block_h(window_h);
    return {center.x - 0.5 * bw, center.y - 0.5 * bh, bw, bh};
}

namespace {

// Sample one point at arc position s over a list of chains with concatenated
// arc length. `cum` holds cumulative lengths per chain segment, flattened.
struct ArcWalker {
    std::span<const Polyline> chains;
    // flattened segment table: (chain, seg) with cumulative end length
    struct Seg {
        int chain;
        int seg;
        double end;
    };
    std::vector<Seg> segs;
    double total = 0.0;

    explicit ArcWalker(std::span<const Polyline> cs) : chains(cs) {
        for (int ci = 0; ci < static_cast<int>(cs.size()); ++ci) {
            const auto& pts = cs[ci].points;
            for (int si = 1; si < static_cast<int>(pts.size()); ++si) {
                total += distance(pts[si - 1], pts[si]);
                segs.push_back({ci, si, total});
            }
        }
    }

    Point2 at(double s, std::size_t& hint) const {
        while (hint + 1 < segs.size() && segs[hint].end < s) ++hint;
        const Seg& sg = segs[hint];
        const auto& pts = chains[sg.chain].points;
        const Point2 a = pts[sg.seg - 1];
        const Point2 b = pts[sg.seg];
        const double seg_len = distance(a, b);
        const double start = sg.end - seg_len;
        const double t = seg_len > 0.0 ? (s - start) / seg_len : 0.0;
        return lerp(a, b, t);
    }
};

}  // namespace

std::vector<Point2> resample_chains(std::span<const Polyline> chains, int n) {
    if (n < 2) throw std::invalid_argument("resample needs n >= 2");
    if (chains.empty()) throw std::invalid_argument("degenerate contour");
    ArcWalker walker(chains);
    if (!(walker.total > 0.0)) throw std::invalid_argument("degenerate contour");

    std::vector<Point2> out(n);
    out[0] = chains.front().points.front();
    out[n - 1] = chains.back().points.back();
    std::size_t hint = 0;
    for (int i = 1; i < n - 1; ++i) {
        const double s = walker.total * static_cast<double>(i) / (n - 1);
        out[i] = walker.at(s, hint);
    }
    return out;
}

std::vector<Point2> resample(const Polyline& c, int n) {
    return resample_chains(std::span<const Polyline>(&c, 1), n);
}

std::vector<Polyline> clip_to_block(const Polyline& c, const Rect& block) {
    std::vector<Polyline> out;
    std::vector<Point2> cur;
    auto flush = [&] {
        if (cur.size() >= 2 && chain_length(cur) > 0.0) {
            out.push_back(Polyline{c.id, std::move(cur)});
        }
        cur.clear();
    };

    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const Point2 a = c.points[i - 1];
        const Point2 b = c.points[i];
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        double t0 = 0.0, t1 = 1.0;
        bool inside = true;
        auto clip1 = [&](double p, double q) {
            if (p == 0.0) {
                if (q < 0.0) inside = false;
                return;
            }
            const double r = q / p;
            if (p < 0.0) {
                if (r > t1) inside = false;
                else if (r > t0) t0 = r;
            } else {
                if (r < t0) inside = false;
                else if (r < t1) t1 = r;
            }
        };
        clip1(-dx, a.x - block.x);
        clip1(dx, block.x1() - a.x);
        clip1(-dy, a.y - block.y);
        clip1(dy, block.y1() - a.y);

        if (!inside || t0 >= t1) {
            flush();
            continue;
        }
        const Point2 pa = lerp(a, b, t0);
        const Point2 pb = lerp(a, b, t1);
        if (t0 == 0.0 && !cur.empty() && cur.back() == pa) {
            if (pb != cur.back()) cur.push_back(pb);
        } else {
            flush();
            cur.push_back(pa);
            if (pb != pa) cur.push_back(pb);
        }
        if (t1 < 1.0) flush();
    }
    flush();
    return out;
}

double scale_at(const SlidingConfig& cfg, int k) {
    return cfg.s0 * std::pow(2.0, static_cast<double>(k) / cfg.scales_per_octave);
}

void for_each_window(const EdgeMap& map, const SlidingConfig& cfg,
                     const std::function<void(const Window&)>& fn) {
    if (cfg.base_w <= 0 || cfg.base_h <= 0) throw std::invalid_argument("window base size must be positive");
    if (cfg.stride_frac <= 0) throw std::invalid_argument("stride must be positive");
    for (int k = 0; k < cfg.num_scales; ++k) {
        const double s = scale_at(cfg, k);
        const double w = cfg.base_w * s;
        const double h = cfg.base_h * s;
        if (w > map.width() || h > map.height()) continue;
        const double stride = cfg.stride_frac * w;
        const double eps = 1e-9 * std::max(1.0, std::max(map.width(), map.height()));
        const int nx = static_cast<int>(std::floor((map.width() - w + eps) / stride)) + 1;
        const int ny = static_cast<int>(std::floor((map.height() - h + eps) / stride)) + 1;
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                fn(Window{{ix * stride, iy * stride}, w, h, s});
            }
        }
    }
}

std::vector<Window> enumerate_windows(const EdgeMap& map, const SlidingConfig& cfg) {
    std::vector<Window> out;
    for_each_window(map, cfg, [&](const Window& w) { out.push_back(w); });
    return out;
}

EdgeMap load_edge_map(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open edge map: " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(file.string() + ": " + e.what());
    }
    try {
        EdgeMap map(j.at("width").get<double>(), j.at("height").get<double>());
        std::size_t pi = 0;
        for (const auto& jp : j.at("polylines")) {
            Polyline poly;
            poly.id = jp.at("id").get<int>();
            std::size_t qi = 0;
            for (const auto& jq : jp.at("points")) {
                if (!jq.is_array() || jq.size() != 2)
                    throw DataError(file.string() + ": polylines[" + std::to_string(pi) +
                                    "].points[" + std::to_string(qi) + "] is not an [x,y] pair");
                poly.points.push_back({jq[0].get<double>(), jq[1].get<double>()});
                ++qi;
            }
            try {
                map.add(std::move(poly));
            } catch (const std::invalid_argument& e) {
                throw DataError(file.string() + ": polylines[" + std::to_string(pi) + "]: " + e.what());
            }
            ++pi;
        }
        return map;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(file.string() + ": " + e.what());
    }
}

void save_edge_map(const EdgeMap& map, const std::filesystem::path& file) {
    nlohmann::json j;
    j["width"] = map.width();
    j["height"] = map.height();
    auto& arr = j["polylines"] = nlohmann::json::array();
    for (const Polyline& poly : map.polylines()) {
        nlohmann::json jp;
        jp["id"] = poly.id;
        auto& pts = jp["points"] = nlohmann::json::array();
        for (const Point2& p : poly.points) pts.push_back({p.x, p.y});
        arr.push_back(std::move(jp));
    }
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write edge map: " + file.string());
    out << j.dump(2) << '\n';
}

}  // namespace aot
