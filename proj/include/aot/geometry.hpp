#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "aot/error.hpp"

namespace aot {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
inline bool operator!=(Point2 a, Point2 b) { return !(a == b); }

double distance(Point2 a, Point2 b);
double cross(Point2 a, Point2 b);
double dot(Point2 a, Point2 b);
Point2 lerp(Point2 a, Point2 b, double t);

struct Rect {
    double x = 0, y = 0, w = 0, h = 0;
    double x1() const { return x + w; }
    double y1() const { return y + h; }
    double area() const { return w * h; }
    bool contains(Point2 p) const { return p.x >= x && p.x <= x1() && p.y >= y && p.y <= y1(); }
    bool intersects(const Rect& o) const {
        return x <= o.x1() && o.x <= x1() && y <= o.y1() && o.y <= y1();
    }
};

// Open chain of points. Closed contours repeat their first point at the end.
struct Polyline {
    int id = 0;
    std::vector<Point2> points;
};

double polyline_length(const Polyline& c);
double chain_length(std::span<const Point2> pts);
Rect polyline_bbox(const Polyline& c);
// Throws std::invalid_argument when an invariant is violated: >= 2 points,
// consecutive points distinct, finite coordinates, positive total length.
void validate_polyline(const Polyline& c);

// Container of polylines for one image. Mutation goes through add() so the
// id index and bounding boxes stay consistent.
class EdgeMap {
public:
    EdgeMap() = default;
    EdgeMap(double width, double height) : width_(width), height_(height) {}

    double width() const { return width_; }
    double height() const { return height_; }

    // Validates the polyline, requires a fresh id and in-bounds points.
    void add(Polyline poly);

    const std::vector<Polyline>& polylines() const { return polylines_; }
    const Rect& bbox(int index) const { return bboxes_[index]; }
    // Indices ordered by ascending polyline id.
    const std::vector<int>& by_id_order() const { return id_order_; }
    // Returns nullptr when no polyline has this id.
    const Polyline* find(int id) const;
    std::size_t size() const { return polylines_.size(); }

private:
    double width_ = 0, height_ = 0;
    std::vector<Polyline> polylines_;
    std::vector<Rect> bboxes_;
    std::vector<int> id_order_;
    std::unordered_map<int, int> index_by_id_;
};

struct Window {
    Point2 origin;  // top-left corner; the root node location
    double width = 0, height = 0;
    double scale = 1.0;
    Rect rect() const { return {origin.x, origin.y, width, height}; }
};

// Regular 2x3 decomposition of a window, row-major block order.
struct BlockGrid {
    static constexpr int kRows = 2;
    static constexpr int kCols = 3;
    static constexpr int kCount = 6;

    static double block_w(double window_w) { return window_w / kCols; }
    static double block_h(double window_h) { return window_h / kRows; }
    // Center of block i relative to the window origin.
    static Point2 anchor_offset(int i, double window_w, double window_h);
    // Block rectangle for a given (possibly perturbed) center.
    static Rect block_at(Point2 center, double window_w, double window_h);
};

// Equal arc-length resampling with linear interpolation between vertices.
// First and last samples coincide with the endpoints.
std::vector<Point2> resample(const Polyline& c, int n);
// Same, over the concatenated arc length of several chains in order.
std::vector<Point2> resample_chains(std::span<const Polyline> chains, int n);

// Maximal sub-chains of c inside the block, crossing segments cut at the
// border. Sub-chains with zero arc length are dropped.
std::vector<Polyline> clip_to_block(const Polyline& c, const Rect& block);

struct SlidingConfig {
    double base_w = 0, base_h = 0;
    int num_scales = 6;
    double scales_per_octave = 2.0;
    double s0 = 1.0;
    double stride_frac = 0.125;  // stride as a fraction of the scaled window width
};

double scale_at(const SlidingConfig& cfg, int k);
void for_each_window(const EdgeMap& map, const SlidingConfig& cfg,
                     const std::function<void(const Window&)>& fn);
std::vector<Window> enumerate_windows(const EdgeMap& map, const SlidingConfig& cfg);

// JSON on disk: { "width": W, "height": H,
//                 "polylines": [ { "id": k, "points": [[x,y],...] } ] }
EdgeMap load_edge_map(const std::filesystem::path& file);
void save_edge_map(const EdgeMap& map, const std::filesystem::path& file);

}  // namespace aot
