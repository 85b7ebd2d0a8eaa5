#include "aot/descriptor.hpp"

#include <cmath>
#include <stdexcept>

namespace aot {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

SamplePoints::SamplePoints(std::vector<Point2> pts) : pts_(std::move(pts)) {
    if (pts_.size() < 2) throw std::invalid_argument("insufficient points");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        for (std::size_t j = i + 1; j < pts_.size(); ++j) {
            sum += distance(pts_[i], pts_[j]);
            ++pairs;
        }
    }
    mean_dist_ = sum / static_cast<double>(pairs);
    if (!(mean_dist_ > 0.0) || !std::isfinite(mean_dist_))
        throw std::invalid_argument("degenerate sample geometry");
}

std::array<double, kTriangleBins> triangle_descriptor(const SamplePoints& omega, int t) {
    const auto& pts = omega.points();
    const int n = omega.size();
    if (n < 3) throw std::invalid_argument("insufficient points");
    if (t < 0 || t >= n) throw std::invalid_argument("point index out of range");

    std::array<double, kTriangleBins> hist{};
    const Point2 tp = pts[t];
    const double mean = omega.mean_distance();
    double count = 0.0;

    for (int a = 0; a < n; ++a) {
        if (a == t) continue;
        for (int b = a + 1; b < n; ++b) {
            if (b == t) continue;
            Point2 va = pts[a] - tp;
            Point2 vb = pts[b] - tp;
            // Orient the pair so the sweep A -> B around T is clockwise on
            // screen (y grows downward); collinear pairs keep index order.
            if (cross(va, vb) < 0.0) std::swap(va, vb);

            const double la = std::hypot(va.x, va.y);
            const double lb = std::hypot(vb.x, vb.y);
            double angle = 0.0;
            const double cr = cross(va, vb);
            if (cr != 0.0 && la > 0.0 && lb > 0.0) {
                double c = dot(va, vb) / (la * lb);
                c = std::max(-1.0, std::min(1.0, c));
                angle = std::acos(c);
            }
            const int ia = la / mean < 1.0 ? 0 : 1;
            const int ib = lb / mean < 1.0 ? 0 : 1;
            int iang = static_cast<int>(angle / (kPi / 6.0));
            if (iang > 5) iang = 5;
            hist[(ia * 2 + ib) * 6 + iang] += 1.0;
            count += 1.0;
        }
    }
    for (double& v : hist) v /= count;
    return hist;
}

std::array<double, kContextBins> shape_context(const SamplePoints& omega, int t) {
    const auto& pts = omega.points();
    const int n = omega.size();
    if (n < 2) throw std::invalid_argument("insufficient points");
    if (t < 0 || t >= n) throw std::invalid_argument("point index out of range");

    std::array<double, kContextBins> hist{};
    const Point2 tp = pts[t];
    const double mean = omega.mean_distance();
    double count = 0.0;

    for (int p = 0; p < n; ++p) {
        if (p == t) continue;
        const Point2 v = pts[p] - tp;
        const double d = std::hypot(v.x, v.y);
        const int ir = d / mean < 1.0 ? 0 : 1;
        double theta = std::atan2(v.y, v.x);
        if (theta < 0.0) theta += 2.0 * kPi;
        int io = static_cast<int>(theta / (kPi / 3.0));
        if (io > 5) io = 5;
        hist[ir * 6 + io] += 1.0;
        count += 1.0;
    }
    for (double& v : hist) v /= count;
    return hist;
}

std::vector<double> point_set_descriptor(const SamplePoints& omega) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(omega.size()) * kPointDims);
    for (int t = 0; t < omega.size(); ++t) {
        const auto tri = triangle_descriptor(omega, t);
        const auto ctx = shape_context(omega, t);
        out.insert(out.end(), tri.begin(), tri.end());
        out.insert(out.end(), ctx.begin(), ctx.end());
    }
    return out;
}

std::vector<double> chains_feature(const Rect& frame, std::span<const Polyline> chains) {
    std::vector<Polyline> clipped;
    for (const Polyline& c : chains) {
        for (Polyline& sub : clip_to_block(c, frame)) clipped.push_back(std::move(sub));
    }
    if (clipped.empty()) return std::vector<double>(kDescriptorDims, 0.0);
    SamplePoints omega(resample_chains(clipped, kSampleCount));
    return point_set_descriptor(omega);
}

std::vector<double> fragment_feature(const Rect& block, const Polyline& c) {
    return chains_feature(block, std::span<const Polyline>(&c, 1));
}

std::array<double, kDeformDims> deformation_feature(Point2 p0, Point2 d, Point2 p,
                                                    double block_w, double block_h) {
    const double dx = (p.x - (p0.x + d.x)) / block_w;
    const double dy = (p.y - (p0.y + d.y)) / block_h;
    return {dx, dy, dx * dx, dy * dy};
}

bool is_zero(std::span<const double> v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

}  // namespace aot
