#pragma once

#include <array>
#include <span>
#include <vector>

#include "aot/geometry.hpp"

namespace aot {

inline constexpr int kSampleCount = 20;
inline constexpr int kTriangleBins = 24;  // 2 x 2 x 6
inline constexpr int kContextBins = 12;   // 2 x 6
inline constexpr int kPointDims = kTriangleBins + kContextBins;
inline constexpr int kDescriptorDims = kPointDims * kSampleCount;  // 720
inline constexpr int kDeformDims = 4;

// A resampled point sequence plus its mean pairwise distance, the unit all
// distances are measured in.
class SamplePoints {
public:
    explicit SamplePoints(std::vector<Point2> pts);

    const std::vector<Point2>& points() const { return pts_; }
    double mean_distance() const { return mean_dist_; }
    int size() const { return static_cast<int>(pts_.size()); }

private:
    std::vector<Point2> pts_;
    double mean_dist_ = 0.0;
};

// Histogram over all unordered pairs {A,B} of points other than T, oriented so
// the sweep from A to B around T is clockwise in image coordinates. Bins:
// 2 (|TA|) x 2 (|TB|) x 6 (angle ATB in [0,pi]), distance boundary at the mean
// pairwise distance, L1-normalized. Degenerate triangles count as angle 0.
std::array<double, kTriangleBins> triangle_descriptor(const SamplePoints& omega, int t);

// Histogram of vectors from T to every other point: 2 radial bins (boundary at
// the mean pairwise distance) x 6 orientation bins over [0,2pi) in the image
// frame, L1-normalized.
std::array<double, kContextBins> shape_context(const SamplePoints& omega, int t);

// Per-point [triangle | context] blocks concatenated in point order.
std::vector<double> point_set_descriptor(const SamplePoints& omega);

// Clip c to the block; zero vector when nothing remains, otherwise the
// descriptor of 20 points resampled over the clipped chains.
std::vector<double> fragment_feature(const Rect& block, const Polyline& c);

// Descriptor of chains already expressed in the target frame, clipped to it.
// Used for the root verification feature; zero vector when nothing remains.
std::vector<double> chains_feature(const Rect& frame, std::span<const Polyline> chains);

// (dx, dy, dx^2, dy^2), displacement of p from the expected position
// anchor = p0 + d, normalized by the block dimensions.
std::array<double, kDeformDims> deformation_feature(Point2 p0, Point2 d, Point2 p,
                                                    double block_w, double block_h);

bool is_zero(std::span<const double> v);

}  // namespace aot
