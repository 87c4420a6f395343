#pragma once

// Zoning features: the 100x100 skeleton is cut into a 4x4 grid of 25x25
// tiles and each tile reports (intersection count, open-end count).

#include "devoc/raster.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <vector>

namespace devoc {

inline constexpr int kTileSize = 25;
inline constexpr int kTilesPerSide = 4;
inline constexpr int kFeatureCount = 2 * kTilesPerSide * kTilesPerSide;

enum class FeatureKind { Intersection, OpenEnd };

struct FeaturePoint {
    Point position;
    FeatureKind kind;

    friend bool operator==(const FeaturePoint&, const FeaturePoint&) = default;
};

/// Layout: tile t (row-major) occupies slots 2t (intersections) and 2t+1
/// (open ends).
using FeatureVector = std::array<int, kFeatureCount>;

int tile_of(int row, int col);

/// Open end: exactly one 8-neighbor. Intersection: an 8-connected cluster of
/// pixels with three or more neighbors, reported once at the pixel nearest
/// the cluster centroid. Neighbor counts are taken over the
/// whole image, so tile borders never create phantom ends.
std::vector<FeaturePoint> find_feature_points(const Skeleton& skel);

FeatureVector extract_features(const Skeleton& skel);

/// Counts divided by 5 and clamped to [0, 1].
template <typename Scalar = double>
Eigen::Matrix<Scalar, kFeatureCount, 1> scale_features(const FeatureVector& v) {
    Eigen::Matrix<Scalar, kFeatureCount, 1> out;
    for (int i = 0; i < kFeatureCount; ++i)
        out(i) = std::clamp(static_cast<Scalar>(v[i]) / Scalar(5), Scalar(0), Scalar(1));
    return out;
}

} // namespace devoc
