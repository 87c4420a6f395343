#include "devoc/features.hpp"

#include "devoc/error.hpp"

namespace devoc {

int tile_of(int row, int col) {
    if (row < 0 || col < 0 || row >= Skeleton::kSize || col >= Skeleton::kSize)
        throw Error(Errc::OutOfBounds, "tile_of: pixel outside the 100x100 grid");
    return (row / kTileSize) * kTilesPerSide + col / kTileSize;
}

std::vector<FeaturePoint> find_feature_points(const Skeleton& skel) {
    const BinaryImage& img = skel.image;
    const int h = img.height();
    const int w = img.width();
    std::vector<int> count(static_cast<std::size_t>(h * w), 0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (img(r, c)) count[r * w + c] = neighbor_count_unchecked(img, r, c);

    std::vector<FeaturePoint> points;
    std::vector<char> seen(count.size(), 0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int n = count[r * w + c];
            if (!img(r, c)) continue;
            if (n == 1) {
                points.push_back({{r, c}, FeatureKind::OpenEnd});
                continue;
            }
            if (n < 3 || seen[r * w + c]) continue;
            // Pixels with >= 3 neighbors that touch each other form one
            // crossing, reported once at the pixel nearest its centroid.
            std::vector<Point> cluster{{r, c}};
            seen[r * w + c] = 1;
            long sum_r = 0, sum_c = 0;
            for (std::size_t i = 0; i < cluster.size(); ++i) {
                const Point p = cluster[i];
                sum_r += p.row;
                sum_c += p.col;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int rr = p.row + dr, cc = p.col + dc;
                        if (!img.get(rr, cc) || seen[rr * w + cc] || count[rr * w + cc] < 3) continue;
                        seen[rr * w + cc] = 1;
                        cluster.push_back({rr, cc});
                    }
            }
            const long n_pts = static_cast<long>(cluster.size());
            auto dist = [&](Point p) {
                const long dr = p.row * n_pts - sum_r, dc = p.col * n_pts - sum_c;
                return dr * dr + dc * dc;
            };
            Point best = cluster[0];
            for (Point p : cluster) {
                const long dp = dist(p), db = dist(best);
                const int np = count[p.row * w + p.col], nb = count[best.row * w + best.col];
                if (dp < db || (dp == db && (np > nb || (np == nb && p < best)))) best = p;
            }
            points.push_back({best, FeatureKind::Intersection});
        }
    }
    return points;
}

FeatureVector extract_features(const Skeleton& skel) {
    if (skel.image.width() != Skeleton::kSize || skel.image.height() != Skeleton::kSize)
        throw Error(Errc::WrongDimensions, "extract_features: skeleton must be 100x100");
    FeatureVector v{};
    for (const FeaturePoint& p : find_feature_points(skel)) {
        const int t = tile_of(p.position.row, p.position.col);
        ++v[2 * t + (p.kind == FeatureKind::OpenEnd ? 1 : 0)];
    }
    return v;
}

} // namespace devoc
