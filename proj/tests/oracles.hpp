#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Deliberately naive.

#include "devoc/random.hpp"
#include "devoc/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <vector>

namespace oracle {

using devoc::BinaryImage;

inline int count_2x2_blocks(const BinaryImage& img) {
    int n = 0;
    for (int r = 0; r + 1 < img.height(); ++r)
        for (int c = 0; c + 1 < img.width(); ++c)
            if (img(r, c) && img(r + 1, c) && img(r, c + 1) && img(r + 1, c + 1)) ++n;
    return n;
}

/// 8-connected components; min_size filters out small ones.
inline int components(const BinaryImage& img, int min_size = 1) {
    std::vector<char> seen(static_cast<size_t>(img.width() * img.height()), 0);
    int count = 0;
    std::vector<std::pair<int, int>> stack;
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            if (!img(r, c) || seen[r * img.width() + c]) continue;
            int size = 0;
            stack.push_back({r, c});
            seen[r * img.width() + c] = 1;
            while (!stack.empty()) {
                auto [y, x] = stack.back();
                stack.pop_back();
                ++size;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = y + dy, xx = x + dx;
                        if (!img.get(yy, xx) || seen[yy * img.width() + xx]) continue;
                        seen[yy * img.width() + xx] = 1;
                        stack.push_back({yy, xx});
                    }
            }
            if (size >= min_size) ++count;
        }
    }
    return count;
}

inline int neighbors(const BinaryImage& img, int r, int c) {
    int n = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int y = r + dy, x = c + dx;
            if (y >= 0 && x >= 0 && y < img.height() && x < img.width() && img(y, x)) ++n;
        }
    return n;
}

struct Straight {
    int max_step = 0;
    int drift = 0;
    bool near = false;
};

inline Straight straightness(const std::vector<int>& h, int step_tol, int drift_tol) {
    Straight s;
    if (h.empty()) return s;  // nothing to be straight
    for (size_t i = 0; i + 1 < h.size(); ++i) s.max_step = std::max(s.max_step, std::abs(h[i + 1] - h[i]));
    int lo = h[0], hi = h[0];
    for (int v : h) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    s.drift = hi - lo;
    s.near = s.max_step <= step_tol && s.drift <= drift_tol;
    return s;
}

/// Union of random filled ellipses. Stroke-like blobs: a few fat ellipses
/// plus elongated ones.
inline BinaryImage random_blobs(int w, int h, std::uint64_t seed) {
    devoc::SplitMix64 rng(seed);
    BinaryImage img(w, h);
    const int n = rng.uniform_int(2, 7);
    for (int k = 0; k < n; ++k) {
        const double cy = 10 + rng.uniform() * (h - 20);
        const double cx = 10 + rng.uniform() * (w - 20);
        const double a = 3 + rng.uniform() * (w / 5.0);
        const double b = 2 + rng.uniform() * (h / 12.0);
        const double t = rng.uniform() * 3.141592653589793;
        const double ct = std::cos(t), st = std::sin(t);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const double dy = r - cy, dx = c - cx;
                const double u = dx * ct + dy * st;
                const double v = -dx * st + dy * ct;
                if (u * u / (a * a) + v * v / (b * b) <= 1.0) img.set(r, c);
            }
    }
    return img;
}

/// Random one-pixel-ish polyline drawing on a 100x100 canvas, thinned.
inline BinaryImage random_skeleton(std::uint64_t seed) {
    devoc::SplitMix64 rng(seed);
    BinaryImage img(100, 100);
    const int strokes = rng.uniform_int(1, 5);
    for (int s = 0; s < strokes; ++s) {
        int r = rng.uniform_int(0, 99), c = rng.uniform_int(0, 99);
        const int segs = rng.uniform_int(1, 4);
        for (int k = 0; k < segs; ++k) {
            const int r2 = rng.uniform_int(0, 99), c2 = rng.uniform_int(0, 99);
            // Bresenham
            int x0 = c, y0 = r;
            const int dx = std::abs(c2 - x0), sx = x0 < c2 ? 1 : -1;
            const int dy = -std::abs(r2 - y0), sy = y0 < r2 ? 1 : -1;
            int err = dx + dy;
            while (true) {
                img.set(y0, x0);
                if (x0 == c2 && y0 == r2) break;
                const int e2 = 2 * err;
                if (e2 >= dy) {
                    err += dy;
                    x0 += sx;
                }
                if (e2 <= dx) {
                    err += dx;
                    y0 += sy;
                }
            }
            r = r2;
            c = c2;
        }
    }
    return devoc::thin_to_convergence(img);
}

// Classify every pixel by brute-force neighbor count, merge touching
// crossing pixels by flood fill, then bucket.
inline std::array<int, 32> naive_features(const BinaryImage& img) {
    std::array<int, 32> v{};
    BinaryImage crossing(100, 100);
    for (int r = 0; r < 100; ++r)
        for (int c = 0; c < 100; ++c) {
            if (!img(r, c)) continue;
            const int n = neighbors(img, r, c);
            if (n >= 3) crossing.set(r, c);
            if (n == 1) ++v[2 * ((r / 25) * 4 + c / 25) + 1];
        }
    BinaryImage done(100, 100);
    for (int r = 0; r < 100; ++r)
        for (int c = 0; c < 100; ++c) {
            if (!crossing(r, c) || done(r, c)) continue;
            std::vector<devoc::Point> cluster{{r, c}};
            done.set(r, c);
            for (std::size_t i = 0; i < cluster.size(); ++i)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const devoc::Point q{cluster[i].row + dy, cluster[i].col + dx};
                        if (crossing.get(q.row, q.col) && !done(q.row, q.col)) {
                            done.set(q);
                            cluster.push_back(q);
                        }
                    }
            double cr = 0, cc = 0;
            for (devoc::Point p : cluster) {
                cr += p.row;
                cc += p.col;
            }
            cr /= static_cast<double>(cluster.size());
            cc /= static_cast<double>(cluster.size());
            devoc::Point best = cluster[0];
            for (devoc::Point p : cluster) {
                const double dp = std::hypot(p.row - cr, p.col - cc), db = std::hypot(best.row - cr, best.col - cc);
                const int a = neighbors(img, p.row, p.col), b = neighbors(img, best.row, best.col);
                if (dp < db - 1e-12 || (std::abs(dp - db) <= 1e-12 && (a > b || (a == b && p < best)))) best = p;
            }
            ++v[2 * ((best.row / 25) * 4 + best.col / 25)];
        }
    return v;
}

} // namespace oracle
