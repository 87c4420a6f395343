#include "devoc/raster.hpp"

#include "devoc/error.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <optional>
#include <vector>

namespace devoc {
namespace {

// Clockwise from north: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDr = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDc = {0, 1, 1, 1, 0, -1, -1, -1};

std::array<bool, 8> ring(const BinaryImage& img, int r, int c) noexcept {
    std::array<bool, 8> n{};
    for (int k = 0; k < 8; ++k) n[k] = img.get(r + kDr[k], c + kDc[k]);
    return n;
}

bool adjacent8(Point a, Point b) noexcept {
    return a != b && std::abs(a.row - b.row) <= 1 && std::abs(a.col - b.col) <= 1;
}

// Number of 8-connected groups among a handful of pixels.
int group_count(const std::vector<Point>& pts) {
    std::vector<int> label(pts.size(), -1);
    int groups = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (label[i] >= 0) continue;
        label[i] = groups;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            const std::size_t j = stack.back();
            stack.pop_back();
            for (std::size_t k = 0; k < pts.size(); ++k) {
                if (label[k] < 0 && adjacent8(pts[j], pts[k])) {
                    label[k] = groups;
                    stack.push_back(k);
                }
            }
        }
        ++groups;
    }
    return groups;
}

bool zhang_suen_candidate(const std::array<bool, 8>& n, int pass) noexcept {
    // n[0..7] = P2..P9
    int b = 0;
    int a = 0;
    for (int k = 0; k < 8; ++k) {
        b += n[k];
        a += (!n[k] && n[(k + 1) % 8]);
    }
    if (b < 2 || b > 6 || a != 1) return false;
    const bool p2 = n[0], p4 = n[2], p6 = n[4], p8 = n[6];
    if (pass == 0) return !(p2 && p4 && p6) && !(p4 && p6 && p8);
    return !(p2 && p4 && p8) && !(p2 && p6 && p8);
}

// Walks from an endpoint along the branch. Returns the branch pixels (the
// junction excluded) when a junction is reached within max_len pixels.
std::optional<std::vector<Point>> spur_from(const BinaryImage& img, Point start, int max_len) {
    std::vector<Point> path{start};
    Point cur = start;
    auto on_path = [&](Point p) { return std::find(path.begin(), path.end(), p) != path.end(); };

    while (true) {
        std::vector<Point> rest;
        for (int k = 0; k < 8; ++k) {
            const Point q{cur.row + kDr[k], cur.col + kDc[k]};
            if (img.get(q.row, q.col) && !on_path(q)) rest.push_back(q);
        }
        if (rest.empty()) return std::nullopt;  // free-standing line, no anchor
        if (cur != start && group_count(rest) >= 2) {
            path.pop_back();
            return path;
        }
        if (static_cast<int>(path.size()) > max_len) return std::nullopt;
        // Prefer the 4-adjacent continuation so corner pixels are not skipped.
        auto next = std::find_if(rest.begin(), rest.end(), [&](Point q) {
            return q.row == cur.row || q.col == cur.col;
        });
        cur = next != rest.end() ? *next : rest.front();
        path.push_back(cur);
    }
}


// Topology fingerprint of a small window: how the foreground and background
// components meet the window border, plus enclosed components of each.
struct WindowShape {
    std::vector<int> fg_border;
    std::vector<int> bg_border;
    int fg_inner = 0;
    int bg_inner = 0;
    int blocks = 0;

    bool same_topology(const WindowShape& o) const {
        return fg_border == o.fg_border && bg_border == o.bg_border && fg_inner == o.fg_inner &&
               bg_inner == o.bg_inner;
    }
};

WindowShape window_shape(const BinaryImage& img, int top, int left, int size) {
    const auto at = [&](int r, int c) { return img.get(top + r, left + c); };
    WindowShape shape;
    std::vector<int> label(static_cast<std::size_t>(size * size), -1);
    for (int fg = 0; fg < 2; ++fg) {
        std::fill(label.begin(), label.end(), -1);
        int groups = 0;
        std::vector<bool> touches;
        for (int r0 = 0; r0 < size; ++r0) {
            for (int c0 = 0; c0 < size; ++c0) {
                if (at(r0, c0) != (fg == 1) || label[r0 * size + c0] >= 0) continue;
                bool border = false;
                std::vector<Point> stack{{r0, c0}};
                label[r0 * size + c0] = groups;
                while (!stack.empty()) {
                    const Point p = stack.back();
                    stack.pop_back();
                    border = border || p.row == 0 || p.col == 0 || p.row == size - 1 || p.col == size - 1;
                    for (int k = 0; k < 8; ++k) {
                        if (fg == 0 && k % 2 == 1) continue;  // background is 4-connected
                        const int r = p.row + kDr[k], c = p.col + kDc[k];
                        if (r < 0 || c < 0 || r >= size || c >= size) continue;
                        if (at(r, c) != (fg == 1) || label[r * size + c] >= 0) continue;
                        label[r * size + c] = groups;
                        stack.push_back({r, c});
                    }
                }
                touches.push_back(border);
                ++groups;
            }
        }
        std::vector<int> canon(static_cast<std::size_t>(groups), -1);
        int next = 0;
        std::vector<int>& sig = fg == 1 ? shape.fg_border : shape.bg_border;
        for (int i = 0; i < size * size; ++i) {
            const int r = i / size, c = i % size;
            if (r != 0 && c != 0 && r != size - 1 && c != size - 1) continue;
            const int l = label[i];
            if (l < 0) {
                sig.push_back(-1);
                continue;
            }
            if (canon[l] < 0) canon[l] = next++;
            sig.push_back(canon[l]);
        }
        (fg == 1 ? shape.fg_inner : shape.bg_inner) =
            static_cast<int>(std::count(touches.begin(), touches.end(), false));
    }
    for (int r = 0; r + 1 < size; ++r)
        for (int c = 0; c + 1 < size; ++c)
            shape.blocks += at(r, c) && at(r + 1, c) && at(r, c + 1) && at(r + 1, c + 1);
    return shape;
}

// A 2x2 block none of whose pixels is simple (e.g. the centre of an X) is
// broken by moving one block pixel to a neighboring position, provided the
// surrounding window keeps its topology.
bool break_block(BinaryImage& img, int r, int c) {
    constexpr int kWin = 6;
    const int top = r - 2, left = c - 2;
    const WindowShape before = window_shape(img, top, left, kWin);
    for (const Point p : {Point{r, c}, Point{r, c + 1}, Point{r + 1, c}, Point{r + 1, c + 1}}) {
        img.set(p, false);
        std::vector<std::optional<Point>> moves{std::nullopt};
        for (int k = 0; k < 8; ++k) moves.push_back(Point{p.row + kDr[k], p.col + kDc[k]});
        for (const auto& q : moves) {
            if (q) {
                if (!img.in_bounds(q->row, q->col) || img(*q) || *q == p) continue;
                if (q->row >= r && q->row <= r + 1 && q->col >= c && q->col <= c + 1) continue;
                img.set(*q);
            }
            const WindowShape after = window_shape(img, top, left, kWin);
            if (after.blocks < before.blocks && after.same_topology(before)) return true;
            if (q) img.set(*q, false);
        }
        img.set(p);
    }
    return false;
}


} // namespace

BinaryImage::BinaryImage(int width, int height) {
    if (width < 1 || height < 1)
        throw Error(Errc::WrongDimensions, "image dimensions must be positive");
    grid_ = PixelGrid::Zero(height, width);
}

BinaryImage BinaryImage::from_rows(std::initializer_list<std::string_view> rows) {
    if (rows.size() == 0) throw Error(Errc::WrongDimensions, "from_rows: no rows");
    const auto w = rows.begin()->size();
    BinaryImage img(static_cast<int>(w), static_cast<int>(rows.size()));
    int r = 0;
    for (std::string_view row : rows) {
        if (row.size() != w) throw Error(Errc::DimensionMismatch, "from_rows: ragged rows");
        for (std::size_t c = 0; c < w; ++c) img.set(r, static_cast<int>(c), row[c] == '#' || row[c] == '1');
        ++r;
    }
    return img;
}

BoundingBox bounding_box(const BinaryImage& img) {
    const auto& g = img.pixels();
    const auto rows = (g != 0).rowwise().any();
    const auto cols = (g != 0).colwise().any();
    if (!rows.any()) throw Error(Errc::EmptyImage, "bounding_box: image has no foreground");
    BoundingBox box;
    box.row_min = 0;
    while (!rows(box.row_min)) ++box.row_min;
    box.row_max = img.height() - 1;
    while (!rows(box.row_max)) --box.row_max;
    box.col_min = 0;
    while (!cols(box.col_min)) ++box.col_min;
    box.col_max = img.width() - 1;
    while (!cols(box.col_max)) --box.col_max;
    return box;
}

BinaryImage crop(const BinaryImage& img, const BoundingBox& box) {
    if (box.row_min < 0 || box.col_min < 0 || box.row_min > box.row_max || box.col_min > box.col_max ||
        box.row_max >= img.height() || box.col_max >= img.width())
        throw Error(Errc::BoxOutOfRange, "crop: box outside image");
    BinaryImage out(box.width(), box.height());
    out.pixels() = img.pixels().block(box.row_min, box.col_min, box.height(), box.width());
    return out;
}

int neighbor_count_unchecked(const BinaryImage& img, int row, int col) noexcept {
    int n = 0;
    for (int k = 0; k < 8; ++k) n += img.get(row + kDr[k], col + kDc[k]);
    return n;
}

int neighbor_count(const BinaryImage& img, int row, int col) {
    if (!img.in_bounds(row, col)) throw Error(Errc::OutOfBounds, "neighbor_count: pixel outside image");
    return neighbor_count_unchecked(img, row, col);
}

bool is_simple(const BinaryImage& img, int row, int col) noexcept {
    // Yokoi 8-connectivity number over x1..x8 = E, NE, N, NW, W, SW, S, SE.
    const auto n = ring(img, row, col);
    const std::array<bool, 8> x = {n[2], n[1], n[0], n[7], n[6], n[5], n[4], n[3]};
    int conn = 0;
    for (int k = 0; k < 8; k += 2) {
        const int a = !x[k];
        const int b = !x[(k + 1) % 8];
        const int c = !x[(k + 2) % 8];
        conn += a - a * b * c;
    }
    return conn == 1;
}

BinaryImage thicken(const BinaryImage& img) {
    BinaryImage out(img.width(), img.height());
    const auto& src = img.pixels();
    auto& dst = out.pixels();
    const int h = img.height();
    const int w = img.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!src(r, c)) continue;
            const int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, h - 1);
            const int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, w - 1);
            dst.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).setConstant(1);
        }
    }
    return out;
}

BinaryImage thin_to_convergence(const BinaryImage& img) {
    BinaryImage out = img;
    std::vector<Point> candidates;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            candidates.clear();
            for (int r = 0; r < out.height(); ++r)
                for (int c = 0; c < out.width(); ++c)
                    if (out(r, c) && zhang_suen_candidate(ring(out, r, c), pass)) candidates.push_back({r, c});
            // Parallel marking, sequential commit: a candidate is dropped if an
            // earlier deletion made it topologically necessary.
            for (Point p : candidates) {
                if (neighbor_count_unchecked(out, p.row, p.col) >= 2 && is_simple(out, p.row, p.col)) {
                    out.set(p, false);
                    changed = true;
                }
            }
        }
    }

    // Residual 2x2 blocks and staircase corners.
    changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r < out.height(); ++r) {
            for (int c = 0; c < out.width(); ++c) {
                if (out(r, c) && neighbor_count_unchecked(out, r, c) >= 2 && is_simple(out, r, c)) {
                    out.set(r, c, false);
                    changed = true;
                }
            }
        }
        if (changed) continue;
        for (int r = 0; r + 1 < out.height(); ++r) {
            for (int c = 0; c + 1 < out.width(); ++c) {
                if (out(r, c) && out(r + 1, c) && out(r, c + 1) && out(r + 1, c + 1) && break_block(out, r, c))
                    changed = true;
            }
        }
    }
    return out;
}

BinaryImage prune(const BinaryImage& img, int max_spur) {
    BinaryImage out = img;
    if (max_spur <= 0) return out;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r < out.height(); ++r) {
            for (int c = 0; c < out.width(); ++c) {
                if (!out(r, c) || neighbor_count_unchecked(out, r, c) != 1) continue;
                if (auto spur = spur_from(out, {r, c}, max_spur); spur && !spur->empty()) {
                    for (Point p : *spur) out.set(p, false);
                    changed = true;
                }
            }
        }
    }
    return out;
}

BinaryImage rescale(const BinaryImage& img, int width, int height) {
    if (width < 1 || height < 1) throw Error(Errc::WrongDimensions, "rescale: bad target size");
    const int h = img.height();
    const int w = img.width();
    // Affine map of pixel centres, first and last index onto the target edges.
    auto map = [](int i, int src, int dst) {
        if (src == 1) return (dst - 1) / 2;
        return static_cast<int>((2L * i * (dst - 1) + (src - 1)) / (2L * (src - 1)));
    };
    std::vector<int> row_to(h), col_to(w);
    for (int r = 0; r < h; ++r) row_to[r] = map(r, h, height);
    for (int c = 0; c < w; ++c) col_to[c] = map(c, w, width);

    // The image is treated as a cell complex: pixels are vertices, 8-adjacent
    // pairs are edges, full 2x2 blocks are faces. Each is mapped and drawn.
    BinaryImage out(width, height);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!img(r, c)) continue;
            const Point a{row_to[r], col_to[c]};
            out.set(a);
            for (auto [dr, dc] : {std::pair{0, 1}, {1, 0}, {1, 1}, {1, -1}}) {
                if (img.get(r + dr, c + dc)) draw_line(out, a, {row_to[r + dr], col_to[c + dc]});
            }
            if (img.get(r + 1, c) && img.get(r, c + 1) && img.get(r + 1, c + 1)) {
                out.pixels()
                    .block(row_to[r], col_to[c], row_to[r + 1] - row_to[r] + 1, col_to[c + 1] - col_to[c] + 1)
                    .setConstant(1);
            }
        }
    }
    return out;
}

void draw_line(BinaryImage& img, Point a, Point b) {
    const int dc = std::abs(b.col - a.col);
    const int dr = -std::abs(b.row - a.row);
    const int sc = a.col < b.col ? 1 : -1;
    const int sr = a.row < b.row ? 1 : -1;
    int err = dc + dr;
    Point p = a;
    while (true) {
        if (img.in_bounds(p.row, p.col)) img.set(p);
        if (p == b) break;
        const int e2 = 2 * err;
        if (e2 >= dr) {
            err += dr;
            p.col += sc;
        }
        if (e2 <= dc) {
            err += dc;
            p.row += sr;
        }
    }
}

Skeleton normalize(const BinaryImage& img) {
    const BinaryImage tight = crop(img, bounding_box(img));
    return Skeleton{thin_to_convergence(rescale(tight, Skeleton::kSize, Skeleton::kSize))};
}

} // namespace devoc
