#pragma once

// Binary rasters and the preprocessing chain that turns a scanned glyph into
// a normalized one-pixel-wide skeleton.

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace devoc {

using PixelGrid = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Point {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Point&, const Point&) = default;
};

/// Rectangular grid of foreground (1) / background (0) pixels, row-major.
class BinaryImage {
public:
    BinaryImage() : BinaryImage(1, 1) {}
    BinaryImage(int width, int height);

    /// Test helper: one string per row, '#' or '1' marks foreground.
    static BinaryImage from_rows(std::initializer_list<std::string_view> rows);

    int width() const noexcept { return static_cast<int>(grid_.cols()); }
    int height() const noexcept { return static_cast<int>(grid_.rows()); }

    bool in_bounds(int row, int col) const noexcept {
        return row >= 0 && col >= 0 && row < height() && col < width();
    }

    /// Unchecked access.
    bool operator()(int row, int col) const noexcept { return grid_(row, col) != 0; }
    bool operator()(Point p) const noexcept { return grid_(p.row, p.col) != 0; }

    /// Off-image coordinates read as background.
    bool get(int row, int col) const noexcept { return in_bounds(row, col) && grid_(row, col) != 0; }

    void set(int row, int col, bool value = true) noexcept { grid_(row, col) = value ? 1 : 0; }
    void set(Point p, bool value = true) noexcept { set(p.row, p.col, value); }

    const PixelGrid& pixels() const noexcept { return grid_; }
    PixelGrid& pixels() noexcept { return grid_; }

    int foreground_count() const { return static_cast<int>(grid_.cast<int>().sum()); }
    bool blank() const { return (grid_ == 0).all(); }

    friend bool operator==(const BinaryImage& a, const BinaryImage& b) {
        return a.width() == b.width() && a.height() == b.height() && (a.grid_ == b.grid_).all();
    }

private:
    PixelGrid grid_;
};

struct BoundingBox {
    int row_min = 0;
    int row_max = 0;
    int col_min = 0;
    int col_max = 0;

    int height() const noexcept { return row_max - row_min + 1; }
    int width() const noexcept { return col_max - col_min + 1; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A normalized 100x100 one-pixel-wide glyph.
struct Skeleton {
    static constexpr int kSize = 100;
    BinaryImage image;
};

// ---- netpbm I/O -------------------------------------------------------------

/// Parses P1/P4 bitmaps and P2/P5 graymaps (graymaps are binarized at half of
/// maxval, darker side is foreground).
BinaryImage parse_netpbm(std::string_view bytes);

/// Reads a PBM file; graymaps are rejected with MalformedHeader.
BinaryImage load_pbm(const std::filesystem::path& path);

/// Reads any of P1/P2/P4/P5.
BinaryImage load_image(const std::filesystem::path& path);

std::string to_pbm(const BinaryImage& img);
void write_pbm(const std::filesystem::path& path, const BinaryImage& img);

// ---- geometry ----------------------------------------------------------------

BoundingBox bounding_box(const BinaryImage& img);
BinaryImage crop(const BinaryImage& img, const BoundingBox& box);

/// Foreground pixels among the 8-neighborhood; off-image neighbors are
/// background. Throws OutOfBounds.
int neighbor_count(const BinaryImage& img, int row, int col);

/// Same as neighbor_count without the bounds check on (row, col).
int neighbor_count_unchecked(const BinaryImage& img, int row, int col) noexcept;

/// True if deleting the pixel keeps the local 8-connected foreground and
/// 4-connected background topology (Yokoi connectivity number == 1).
bool is_simple(const BinaryImage& img, int row, int col) noexcept;

// ---- preprocessing -------------------------------------------------------------

/// One 3x3 dilation pass.
BinaryImage thicken(const BinaryImage& img);

/// Two-subiteration parallel thinning until a full pass deletes nothing,
/// followed by removal of redundant simple pixels (2x2 blocks, staircase
/// corners). Topology of every component is preserved.
BinaryImage thin_to_convergence(const BinaryImage& img);

/// Deletes junction-anchored branches of at most max_spur pixels, repeatedly.
BinaryImage prune(const BinaryImage& img, int max_spur);

/// Crop to the bounding box, rescale to 100x100 and re-thin.
Skeleton normalize(const BinaryImage& img);

/// Affine rescale of the pixel graph: pixel centres are mapped (first and
/// last index onto the target edges), 8-adjacent pairs are joined with
/// segments and full 2x2 blocks are filled. Thin input stays thin.
BinaryImage rescale(const BinaryImage& img, int width, int height);

/// Bresenham segment, clipped to the image.
void draw_line(BinaryImage& img, Point a, Point b);

} // namespace devoc
