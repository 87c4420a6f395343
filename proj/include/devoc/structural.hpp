#pragma once

// Stage one: headline (shirorekha) and vertical bar (spine) detection on a
// normalized skeleton, and the structural group they imply.

#include "devoc/raster.hpp"

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace devoc {

struct StructuralConfig {
    int step_tol = 2;
    double drift_tol_frac = 0.10;
    double full_span = 0.85;
    double partial_span = 0.25;
    double spine_height_frac = 0.75;
    int mid_mass_tol = 5;
    int max_consecutive_up = 2;
};

struct MaskStep {
    int rank;
    int d_row;
    int d_col;
    const char* name;
};

/// Candidate moves for the headline trace, lower rank tried first.
struct PriorityMask {
    static constexpr std::array<MaskStep, 4> steps = {{
        {1, 0, -1, "W"},
        {2, -1, -1, "NW"},
        {3, 1, -1, "SW"},
        {4, -1, 0, "N"},
    }};
};

enum class Termination { OpenEnd, NoMove, Loop, Blocked };

struct Trace {
    std::vector<Point> points;
    Termination termination = Termination::NoMove;
};

struct StraightnessReport {
    std::vector<int> distances;
    int max_step = 0;
    int drift = 0;
    bool is_near_straight = false;
};

enum class ShirorekhaKind { Full, Partial, None };
enum class SpineKind { EndSpine, MidSpine, NoSpine };

struct ShirorekhaResult {
    ShirorekhaKind kind = ShirorekhaKind::None;
    std::optional<Trace> trace;
    double span_ratio = 0.0;
};

struct SpineResult {
    SpineKind kind = SpineKind::NoSpine;
    std::optional<int> spine_col;
    std::optional<int> matra_col;
    std::vector<Point> spine_run;
    std::vector<Point> matra_run;
    bool too_many_spines = false;
};

struct StructuralClass {
    ShirorekhaKind shirorekha = ShirorekhaKind::None;
    SpineKind spine = SpineKind::NoSpine;

    friend auto operator<=>(const StructuralClass&, const StructuralClass&) = default;
};

/// The seven classes that satisfy the spine prerequisite rule.
std::vector<StructuralClass> reachable_classes();

/// Human-readable name, e.g. "Total shirorekha, End spine".
std::string group_name(StructuralClass g);

/// File-system friendly name, e.g. "full_end".
std::string group_slug(StructuralClass g);
std::optional<StructuralClass> parse_group_slug(std::string_view slug);

const char* to_string(ShirorekhaKind k);
const char* to_string(SpineKind k);
const char* to_string(Termination t);

/// Gap-aware envelope sample; std::nullopt marks an empty column/row.
using Envelope = std::vector<std::optional<int>>;

Trace trace_from_rightmost(const Skeleton& skel, int max_consecutive_up = 2);

StraightnessReport straightness(std::span<const int> heights, int step_tol, int drift_tol);

/// Row of the topmost foreground pixel per column in [col_lo, col_hi].
Envelope upper_envelope(const BinaryImage& img, int col_lo, int col_hi);

/// Distance from the right edge to the rightmost foreground pixel per row.
Envelope right_envelope(const BinaryImage& img, int row_lo, int row_hi);

/// Splits an envelope into gap-free runs, bridging gaps of at most max_gap
/// samples by linear continuation.
std::vector<std::vector<int>> envelope_segments(const Envelope& env, int max_gap = 2);

ShirorekhaResult detect_shirorekha(const Skeleton& skel, const StructuralConfig& cfg = {});
SpineResult detect_spines(const Skeleton& skel, const ShirorekhaResult& shirorekha,
                          const StructuralConfig& cfg = {});
StructuralClass classify_group(const ShirorekhaResult& shiro, const SpineResult& spine);

} // namespace devoc
