#include "devoc/structural.hpp"

#include "devoc/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace devoc {
namespace {

int drift_tolerance(double frac, int length) {
    return static_cast<int>(std::ceil(frac * static_cast<double>(length) - 1e-9));
}

struct VerticalRun {
    std::vector<Point> points;
    std::vector<int> row_cols;  // rightmost column per row, top to bottom
    int min_col = 0;
    int max_col = 0;
    double mean_col = 0.0;

    int rows() const { return static_cast<int>(row_cols.size()); }
};

// Greedy downward walk (at most step_tol sideways moves in a row) that refuses any move breaking the straightness
// bounds, so the result is always a near-straight run.
VerticalRun walk_down(const BinaryImage& img, Point start, int drift_bound, int step_tol) {
    VerticalRun run;
    run.points.push_back(start);
    run.row_cols.push_back(start.col);
    run.min_col = run.max_col = start.col;
    long col_sum = start.col;
    Point cur = start;
    Point prev{-1, -1};
    int sideways = 0;

    while (true) {
        const double mean = static_cast<double>(col_sum) / static_cast<double>(run.points.size());
        std::array<Point, 5> options{};
        int n = 0;
        options[n++] = {cur.row + 1, cur.col};
        const Point sw{cur.row + 1, cur.col - 1};
        const Point se{cur.row + 1, cur.col + 1};
        if (std::abs(se.col - mean) < std::abs(sw.col - mean)) {
            options[n++] = se;
            options[n++] = sw;
        } else {
            options[n++] = sw;
            options[n++] = se;
        }
        if (sideways < step_tol) {
            options[n++] = {cur.row, cur.col - 1};
            options[n++] = {cur.row, cur.col + 1};
        }

        auto continues = [&](Point q) {
            return img.get(q.row + 1, q.col - 1) || img.get(q.row + 1, q.col) || img.get(q.row + 1, q.col + 1);
        };
        bool moved = false;
        for (int i = 0; i < 2 * n && !moved; ++i) {
            const Point q = options[i % n];
            if (!img.get(q.row, q.col) || q == prev) continue;
            if (i < n && !continues(q)) continue;
            const int lo = std::min(run.min_col, q.col);
            const int hi = std::max(run.max_col, q.col);
            if (hi - lo > drift_bound) continue;
            const bool down = q.row > cur.row;
            const int row_col = down ? q.col : std::max(run.row_cols.back(), q.col);
            if (run.rows() >= (down ? 1 : 2)) {
                const int ref = run.row_cols[run.row_cols.size() - (down ? 1 : 2)];
                if (std::abs(row_col - ref) > step_tol) continue;
            }
            if (down) run.row_cols.push_back(row_col);
            else run.row_cols.back() = row_col;
            run.points.push_back(q);
            run.min_col = lo;
            run.max_col = hi;
            col_sum += q.col;
            sideways = down ? 0 : sideways + 1;
            prev = cur;
            cur = q;
            moved = true;
        }
        if (!moved) break;
    }
    run.mean_col = static_cast<double>(col_sum) / static_cast<double>(run.points.size());
    return run;
}

int col_at_row(const std::vector<Point>& run, int row, int fallback) {
    int best = -1;
    for (Point p : run)
        if (p.row == row) best = std::max(best, p.col);
    return best >= 0 ? best : fallback;
}

} // namespace

std::vector<StructuralClass> reachable_classes() {
    std::vector<StructuralClass> out;
    for (auto s : {ShirorekhaKind::Full, ShirorekhaKind::Partial, ShirorekhaKind::None})
        for (auto p : {SpineKind::EndSpine, SpineKind::MidSpine, SpineKind::NoSpine})
            if (s != ShirorekhaKind::None || p == SpineKind::NoSpine) out.push_back({s, p});
    return out;
}

const char* to_string(ShirorekhaKind k) {
    switch (k) {
        case ShirorekhaKind::Full: return "Full";
        case ShirorekhaKind::Partial: return "Partial";
        case ShirorekhaKind::None: return "None";
    }
    return "?";
}

const char* to_string(SpineKind k) {
    switch (k) {
        case SpineKind::EndSpine: return "EndSpine";
        case SpineKind::MidSpine: return "MidSpine";
        case SpineKind::NoSpine: return "NoSpine";
    }
    return "?";
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::OpenEnd: return "OpenEnd";
        case Termination::NoMove: return "NoMove";
        case Termination::Loop: return "Loop";
        case Termination::Blocked: return "Blocked";
    }
    return "?";
}

std::string group_name(StructuralClass g) {
    std::string s;
    switch (g.shirorekha) {
        case ShirorekhaKind::Full: s = "Total shirorekha"; break;
        case ShirorekhaKind::Partial: s = "Partial shirorekha"; break;
        case ShirorekhaKind::None: s = "No shirorekha"; break;
    }
    switch (g.spine) {
        case SpineKind::EndSpine: return s + ", End spine";
        case SpineKind::MidSpine: return s + ", Mid spine";
        case SpineKind::NoSpine: return s + ", No spine";
    }
    return s;
}

std::string group_slug(StructuralClass g) {
    static const char* shiro[] = {"full", "partial", "none"};
    static const char* spine[] = {"end", "mid", "none"};
    return std::string(shiro[static_cast<int>(g.shirorekha)]) + "_" + spine[static_cast<int>(g.spine)];
}

std::optional<StructuralClass> parse_group_slug(std::string_view slug) {
    for (StructuralClass g : reachable_classes())
        if (group_slug(g) == slug) return g;
    return std::nullopt;
}

Trace trace_from_rightmost(const Skeleton& skel, int max_consecutive_up) {
    const BinaryImage& img = skel.image;
    std::optional<Point> start;
    for (int c = img.width() - 1; c >= 0 && !start; --c)
        for (int r = 0; r < img.height(); ++r)
            if (img(r, c)) {
                start = Point{r, c};
                break;
            }
    if (!start) throw Error(Errc::EmptyImage, "trace_from_rightmost: empty skeleton");

    PixelGrid visited = PixelGrid::Zero(img.height(), img.width());
    Trace trace;
    trace.points.push_back(*start);
    visited(start->row, start->col) = 1;
    Point cur = *start;
    int ups = 0;
    bool blocked_by_visit = false;

    while (true) {
        blocked_by_visit = false;
        bool moved = false;
        for (const MaskStep& step : PriorityMask::steps) {
            const Point q{cur.row + step.d_row, cur.col + step.d_col};
            if (!img.get(q.row, q.col)) continue;
            if (visited(q.row, q.col)) {
                blocked_by_visit = true;
                continue;
            }
            const bool up = step.d_col == 0;
            if (up && ups >= max_consecutive_up) continue;
            ups = up ? ups + 1 : 0;
            visited(q.row, q.col) = 1;
            trace.points.push_back(q);
            cur = q;
            moved = true;
            break;
        }
        if (!moved) break;
    }

    if (trace.points.size() == 1) trace.termination = Termination::NoMove;
    else if (neighbor_count_unchecked(img, cur.row, cur.col) == 1) trace.termination = Termination::OpenEnd;
    else if (blocked_by_visit) trace.termination = Termination::Loop;
    else trace.termination = Termination::Blocked;
    return trace;
}

StraightnessReport straightness(std::span<const int> heights, int step_tol, int drift_tol) {
    StraightnessReport rep;
    rep.distances.assign(heights.begin(), heights.end());
    if (heights.empty()) return rep;
    for (std::size_t i = 1; i < heights.size(); ++i)
        rep.max_step = std::max(rep.max_step, std::abs(heights[i] - heights[i - 1]));
    const auto [lo, hi] = std::minmax_element(heights.begin(), heights.end());
    rep.drift = *hi - *lo;
    rep.is_near_straight = rep.max_step <= step_tol && rep.drift <= drift_tol;
    return rep;
}

Envelope upper_envelope(const BinaryImage& img, int col_lo, int col_hi) {
    Envelope env;
    for (int c = std::max(col_lo, 0); c <= std::min(col_hi, img.width() - 1); ++c) {
        std::optional<int> top;
        for (int r = 0; r < img.height(); ++r)
            if (img(r, c)) {
                top = r;
                break;
            }
        env.push_back(top);
    }
    return env;
}

Envelope right_envelope(const BinaryImage& img, int row_lo, int row_hi) {
    Envelope env;
    for (int r = std::max(row_lo, 0); r <= std::min(row_hi, img.height() - 1); ++r) {
        std::optional<int> dist;
        for (int c = img.width() - 1; c >= 0; --c)
            if (img(r, c)) {
                dist = img.width() - 1 - c;
                break;
            }
        env.push_back(dist);
    }
    return env;
}

std::vector<std::vector<int>> envelope_segments(const Envelope& env, int max_gap) {
    std::vector<std::vector<int>> segments;
    std::vector<int> cur;
    std::size_t i = 0;
    while (i < env.size()) {
        if (env[i]) {
            cur.push_back(*env[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < env.size() && !env[j]) ++j;
        const auto gap = static_cast<int>(j - i);
        if (!cur.empty() && j < env.size() && gap <= max_gap) {
            const double a = cur.back();
            const double b = *env[j];
            for (int k = 1; k <= gap; ++k)
                cur.push_back(static_cast<int>(std::lround(a + (b - a) * k / (gap + 1))));
        } else if (!cur.empty()) {
            segments.push_back(std::move(cur));
            cur.clear();
        }
        i = j;
    }
    if (!cur.empty()) segments.push_back(std::move(cur));
    return segments;
}

ShirorekhaResult detect_shirorekha(const Skeleton& skel, const StructuralConfig& cfg) {
    Trace trace = trace_from_rightmost(skel, cfg.max_consecutive_up);
    ShirorekhaResult res;
    if (trace.points.size() < 2) return res;

    std::map<int, int> top_by_col;
    for (Point p : trace.points) {
        auto [it, fresh] = top_by_col.try_emplace(p.col, p.row);
        if (!fresh) it->second = std::min(it->second, p.row);
    }
    std::vector<int> heights;
    heights.reserve(top_by_col.size());
    for (const auto& [col, row] : top_by_col) heights.push_back(row);
    const int span = static_cast<int>(heights.size());

    const BoundingBox box = bounding_box(skel.image);
    res.span_ratio = static_cast<double>(span) / static_cast<double>(box.width());

    const auto rep = straightness(heights, cfg.step_tol, drift_tolerance(cfg.drift_tol_frac, span));
    if (!rep.is_near_straight || trace.termination != Termination::OpenEnd) return res;

    if (res.span_ratio >= cfg.full_span) res.kind = ShirorekhaKind::Full;
    else if (res.span_ratio >= cfg.partial_span) res.kind = ShirorekhaKind::Partial;
    else return res;
    res.trace = std::move(trace);
    return res;
}

SpineResult detect_spines(const Skeleton& skel, const ShirorekhaResult& shirorekha,
                          const StructuralConfig& cfg) {
    const BinaryImage& img = skel.image;
    const BoundingBox box = bounding_box(img);
    SpineResult res;
    if (shirorekha.kind == ShirorekhaKind::None) return res;

    const int required = static_cast<int>(std::ceil(cfg.spine_height_frac * box.height() - 1e-9));
    const int drift_bound = drift_tolerance(cfg.drift_tol_frac, required);

    std::vector<VerticalRun> found;
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            if (!img(r, c) || img.get(r - 1, c)) continue;
            VerticalRun run = walk_down(img, {r, c}, drift_bound, cfg.step_tol);
            if (run.rows() < required) continue;
            std::vector<int> dist(run.row_cols.size());
            std::transform(run.row_cols.begin(), run.row_cols.end(), dist.begin(),
                           [&](int col) { return img.width() - 1 - col; });
            if (!straightness(dist, cfg.step_tol, drift_tolerance(cfg.drift_tol_frac, run.rows())).is_near_straight)
                continue;
            found.push_back(std::move(run));
        }
    }

    // Walks from neighboring starts trace the same bar; keep the longest one
    // per column band.
    std::stable_sort(found.begin(), found.end(), [](const VerticalRun& a, const VerticalRun& b) {
        if (a.rows() != b.rows()) return a.rows() > b.rows();
        return a.mean_col > b.mean_col;
    });
    std::vector<VerticalRun> bars;
    for (VerticalRun& run : found) {
        const bool overlaps = std::any_of(bars.begin(), bars.end(), [&](const VerticalRun& b) {
            return run.min_col <= b.max_col + 1 && b.min_col <= run.max_col + 1;
        });
        if (!overlaps) bars.push_back(std::move(run));
    }
    std::sort(bars.begin(), bars.end(),
              [](const VerticalRun& a, const VerticalRun& b) { return a.mean_col > b.mean_col; });

    if (bars.empty()) return res;
    if (bars.size() > 2) {
        res.too_many_spines = true;
        bars.resize(2);
    }
    const VerticalRun* spine = &bars[0];
    if (bars.size() == 2) {
        res.matra_col = static_cast<int>(std::lround(bars[0].mean_col));
        res.matra_run = bars[0].points;
        spine = &bars[1];
    }
    res.spine_col = static_cast<int>(std::lround(spine->mean_col));
    res.spine_run = spine->points;

    // Headline band: rows at or just below the trace are not body mass.
    std::map<int, int> band;
    int band_default = -1;
    if (shirorekha.trace) {
        for (Point p : shirorekha.trace->points) {
            auto [it, fresh] = band.try_emplace(p.col, p.row);
            if (!fresh) it->second = std::min(it->second, p.row);
            band_default = std::max(band_default, p.row);
        }
    }
    auto in_band = [&](int r, int c) {
        if (band_default < 0) return false;
        auto it = band.find(c);
        const int top = it != band.end() ? it->second : band_default;
        return r <= top + cfg.step_tol + 1;
    };

    int mass = 0;
    for (int r = 0; r < img.height(); ++r) {
        const int limit = col_at_row(res.spine_run, r, *res.spine_col) + 1;
        const int matra = res.matra_col ? col_at_row(res.matra_run, r, *res.matra_col) : -10;
        for (int c = limit + 1; c < img.width(); ++c) {
            if (!img(r, c) || in_band(r, c)) continue;
            if (std::abs(c - matra) <= 1) continue;
            ++mass;
        }
    }
    res.kind = mass < cfg.mid_mass_tol ? SpineKind::EndSpine : SpineKind::MidSpine;
    return res;
}

StructuralClass classify_group(const ShirorekhaResult& shiro, const SpineResult& spine) {
    if (shiro.kind == ShirorekhaKind::None && spine.kind != SpineKind::NoSpine)
        throw Error(Errc::InconsistentInputs, "spine reported without a shirorekha");
    return {shiro.kind, spine.kind};
}

} // namespace devoc
