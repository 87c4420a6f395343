#include "devoc/synth.hpp"

#include "devoc/error.hpp"
#include "devoc/io.hpp"
#include "devoc/random.hpp"

#include <algorithm>
#include <cmath>
#include <system_error>

namespace devoc {
namespace {

constexpr double kMargin = 2.0;
constexpr double kExtent = 95.0;

Polyline line(std::initializer_list<std::pair<double, double>> pts) {
    Polyline out;
    for (auto [x, y] : pts) out.emplace_back(x, y);
    return out;
}

GlyphTemplate make(std::string label, StructuralClass truth, std::vector<Polyline> strokes) {
    return GlyphTemplate{label, std::move(strokes), truth, label};
}

std::vector<GlyphTemplate> build_templates() {
    const StructuralClass full_end{ShirorekhaKind::Full, SpineKind::EndSpine};
    const StructuralClass full_mid{ShirorekhaKind::Full, SpineKind::MidSpine};
    const StructuralClass full_none{ShirorekhaKind::Full, SpineKind::NoSpine};
    const StructuralClass partial_end{ShirorekhaKind::Partial, SpineKind::EndSpine};

    // Feature points sit near tile centers (0.12, 0.38, 0.62, 0.88) so that
    // jitter rarely moves them across a 25-pixel tile border.
    std::vector<GlyphTemplate> t;

    // Full headline, bar at the right end.
    t.push_back(make("cha", full_end,
                     {line({{0, 0}, {0.88, 0}, {1, 0}}), line({{0.88, 0}, {0.88, 0.38}, {0.88, 1}}),
                      line({{0.12, 0.38}, {0.88, 0.38}}), line({{0.12, 0.38}, {0.12, 0.62}})}));
    t.push_back(make("kha", full_end,
                     {line({{0, 0}, {0.38, 0}, {0.88, 0}, {1, 0}}), line({{0.88, 0}, {0.88, 0.62}, {0.88, 1}}),
                      line({{0.38, 0}, {0.38, 0.62}, {0.88, 0.62}})}));
    t.push_back(make("ssa", full_end,
                     {line({{0, 0}, {0.12, 0}, {0.62, 0}, {0.88, 0}, {1, 0}}), line({{0.88, 0}, {0.88, 1}}),
                      line({{0.12, 0}, {0.12, 0.38}}), line({{0.62, 0}, {0.62, 0.62}})}));

    // Full headline, bar with body on both sides.
    t.push_back(make("ka", full_mid,
                     {line({{0, 0}, {0.62, 0}, {1, 0}}), line({{0.62, 0}, {0.62, 0.38}, {0.62, 0.62}, {0.62, 1}}),
                      line({{0.62, 0.38}, {0.12, 0.38}, {0.12, 0.62}, {0.62, 0.62}}),
                      line({{0.62, 0.38}, {0.88, 0.38}, {0.88, 0.62}})}));
    t.push_back(make("pha", full_mid,
                     {line({{0, 0}, {0.62, 0}, {1, 0}}), line({{0.62, 0}, {0.62, 0.38}, {0.62, 0.62}, {0.62, 1}}),
                      line({{0.62, 0.38}, {0.12, 0.38}}), line({{0.62, 0.62}, {0.88, 0.62}, {0.88, 0.88}})}));
    t.push_back(make("ksa", full_mid,
                     {line({{0, 0}, {0.62, 0}, {1, 0}}), line({{0.62, 0}, {0.62, 0.12}, {0.62, 0.62}, {0.62, 1}}),
                      line({{0.62, 0.62}, {0.12, 0.88}}), line({{0.62, 0.12}, {0.88, 0.38}})}));

    // Full headline, no bar.
    t.push_back(make("ba", full_none,
                     {line({{0, 0}, {0.12, 0}, {0.88, 0}, {1, 0}}),
                      line({{0.12, 0}, {0.12, 0.38}, {0.38, 1}, {0.88, 0.38}, {0.88, 0}})}));
    t.push_back(make("ha", full_none,
                     {line({{0, 0}, {0.62, 0}, {1, 0}}), line({{0.62, 0}, {0.62, 0.38}}),
                      line({{0.62, 0.38}, {0.12, 0.62}}), line({{0.62, 0.38}, {0.88, 1}})}));
    t.push_back(make("tta", full_none,
                     {line({{0, 0}, {0.38, 0}, {1, 0}}), line({{0.38, 0}, {0.38, 0.38}, {0.62, 0.62}, {0.38, 1}})}));
    t.push_back(make("ttha", full_none,
                     {line({{0, 0}, {0.38, 0}, {1, 0}}), line({{0.38, 0}, {0.38, 0.38}}),
                      line({{0.38, 0.38}, {0.12, 0.62}, {0.38, 1}, {0.62, 0.62}, {0.38, 0.38}})}));

    // Headline over the right part only, bar at the right end.
    t.push_back(make("dha", partial_end,
                     {line({{0.40, 0}, {0.88, 0}, {1, 0}}), line({{0.88, 0}, {0.88, 0.38}, {0.88, 1}}),
                      line({{0.88, 0.38}, {0, 0.38}, {0.38, 0.88}})}));
    t.push_back(make("tha", partial_end,
                     {line({{0.40, 0}, {0.88, 0}, {1, 0}}), line({{0.88, 0}, {0.88, 0.62}, {0.88, 1}}),
                      line({{0.88, 0.62}, {0.12, 0.62}, {0, 0.38}, {0.12, 0.12}})}));
    t.push_back(make("bha", partial_end,
                     {line({{0.40, 0}, {0.62, 0}, {0.88, 0}, {1, 0}}), line({{0.88, 0}, {0.88, 1}}),
                      line({{0.62, 0}, {0.62, 0.38}, {0, 0.62}})}));
    return t;
}

Point to_pixel(const Eigen::Vector2d& v, int amplitude, std::uint64_t seed) {
    int dr = 0;
    int dc = 0;
    if (amplitude > 0) {
        const auto qx = static_cast<std::uint64_t>(std::llround(v.x() * 1000.0));
        const auto qy = static_cast<std::uint64_t>(std::llround(v.y() * 1000.0));
        SplitMix64 rng(mix_seed(mix_seed(seed, qx), qy));
        dc = rng.uniform_int(-amplitude, amplitude);
        dr = rng.uniform_int(-amplitude, amplitude);
    }
    const int last = Skeleton::kSize - 1;
    const int col = static_cast<int>(std::lround(kMargin + v.x() * kExtent)) + dc;
    const int row = static_cast<int>(std::lround(kMargin + v.y() * kExtent)) + dr;
    return {std::clamp(row, 0, last), std::clamp(col, 0, last)};
}

} // namespace

const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::string SynthSample::relative_path() const {
    return group_slug(source->truth) + "/" + source->class_label + "/" + std::to_string(index) + ".pbm";
}

const std::vector<GlyphTemplate>& default_templates() {
    static const std::vector<GlyphTemplate> templates = build_templates();
    return templates;
}

BinaryImage render(const GlyphTemplate& tmpl, const JitterSpec& jitter) {
    BinaryImage img(Skeleton::kSize, Skeleton::kSize);
    const int amp = std::clamp(jitter.amplitude, 0, 3);
    for (const Polyline& stroke : tmpl.strokes) {
        if (stroke.size() == 1) {
            img.set(to_pixel(stroke.front(), amp, jitter.seed));
            continue;
        }
        for (std::size_t i = 1; i < stroke.size(); ++i)
            draw_line(img, to_pixel(stroke[i - 1], amp, jitter.seed), to_pixel(stroke[i], amp, jitter.seed));
    }
    return thin_to_convergence(img);
}

Split split_for_index(int index) { return index % 10 < 7 ? Split::Train : Split::Test; }

std::uint64_t sample_seed(std::uint64_t base_seed, const GlyphTemplate& tmpl, int index) {
    return mix_seed(mix_seed(base_seed, hash_name(tmpl.id)), static_cast<std::uint64_t>(index));
}

std::vector<SynthSample> generate_corpus(const std::vector<GlyphTemplate>& templates, int per_class, int amplitude,
                                         std::uint64_t seed) {
    std::vector<SynthSample> out;
    out.reserve(templates.size() * static_cast<std::size_t>(std::max(per_class, 0)));
    for (const GlyphTemplate& tmpl : templates) {
        for (int i = 0; i < per_class; ++i) {
            SynthSample s;
            s.source = &tmpl;
            s.index = i;
            s.seed = sample_seed(seed, tmpl, i);
            s.split = split_for_index(i);
            s.image = render(tmpl, {amplitude, s.seed});
            out.push_back(std::move(s));
        }
    }
    return out;
}

void write_corpus(const std::filesystem::path& root, const std::vector<SynthSample>& samples) {
    std::string manifest = "path,class_label,group,split\n";
    for (const SynthSample& s : samples) {
        const std::string rel = s.relative_path();
        const std::filesystem::path file = root / rel;
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
        if (ec) throw Error(Errc::IoFailure, "cannot create " + file.parent_path().string());
        write_text_atomic(file, to_pbm(s.image));
        manifest += rel + "," + s.source->class_label + "," + group_slug(s.source->truth) + "," + to_string(s.split) + "\n";
    }
    write_text_atomic(root / "manifest.csv", manifest);
}

} // namespace devoc
