#pragma once

// Seeded synthetic glyphs with known structural ground truth. Templates are
// stylized stroke sets laid out on the unit square (x right, y down); they
// stand in for scanned handwriting in tests and benchmark runs.

#include "devoc/raster.hpp"
#include "devoc/structural.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace devoc {

using Polyline = std::vector<Eigen::Vector2d>;

struct GlyphTemplate {
    std::string id;
    std::vector<Polyline> strokes;
    StructuralClass truth;
    std::string class_label;
};

struct JitterSpec {
    int amplitude = 0;  // pixels, 0..3
    std::uint64_t seed = 0;
};

enum class Split { Train, Test };

const char* to_string(Split s);

struct SynthSample {
    const GlyphTemplate* source = nullptr;
    int index = 0;
    std::uint64_t seed = 0;
    Split split = Split::Train;
    BinaryImage image;

    /// `<group>/<class_label>/<index>.pbm`
    std::string relative_path() const;
};

/// Thirteen templates over the four groups of the benchmark table.
const std::vector<GlyphTemplate>& default_templates();

/// Rasterizes at 100x100 with per-vertex jitter, then thins. Vertices shared
/// between strokes receive the same offset, so joints stay joined.
BinaryImage render(const GlyphTemplate& tmpl, const JitterSpec& jitter);

/// Indices with index % 10 < 7 go to training.
Split split_for_index(int index);

std::uint64_t sample_seed(std::uint64_t base_seed, const GlyphTemplate& tmpl, int index);

std::vector<SynthSample> generate_corpus(const std::vector<GlyphTemplate>& templates, int per_class, int amplitude,
                                         std::uint64_t seed);

/// Writes the images plus manifest.csv (path,class_label,group,split).
void write_corpus(const std::filesystem::path& root, const std::vector<SynthSample>& samples);

} // namespace devoc
