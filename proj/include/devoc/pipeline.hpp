#pragma once

// Two-stage recognition: structural routing, then a per-group network over
// the zoning features. Also corpus loading, per-group training and the
// accuracy report.

#include "devoc/features.hpp"
#include "devoc/nn.hpp"
#include "devoc/raster.hpp"
#include "devoc/structural.hpp"
#include "devoc/synth.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace devoc {

struct PipelineConfig {
    int max_spur = 3;
    StructuralConfig structural;
};

struct GlyphAnalysis {
    Skeleton skeleton;
    ShirorekhaResult shirorekha;
    SpineResult spine;
    StructuralClass group;
    FeatureVector features{};
};

/// crop -> thicken -> thin -> prune -> normalize -> thin.
Skeleton preprocess_glyph(const BinaryImage& img, const PipelineConfig& cfg = {});

/// Clears the matra run (column +-1) so features describe the body only.
BinaryImage mask_matra(const BinaryImage& img, const SpineResult& spine);

GlyphAnalysis analyze_glyph(const BinaryImage& img, const PipelineConfig& cfg = {});

struct GroupModel {
    Mlp<double> net;
    std::vector<std::string> labels;
};

class GroupModelSet {
public:
    /// Throws BadDimensions if n_out != label count or labels repeat.
    void insert(StructuralClass group, GroupModel model);
    const GroupModel* find(StructuralClass group) const;
    const std::map<StructuralClass, GroupModel>& models() const { return models_; }
    bool empty() const { return models_.empty(); }

    /// One `<slug>.mlp` per group plus `modelset.txt`.
    void save(const std::filesystem::path& dir) const;
    static GroupModelSet load(const std::filesystem::path& dir);

private:
    std::map<StructuralClass, GroupModel> models_;
};

struct Prediction {
    StructuralClass group;
    std::optional<std::string> label;  // empty when rejected
    double confidence = 0.0;

    bool rejected() const { return !label.has_value(); }
    std::string label_or_rejected() const { return label.value_or("REJECTED"); }
    friend bool operator==(const Prediction&, const Prediction&) = default;
};

Prediction predict_analysis(const GlyphAnalysis& analysis, const GroupModelSet& models);
Prediction recognize(const BinaryImage& img, const GroupModelSet& models, const PipelineConfig& cfg = {});

// ---- corpora -----------------------------------------------------------------

struct ManifestEntry {
    std::string path;
    std::string label;
    std::string group;
    Split split = Split::Train;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& corpus_dir);

struct LabeledGlyph {
    std::string path;
    std::string label;
    std::string group;  // as stated by the manifest
    Split split = Split::Train;
    GlyphAnalysis analysis;
};

/// Loads and analyzes every manifest entry. Blank images raise EmptyImage.
std::vector<LabeledGlyph> load_corpus(const std::filesystem::path& corpus_dir, const PipelineConfig& cfg = {});

// ---- training ------------------------------------------------------------------

struct RoutingError {
    std::string path;
    std::string manifest_group;
    StructuralClass detected;
};

struct GroupTrainingSummary {
    StructuralClass group;
    std::size_t samples = 0;
    std::vector<std::string> labels;
    TrainReport<double> report;
};

struct TrainAllResult {
    GroupModelSet models;
    std::vector<GroupTrainingSummary> groups;
    std::vector<RoutingError> routing_errors;
    /// Detected groups made up mostly of misrouted samples; no model is built.
    std::vector<StructuralClass> dropped;
};

/// Trains one network per detected group over the training split.
TrainAllResult train_all(const std::vector<LabeledGlyph>& corpus, const TrainConfig& cfg);

/// Feature CSV: label,group,f0..f31 (raw counts), header row included.
std::string features_csv(const std::vector<LabeledGlyph>& corpus);

// ---- evaluation ------------------------------------------------------------------

struct PredictionRecord {
    std::string path;
    std::string true_label;
    std::string true_group;
    Split split = Split::Train;
    Prediction prediction;
    bool correct = false;
};

struct EvalRow {
    std::string group;  // manifest group
    int n_test = 0;
    int correct_test = 0;
    int n_train = 0;
    int correct_train = 0;

    std::optional<double> test_accuracy() const;
    std::optional<double> train_accuracy() const;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    EvalRow overall;
    std::vector<PredictionRecord> log;
};

using Predictor = std::function<Prediction(const GlyphAnalysis&)>;

/// End-to-end accounting: a sample counts as correct only if the predicted
/// label equals its manifest label, so routing errors count against accuracy.
EvalReport evaluate(const std::vector<LabeledGlyph>& corpus, const Predictor& predict);
EvalReport evaluate(const std::vector<LabeledGlyph>& corpus, const GroupModelSet& models);

std::string render_report_text(const EvalReport& report);
std::string render_report_csv(const EvalReport& report);
std::string render_prediction_log(const EvalReport& report);

} // namespace devoc
