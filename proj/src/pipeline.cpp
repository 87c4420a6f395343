#include "devoc/pipeline.hpp"

#include "devoc/error.hpp"
#include "devoc/io.hpp"
#include "devoc/random.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <system_error>

namespace devoc {
namespace {

constexpr std::string_view kModelSetMagic = "DEVOC-MODELSET v1";

BinaryImage pad(const BinaryImage& img, int border) {
    BinaryImage out(img.width() + 2 * border, img.height() + 2 * border);
    out.pixels().block(border, border, img.height(), img.width()) = img.pixels();
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

std::string percent(std::optional<double> v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

// Table order: groups known to the detector first, in a fixed order, then
// anything else alphabetically.
int group_rank(const std::string& group) {
    static const std::vector<std::string> order = {"partial_end", "full_end",   "full_mid",  "full_none",
                                                   "partial_mid", "partial_none", "none_none"};
    const auto it = std::find(order.begin(), order.end(), group);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

std::string display_group(const std::string& group) {
    if (auto g = parse_group_slug(group)) return group_name(*g);
    return group.empty() ? "(unspecified)" : group;
}

} // namespace

Skeleton preprocess_glyph(const BinaryImage& img, const PipelineConfig& cfg) {
    const BinaryImage tight = pad(crop(img, bounding_box(img)), 2);
    const BinaryImage cleaned = prune(thin_to_convergence(thicken(tight)), cfg.max_spur);
    Skeleton skel = normalize(cleaned);
    skel.image = thin_to_convergence(skel.image);
    return skel;
}

BinaryImage mask_matra(const BinaryImage& img, const SpineResult& spine) {
    BinaryImage out = img;
    if (!spine.matra_col) return out;
    for (Point p : spine.matra_run)
        for (int dc = -1; dc <= 1; ++dc)
            if (out.in_bounds(p.row, p.col + dc)) out.set(p.row, p.col + dc, false);
    return out;
}

GlyphAnalysis analyze_glyph(const BinaryImage& img, const PipelineConfig& cfg) {
    GlyphAnalysis a;
    a.skeleton = preprocess_glyph(img, cfg);
    a.shirorekha = detect_shirorekha(a.skeleton, cfg.structural);
    a.spine = detect_spines(a.skeleton, a.shirorekha, cfg.structural);
    a.group = classify_group(a.shirorekha, a.spine);
    a.features = extract_features(Skeleton{mask_matra(a.skeleton.image, a.spine)});
    return a;
}

// ---- model sets ------------------------------------------------------------------

void GroupModelSet::insert(StructuralClass group, GroupModel model) {
    if (static_cast<Eigen::Index>(model.labels.size()) != model.net.n_out())
        throw Error(Errc::BadDimensions, "group model: label count does not match n_out");
    std::set<std::string> unique(model.labels.begin(), model.labels.end());
    if (unique.size() != model.labels.size()) throw Error(Errc::BadDimensions, "group model: duplicate labels");
    models_.insert_or_assign(group, std::move(model));
}

const GroupModel* GroupModelSet::find(StructuralClass group) const {
    const auto it = models_.find(group);
    return it == models_.end() ? nullptr : &it->second;
}

void GroupModelSet::save(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string());
    std::string index = std::string(kModelSetMagic) + "\n";
    for (const auto& [group, model] : models_) {
        const std::string file = group_slug(group) + ".mlp";
        save_model(dir / file, model.net, model.labels);
        index += group_slug(group) + " " + file + "\n";
    }
    write_text_atomic(dir / "modelset.txt", index);
}

GroupModelSet GroupModelSet::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error(Errc::IoFailure, "model directory not found: " + dir.string());
    std::istringstream in(read_text(dir / "modelset.txt"));
    std::string line;
    if (!std::getline(in, line) || trim(line) != kModelSetMagic)
        throw Error(Errc::MalformedModelFile, "modelset.txt: bad header");
    GroupModelSet set;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string slug, file;
        if (!(fields >> slug >> file)) throw Error(Errc::MalformedModelFile, "modelset.txt: bad entry '" + line + "'");
        const auto group = parse_group_slug(slug);
        if (!group) throw Error(Errc::MalformedModelFile, "modelset.txt: unknown group '" + slug + "'");
        LabeledModel m = load_model(dir / file);
        set.insert(*group, GroupModel{std::move(m.net), std::move(m.labels)});
    }
    return set;
}

Prediction predict_analysis(const GlyphAnalysis& analysis, const GroupModelSet& models) {
    Prediction pred;
    pred.group = analysis.group;
    const GroupModel* model = models.find(analysis.group);
    if (!model) return pred;
    const Mlp<double>::Vector x = scale_features<double>(analysis.features);
    const Mlp<double>::Vector p = forward(model->net, x);
    Eigen::Index best = 0;
    p.maxCoeff(&best);
    pred.label = model->labels[static_cast<std::size_t>(best)];
    pred.confidence = p(best);
    return pred;
}

Prediction recognize(const BinaryImage& img, const GroupModelSet& models, const PipelineConfig& cfg) {
    return predict_analysis(analyze_glyph(img, cfg), models);
}

// ---- corpora -------------------------------------------------------------------

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& corpus_dir) {
    const auto path = corpus_dir / "manifest.csv";
    if (!std::filesystem::is_regular_file(path)) throw Error(Errc::IoFailure, "manifest not found: " + path.string());
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "path,class_label,group,split")
        throw Error(Errc::MalformedHeader, "manifest.csv: expected header path,class_label,group,split");
    std::vector<ManifestEntry> entries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 4 || cells[0].empty() || cells[1].empty())
            throw Error(Errc::MalformedHeader, "manifest.csv line " + std::to_string(line_no) + ": expected 4 fields");
        ManifestEntry e{cells[0], cells[1], cells[2], Split::Train};
        if (cells[3] == "test") e.split = Split::Test;
        else if (cells[3] != "train")
            throw Error(Errc::MalformedHeader, "manifest.csv line " + std::to_string(line_no) + ": bad split");
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<LabeledGlyph> load_corpus(const std::filesystem::path& corpus_dir, const PipelineConfig& cfg) {
    std::vector<LabeledGlyph> out;
    for (ManifestEntry& e : read_manifest(corpus_dir)) {
        const BinaryImage img = load_image(corpus_dir / e.path);
        LabeledGlyph g;
        try {
            g.analysis = analyze_glyph(img, cfg);
        } catch (const Error& err) {
            if (err.code() == Errc::EmptyImage) throw Error(Errc::EmptyImage, "empty glyph: " + e.path);
            throw;
        }
        g.path = std::move(e.path);
        g.label = std::move(e.label);
        g.group = std::move(e.group);
        g.split = e.split;
        out.push_back(std::move(g));
    }
    return out;
}

// ---- training ---------------------------------------------------------------------

TrainAllResult train_all(const std::vector<LabeledGlyph>& corpus, const TrainConfig& cfg) {
    cfg.validate();
    TrainAllResult result;
    std::map<StructuralClass, std::vector<const LabeledGlyph*>> by_group;
    for (const LabeledGlyph& g : corpus) {
        if (g.split != Split::Train) continue;
        by_group[g.analysis.group].push_back(&g);
        if (!g.group.empty() && g.group != group_slug(g.analysis.group))
            result.routing_errors.push_back({g.path, g.group, g.analysis.group});
    }
    if (by_group.empty()) throw Error(Errc::InsufficientData, "training split is empty");

    for (const auto& [group, members] : by_group) {
        const std::string slug = group_slug(group);
        const auto agreeing = std::count_if(members.begin(), members.end(), [&](const LabeledGlyph* g) {
            return g->group.empty() || g->group == slug;
        });
        if (2 * static_cast<std::size_t>(agreeing) <= members.size()) {
            result.dropped.push_back(group);
            continue;
        }

        std::vector<std::string> labels;
        for (const LabeledGlyph* g : members) labels.push_back(g->label);
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        if (labels.size() < 2)
            throw Error(Errc::InsufficientData,
                        "group " + slug + " has a single class (" + labels.front() + "); need at least 2");

        Dataset<double> data;
        data.inputs.resize(static_cast<Eigen::Index>(members.size()), kFeatureCount);
        for (std::size_t i = 0; i < members.size(); ++i) {
            data.inputs.row(static_cast<Eigen::Index>(i)) = scale_features<double>(members[i]->analysis.features).transpose();
            const auto it = std::lower_bound(labels.begin(), labels.end(), members[i]->label);
            data.labels.push_back(static_cast<int>(it - labels.begin()));
        }

        const auto start = init_mlp<double>(cfg.n_hidden, static_cast<int>(labels.size()), mix_seed(cfg.seed, hash_name(slug)));
        auto trained = train(start, data, cfg);
        result.models.insert(group, GroupModel{trained.net, labels});
        result.groups.push_back({group, members.size(), labels, std::move(trained.report)});
    }
    return result;
}

std::string features_csv(const std::vector<LabeledGlyph>& corpus) {
    std::string out = "label,group";
    for (int i = 0; i < kFeatureCount; ++i) out += ",f" + std::to_string(i);
    out += '\n';
    for (const LabeledGlyph& g : corpus) {
        out += g.label + "," + group_slug(g.analysis.group);
        for (int v : g.analysis.features) out += "," + std::to_string(v);
        out += '\n';
    }
    return out;
}

// ---- evaluation ---------------------------------------------------------------------

std::optional<double> EvalRow::test_accuracy() const {
    if (n_test == 0) return std::nullopt;
    return 100.0 * correct_test / n_test;
}

std::optional<double> EvalRow::train_accuracy() const {
    if (n_train == 0) return std::nullopt;
    return 100.0 * correct_train / n_train;
}

EvalReport evaluate(const std::vector<LabeledGlyph>& corpus, const Predictor& predict) {
    EvalReport report;
    report.overall.group = "overall";
    std::map<std::string, EvalRow> rows;
    for (const LabeledGlyph& g : corpus) {
        PredictionRecord rec{g.path, g.label, g.group, g.split, predict(g.analysis), false};
        rec.correct = rec.prediction.label && *rec.prediction.label == g.label;
        EvalRow& row = rows[g.group];
        row.group = g.group;
        for (EvalRow* r : {&row, &report.overall}) {
            if (g.split == Split::Test) {
                ++r->n_test;
                r->correct_test += rec.correct;
            } else {
                ++r->n_train;
                r->correct_train += rec.correct;
            }
        }
        report.log.push_back(std::move(rec));
    }
    for (auto& [name, row] : rows) report.rows.push_back(row);
    std::stable_sort(report.rows.begin(), report.rows.end(), [](const EvalRow& a, const EvalRow& b) {
        return group_rank(a.group) < group_rank(b.group);
    });
    return report;
}

EvalReport evaluate(const std::vector<LabeledGlyph>& corpus, const GroupModelSet& models) {
    return evaluate(corpus, [&models](const GlyphAnalysis& a) { return predict_analysis(a, models); });
}

std::string render_report_text(const EvalReport& report) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-36s %10s %10s %8s %8s\n", "Group", "Test acc", "Train acc", "n_test", "n_train");
    out += buf;
    auto line = [&](const std::string& name, const EvalRow& r) {
        std::string test = percent(r.test_accuracy());
        std::string train = percent(r.train_accuracy());
        if (r.n_test) test += "%";
        if (r.n_train) train += "%";
        std::snprintf(buf, sizeof buf, "%-36s %10s %10s %8d %8d\n", name.c_str(), test.c_str(), train.c_str(), r.n_test,
                      r.n_train);
        out += buf;
    };
    for (const EvalRow& r : report.rows) line(display_group(r.group), r);
    line("Overall", report.overall);
    return out;
}

std::string render_report_csv(const EvalReport& report) {
    std::string out = "group,test_acc,train_acc,n_test,n_train\n";
    auto line = [&](const EvalRow& r) {
        out += r.group + "," + percent(r.test_accuracy()) + "," + percent(r.train_accuracy()) + "," +
               std::to_string(r.n_test) + "," + std::to_string(r.n_train) + "\n";
    };
    for (const EvalRow& r : report.rows) line(r);
    line(report.overall);
    return out;
}

std::string render_prediction_log(const EvalReport& report) {
    std::string out = "path,true_label,true_group,split,detected_group,predicted_label,confidence,correct\n";
    char conf[32];
    for (const PredictionRecord& r : report.log) {
        std::snprintf(conf, sizeof conf, "%.6f", r.prediction.confidence);
        out += r.path + "," + r.true_label + "," + r.true_group + "," + to_string(r.split) + "," +
               group_slug(r.prediction.group) + "," + r.prediction.label_or_rejected() + "," + conf + "," +
               (r.correct ? "1" : "0") + "\n";
    }
    return out;
}

} // namespace devoc
