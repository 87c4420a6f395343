#include "cli.hpp"

#include "devoc/config.hpp"
#include "devoc/error.hpp"
#include "devoc/io.hpp"
#include "devoc/pipeline.hpp"
#include "devoc/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace devoc::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

Config resolve_config(const Globals& g) {
    Config cfg = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (g.seed) cfg.train.seed = *g.seed;
    return cfg;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(Errc::IoFailure, "cannot create directory " + dir.string());
}

BinaryImage overlay(const BinaryImage& base, const std::vector<Point>& marks) {
    BinaryImage out = base;
    for (Point p : marks)
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc)
                if (out.in_bounds(p.row + dr, p.col + dc)) out.set(p.row + dr, p.col + dc);
    return out;
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : "-"; }

int cmd_inspect(const Globals& g, const std::string& input, const std::string& out_dir, std::ostream& out) {
    const Config cfg = resolve_config(g);
    const BinaryImage img = load_image(input);
    if (img.blank()) throw Error(Errc::EmptyImage, "empty glyph");
    const GlyphAnalysis a = analyze_glyph(img, cfg.pipeline);

    ensure_dir(out_dir);
    const std::string stem = fs::path(input).stem().string();
    const fs::path dir(out_dir);
    write_text_atomic(dir / (stem + ".skel.pbm"), to_pbm(a.skeleton.image));
    write_text_atomic(dir / (stem + ".shiro.pbm"),
                      to_pbm(overlay(a.skeleton.image, a.shirorekha.trace ? a.shirorekha.trace->points
                                                                          : std::vector<Point>{})));
    std::vector<Point> bars = a.spine.spine_run;
    bars.insert(bars.end(), a.spine.matra_run.begin(), a.spine.matra_run.end());
    write_text_atomic(dir / (stem + ".spine.pbm"), to_pbm(overlay(a.skeleton.image, bars)));

    std::ostringstream s;
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%.3f", a.shirorekha.span_ratio);
    s << "input: " << input << "\n"
      << "group: " << group_name(a.group) << " (" << group_slug(a.group) << ")\n"
      << "shirorekha: " << to_string(a.shirorekha.kind) << " span_ratio=" << ratio << "\n"
      << "spine: " << to_string(a.spine.kind) << " spine_col=" << opt_int(a.spine.spine_col)
      << " matra_col=" << opt_int(a.spine.matra_col) << (a.spine.too_many_spines ? " warning=TooManySpines" : "")
      << "\n"
      << "features:";
    for (int v : a.features) s << ' ' << v;
    s << "\n";
    write_text_atomic(dir / "summary.txt", s.str());
    if (!g.quiet) out << s.str();
    return kOk;
}

int cmd_synth(const Globals& g, const std::string& out_dir, int per_class, int amplitude, std::ostream& out) {
    const Config cfg = resolve_config(g);
    if (per_class < 1) throw Error(Errc::BadConfig, "--per-class must be >= 1");
    if (amplitude < 0 || amplitude > 3) throw Error(Errc::BadConfig, "--amplitude must be in 0..3");
    ensure_dir(out_dir);
    const auto samples = generate_corpus(default_templates(), per_class, amplitude, cfg.train.seed);
    write_corpus(out_dir, samples);
    if (!g.quiet) out << "wrote " << samples.size() << " glyphs to " << out_dir << "\n";
    return kOk;
}

int cmd_train(const Globals& g, const std::string& corpus_dir, const std::string& model_dir, std::ostream& out,
              std::ostream& err) {
    const Config cfg = resolve_config(g);
    const auto corpus = load_corpus(corpus_dir, cfg.pipeline);
    const TrainAllResult result = train_all(corpus, cfg.train);

    ensure_dir(model_dir);
    result.models.save(model_dir);
    write_text_atomic(fs::path(model_dir) / "features.csv", features_csv(corpus));

    for (const RoutingError& r : result.routing_errors)
        if (!g.quiet) err << "routing: " << r.path << " labeled " << r.manifest_group << ", detected "
                          << group_slug(r.detected) << "\n";
    for (StructuralClass d : result.dropped)
        err << "warning: no model for " << group_slug(d) << " (samples are routing errors)\n";
    if (!g.quiet) {
        for (const GroupTrainingSummary& s : result.groups) {
            char line[256];
            std::snprintf(line, sizeof line, "%-12s samples=%-5zu classes=%-3zu epochs=%-4d loss=%.3e grad=%.3e stop=%s\n",
                          group_slug(s.group).c_str(), s.samples, s.labels.size(), s.report.epochs_run,
                          s.report.final_loss, s.report.final_gradient_norm, to_string(s.report.stop_reason));
            out << line;
        }
    }
    return kOk;
}

int cmd_eval(const Globals& g, const std::string& corpus_dir, const std::string& model_dir,
             const std::string& report_dir, std::ostream& out) {
    const Config cfg = resolve_config(g);
    const GroupModelSet models = GroupModelSet::load(model_dir);
    const auto corpus = load_corpus(corpus_dir, cfg.pipeline);
    const EvalReport report = evaluate(corpus, models);

    const fs::path dir = report_dir.empty() ? fs::path(model_dir) : fs::path(report_dir);
    ensure_dir(dir);
    const std::string table = render_report_text(report);
    write_text_atomic(dir / "report.txt", table);
    write_text_atomic(dir / "report.csv", render_report_csv(report));
    write_text_atomic(dir / "predictions.csv", render_prediction_log(report));
    if (!g.quiet) out << table;
    return kOk;
}

int cmd_predict(const Globals& g, const std::string& image, const std::string& model_dir, std::ostream& out) {
    const Config cfg = resolve_config(g);
    const GroupModelSet models = GroupModelSet::load(model_dir);
    const BinaryImage img = load_image(image);
    const Prediction p = recognize(img, models, cfg.pipeline);
    char conf[32];
    std::snprintf(conf, sizeof conf, "%.6f", p.confidence);
    out << p.label_or_rejected() << '\t' << group_slug(p.group) << '\t' << conf << '\n';
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-stage handwritten Devanagari character recognizer", "devoc"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "key = value configuration file");
    auto* seed_opt = app.add_option("--seed", seed, "seed for corpus generation and weight init");
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    std::string input, out_dir, corpus_dir, model_dir, report_dir;
    int per_class = 100;
    int amplitude = 2;

    auto* inspect = app.add_subcommand("inspect", "write skeleton, overlays and a feature summary for one glyph");
    inspect->add_option("input", input, "PBM/PGM glyph image")->required();
    inspect->add_option("-o,--out", out_dir, "output directory")->required();

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    synth->add_option("-o,--out", out_dir, "corpus directory")->required();
    synth->add_option("--per-class", per_class, "renderings per template")->capture_default_str();
    synth->add_option("--amplitude", amplitude, "vertex jitter in pixels (0..3)")->capture_default_str();

    auto* train = app.add_subcommand("train", "train one network per structural group");
    train->add_option("--corpus", corpus_dir, "corpus directory with manifest.csv")->required();
    train->add_option("--models", model_dir, "output model directory")->required();

    auto* eval = app.add_subcommand("eval", "per-group accuracy report");
    eval->add_option("--corpus", corpus_dir, "corpus directory with manifest.csv")->required();
    eval->add_option("--models", model_dir, "trained model directory")->required();
    eval->add_option("--report-dir", report_dir, "where to write report files (default: model directory)");

    auto* predict = app.add_subcommand("predict", "classify one glyph image");
    predict->add_option("image", input, "PBM/PGM glyph image")->required();
    predict->add_option("--models", model_dir, "trained model directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "devoc: " << e.what() << "\n" << app.help();
        return kIoError;
    }
    if (*seed_opt) g.seed = seed;

    try {
        if (*inspect) return cmd_inspect(g, input, out_dir, out);
        if (*synth) return cmd_synth(g, out_dir, per_class, amplitude, out);
        if (*train) return cmd_train(g, corpus_dir, model_dir, out, err);
        if (*eval) return cmd_eval(g, corpus_dir, model_dir, report_dir, out);
        if (*predict) return cmd_predict(g, input, model_dir, out);
    } catch (const Error& e) {
        err << "devoc: " << e.what() << "\n";
        switch (e.code()) {
            case Errc::EmptyImage: return kEmptyInput;
            case Errc::InsufficientData: return kInsufficientData;
            default: return kIoError;
        }
    } catch (const std::exception& e) {
        err << "devoc: " << e.what() << "\n";
        return kIoError;
    }
    return kIoError;
}

} // namespace devoc::cli
