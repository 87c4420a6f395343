#include "devoc/io.hpp"
#include "devoc/nn.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace devoc {
namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return lines;
}

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::MalformedModelFile, "model file: " + why); }

int parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) malformed("bad integer '" + std::string(s) + "'");
    return v;
}

double parse_double(std::string_view s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) malformed("bad parameter '" + std::string(s) + "'");
    return v;
}

} // namespace

const char* to_string(Trainer t) { return t == Trainer::Scg ? "scg" : "momentum"; }

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::MinGradient: return "MinGradient";
        case StopReason::MaxEpochs: return "MaxEpochs";
        case StopReason::Converged: return "Converged";
    }
    return "?";
}

std::string serialize_model(const Mlp<double>& net, const std::vector<std::string>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != net.n_out())
        throw Error(Errc::BadDimensions, "label count does not match n_out");
    std::string out;
    out += std::string(kModelMagic) + " v" + std::to_string(kModelVersion) + "\n";
    out += "dims " + std::to_string(net.n_in()) + " " + std::to_string(net.n_hidden()) + " " +
           std::to_string(net.n_out()) + "\n";
    out += "layout row-major W1 b1 W2 b2\n";
    out += "labels ";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].empty() || labels[i].find_first_of(",\n\r") != std::string::npos)
            throw Error(Errc::BadDimensions, "label '" + labels[i] + "' cannot be stored");
        if (i) out += ',';
        out += labels[i];
    }
    out += '\n';
    const auto theta = flatten(net);
    std::array<char, 64> buf{};
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), theta(i), std::chars_format::general, 17);
        out.append(buf.data(), ptr);
        out += '\n';
    }
    return out;
}

LabeledModel parse_model(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) malformed("empty");

    const std::string magic = std::string(kModelMagic) + " v";
    if (lines[0].substr(0, magic.size()) != magic) malformed("missing header");
    const int version = parse_int(lines[0].substr(magic.size()));
    if (version != kModelVersion)
        throw Error(Errc::VersionMismatch, "model file version " + std::to_string(version) + ", reader supports " +
                                               std::to_string(kModelVersion));
    if (lines.size() < 4) malformed("truncated header");

    std::istringstream dims{std::string(lines[1])};
    std::string tag;
    int n_in = 0, n_hidden = 0, n_out = 0;
    if (!(dims >> tag >> n_in >> n_hidden >> n_out) || tag != "dims") malformed("bad dims line");
    if (lines[2] != "layout row-major W1 b1 W2 b2") malformed("unsupported layout");
    if (lines[3].substr(0, 7) != "labels ") malformed("missing labels line");

    LabeledModel model;
    std::string_view rest = lines[3].substr(7);
    while (true) {
        const auto comma = rest.find(',');
        model.labels.emplace_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    try {
        model.net = make_mlp<double>(n_in, n_hidden, n_out);
    } catch (const Error&) {
        malformed("bad dimensions");
    }
    if (static_cast<int>(model.labels.size()) != n_out) malformed("label count does not match dims");

    Mlp<double>::Vector theta(model.net.parameter_count());
    std::size_t line = 4;
    for (Eigen::Index i = 0; i < theta.size(); ++i, ++line) {
        if (line >= lines.size() || lines[line].empty()) malformed("truncated parameter block");
        theta(i) = parse_double(lines[line]);
    }
    for (; line < lines.size(); ++line)
        if (!lines[line].empty()) malformed("trailing data");
    unflatten(model.net, theta);
    return model;
}

void save_model(const std::filesystem::path& path, const Mlp<double>& net, const std::vector<std::string>& labels) {
    write_text_atomic(path, serialize_model(net, labels));
}

LabeledModel load_model(const std::filesystem::path& path) { return parse_model(read_text(path)); }

} // namespace devoc
