#include "devoc/config.hpp"

#include "devoc/error.hpp"
#include "devoc/io.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace devoc {
namespace {

std::string strip(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw Error(Errc::BadConfig, "config: bad value for " + key + ": '" + value + "'");
    return out;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"step_tol", [](Config& c, auto& k, auto& v) { c.pipeline.structural.step_tol = parse_number<int>(k, v); }},
        {"drift_tol_frac",
         [](Config& c, auto& k, auto& v) { c.pipeline.structural.drift_tol_frac = parse_number<double>(k, v); }},
        {"full_span", [](Config& c, auto& k, auto& v) { c.pipeline.structural.full_span = parse_number<double>(k, v); }},
        {"partial_span",
         [](Config& c, auto& k, auto& v) { c.pipeline.structural.partial_span = parse_number<double>(k, v); }},
        {"spine_height_frac",
         [](Config& c, auto& k, auto& v) { c.pipeline.structural.spine_height_frac = parse_number<double>(k, v); }},
        {"mid_mass_tol",
         [](Config& c, auto& k, auto& v) { c.pipeline.structural.mid_mass_tol = parse_number<int>(k, v); }},
        {"max_consecutive_up",
         [](Config& c, auto& k, auto& v) { c.pipeline.structural.max_consecutive_up = parse_number<int>(k, v); }},
        {"max_spur", [](Config& c, auto& k, auto& v) { c.pipeline.max_spur = parse_number<int>(k, v); }},
        {"n_hidden", [](Config& c, auto& k, auto& v) { c.train.n_hidden = parse_number<int>(k, v); }},
        {"learning_rate", [](Config& c, auto& k, auto& v) { c.train.learning_rate = parse_number<double>(k, v); }},
        {"momentum", [](Config& c, auto& k, auto& v) { c.train.momentum = parse_number<double>(k, v); }},
        {"min_gradient", [](Config& c, auto& k, auto& v) { c.train.min_gradient = parse_number<double>(k, v); }},
        {"max_epochs", [](Config& c, auto& k, auto& v) { c.train.max_epochs = parse_number<int>(k, v); }},
        {"seed", [](Config& c, auto& k, auto& v) { c.train.seed = parse_number<std::uint64_t>(k, v); }},
        {"trainer",
         [](Config& c, auto&, auto& v) {
             if (v == "scg") c.train.trainer = Trainer::Scg;
             else if (v == "momentum") c.train.trainer = Trainer::MomentumGd;
             else throw Error(Errc::BadConfig, "config: trainer must be scg or momentum");
         }},
    };
    return table;
}

} // namespace

Config parse_config(std::string_view text) {
    Config cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = strip(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::BadConfig, "config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = strip(std::string_view(body).substr(0, eq));
        const std::string value = strip(std::string_view(body).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw Error(Errc::BadConfig, "config: unknown key '" + key + "'");
        it->second(cfg, key, value);
    }
    cfg.train.validate();
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return Config{};
    return parse_config(read_text(path));
}

std::string render_config(const Config& cfg) {
    std::ostringstream out;
    out.precision(17);
    const auto& s = cfg.pipeline.structural;
    out << "step_tol = " << s.step_tol << "\n"
        << "drift_tol_frac = " << s.drift_tol_frac << "\n"
        << "full_span = " << s.full_span << "\n"
        << "partial_span = " << s.partial_span << "\n"
        << "spine_height_frac = " << s.spine_height_frac << "\n"
        << "mid_mass_tol = " << s.mid_mass_tol << "\n"
        << "max_consecutive_up = " << s.max_consecutive_up << "\n"
        << "max_spur = " << cfg.pipeline.max_spur << "\n"
        << "n_hidden = " << cfg.train.n_hidden << "\n"
        << "learning_rate = " << cfg.train.learning_rate << "\n"
        << "momentum = " << cfg.train.momentum << "\n"
        << "min_gradient = " << cfg.train.min_gradient << "\n"
        << "max_epochs = " << cfg.train.max_epochs << "\n"
        << "trainer = " << to_string(cfg.train.trainer) << "\n"
        << "seed = " << cfg.train.seed << "\n";
    return out.str();
}

} // namespace devoc
