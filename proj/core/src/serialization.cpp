#include "uitf/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace uitf::ser {

namespace {

using nlohmann::json;

json parse(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw FormatError("malformed JSON document");
    }
    return doc;
}

/// Strict typed field access; nlohmann's own exceptions would leak
/// library-specific types through the module boundary.
template <typename T>
T field(const json& doc, const char* name) {
    if (!doc.contains(name)) {
        throw FormatError(std::string("missing field \"") + name + "\"");
    }
    try {
        return doc.at(name).get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("field \"") + name + "\" has the wrong type");
    }
}

template <typename T>
T field_or(const json& doc, const char* name, T fallback) {
    if (!doc.contains(name)) {
        return fallback;
    }
    return field<T>(doc, name);
}

json entropy_doc(const attn::EntropyReport& report) {
    return {{"per_head", report.per_head}, {"h_min", report.h_min}, {"h_max", report.h_max}};
}

} // namespace

std::string schedule_to_json(const rope::FrequencySchedule& schedule) {
    json corrections = json::array();
    for (const auto& c : schedule.corrections()) {
        corrections.push_back({{"index", c.index}, {"old", c.old_theta}, {"new", c.new_theta}});
    }
    const json doc = {{"base", schedule.config().base},
                      {"axis_dim", schedule.config().axis_dim},
                      {"index_origin", schedule.config().index_origin},
                      {"freqs", schedule.freqs()},
                      {"corrections", corrections}};
    return doc.dump(2) + "\n";
}

rope::FrequencySchedule schedule_from_json(const std::string& text) {
    const json doc = parse(text);
    if (!doc.is_object()) {
        throw FormatError("schedule document must be a JSON object");
    }
    rope::RopeConfig config;
    config.base = field<double>(doc, "base");
    config.axis_dim = field<std::size_t>(doc, "axis_dim");
    config.index_origin = field_or<int>(doc, "index_origin", 1);
    if (!doc.contains("freqs")) {
        return rope::build_schedule(config);
    }
    auto freqs = field<std::vector<double>>(doc, "freqs");
    std::vector<rope::Correction> corrections;
    if (doc.contains("corrections")) {
        if (!doc.at("corrections").is_array()) {
            throw FormatError("field \"corrections\" has the wrong type");
        }
        for (const json& entry : doc.at("corrections")) {
            corrections.push_back({field<std::size_t>(entry, "index"),
                                   field<double>(entry, "old"), field<double>(entry, "new")});
        }
    }
    return {config, std::move(freqs), std::move(corrections)};
}

void save_schedule(const std::filesystem::path& path, const rope::FrequencySchedule& schedule) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << schedule_to_json(schedule);
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

rope::FrequencySchedule load_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return schedule_from_json(text.str());
}

std::string entropy_to_json(const attn::EntropyReport& report) {
    return entropy_doc(report).dump(2) + "\n";
}

std::string focus_to_json(const attn::FocusMap& map) {
    const json doc = {{"per_head", map.per_head}};
    return doc.dump(2) + "\n";
}

std::string grid_stats_to_json(const harness::GridStats& stats) {
    json repetition = json::array();
    for (const auto& entry : stats.repetition) {
        repetition.push_back({{"axis", std::string(1, entry.axis)},
                              {"period", entry.period},
                              {"score", entry.score}});
    }
    const json doc = {{"train_entropy", entropy_doc(stats.train_entropy)},
                      {"target_entropy", entropy_doc(stats.target_entropy)},
                      {"repetition", repetition}};
    return doc.dump(2) + "\n";
}

std::string rdfc_log_to_json_lines(const extrap::RdfcLog& log) {
    std::string out;
    for (const auto& it : log.iterations) {
        const json line = {{"axis", it.axis == extrap::Axis::Height ? "h" : "w"},
                           {"observed_period", it.observed_period},
                           {"index", it.chosen_index},
                           {"old", it.old_theta},
                           {"new", it.new_theta}};
        out += line.dump() + "\n";
    }
    const json status = {{"converged", log.converged},
                         {"iterations", log.iterations.size()}};
    out += status.dump() + "\n";
    return out;
}

harness::ToyLayer layer_from_json(const std::string& text) {
    const json doc = parse(text);
    if (!doc.is_object()) {
        throw FormatError("layer document must be a JSON object");
    }
    return harness::make_layer(field<std::uint64_t>(doc, "seed"), field<std::size_t>(doc, "heads"),
                               field<std::size_t>(doc, "feature_dim"),
                               field<std::size_t>(doc, "head_dim"),
                               field<std::size_t>(doc, "value_dim"));
}

} // namespace uitf::ser
