#include "alignval/corpus_prep.hpp"

#include "alignval/audio.hpp"
#include "alignval/text.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace alignval {

using nlohmann::json;

void CleaningRules::add_strip_pattern(std::string pattern, std::string replacement) {
    StripRule rule;
    try {
        rule.compiled = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw InvalidPattern(fmt::format("invalid strip pattern '{}': {}", pattern, e.what()));
    }
    rule.pattern = std::move(pattern);
    rule.replacement = std::move(replacement);
    strip_.push_back(std::move(rule));
}

void CleaningRules::add_marker(PartialWordMarker marker) {
    if (marker.text.empty()) throw ConfigError("partial-word marker must not be empty");
    markers_.push_back(std::move(marker));
}

void CleaningRules::set_min_word_duration(double seconds) {
    if (!(seconds >= 0.0)) throw ConfigError("min_word_duration must be >= 0");
    min_word_duration_ = seconds;
}

CleaningRules CleaningRules::defaults() {
    CleaningRules r;
    r.add_strip_pattern(R"(\([^)]*\))", " ");
    r.add_strip_pattern(R"(\[[^\]]*\])", " ");
    r.add_marker({"-", MarkerPosition::final});
    r.set_min_word_duration(0.1);
    return r;
}

namespace {

MarkerPosition parse_position(const std::string& s) {
    if (s == "any") return MarkerPosition::any;
    if (s == "initial") return MarkerPosition::initial;
    if (s == "final") return MarkerPosition::final;
    throw ConfigError("unknown marker position '" + s + "' (expected any, initial or final)");
}

std::string_view position_name(MarkerPosition p) {
    switch (p) {
    case MarkerPosition::any: return "any";
    case MarkerPosition::initial: return "initial";
    case MarkerPosition::final: return "final";
    }
    return "any";
}

bool token_has_marker(std::string_view token, const PartialWordMarker& m) {
    switch (m.position) {
    case MarkerPosition::any: return token.find(m.text) != std::string_view::npos;
    case MarkerPosition::initial: return token.starts_with(m.text);
    case MarkerPosition::final: return token.ends_with(m.text);
    }
    return false;
}

}  // namespace

CleaningRules CleaningRules::from_json(std::string_view doc) {
    CleaningRules r;
    json j;
    try {
        j = json::parse(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cleaning rules: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("cleaning rules must be a JSON object");
    try {
        for (const auto& p : j.value("strip_patterns", json::array()))
            r.add_strip_pattern(p.at("pattern").get<std::string>(), p.value("replacement", std::string(" ")));
        for (const auto& m : j.value("partial_word_markers", json::array())) {
            if (m.is_string()) r.add_marker({m.get<std::string>(), MarkerPosition::any});
            else r.add_marker({m.at("text").get<std::string>(), parse_position(m.value("position", std::string("final")))});
        }
        r.set_min_word_duration(j.value("min_word_duration", 0.1));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cleaning rules: ") + e.what());
    }
    return r;
}

std::string CleaningRules::to_json() const {
    json j;
    j["strip_patterns"] = json::array();
    for (const auto& s : strip_) j["strip_patterns"].push_back({{"pattern", s.pattern}, {"replacement", s.replacement}});
    j["partial_word_markers"] = json::array();
    for (const auto& m : markers_) j["partial_word_markers"].push_back({{"text", m.text}, {"position", position_name(m.position)}});
    j["min_word_duration"] = min_word_duration_;
    return j.dump(2) + "\n";
}

std::string clean_transcript(std::string_view input, const CleaningRules& rules) {
    std::string s(input);
    for (const auto& rule : rules.strip_patterns()) s = std::regex_replace(s, rule.compiled, rule.replacement);
    std::string out;
    for (const auto& token : text::split_whitespace(s)) {
        const bool partial = std::any_of(rules.markers().begin(), rules.markers().end(),
                                         [&](const PartialWordMarker& m) { return token_has_marker(token, m); });
        if (partial) continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

IntervalTier clean_tier(const IntervalTier& tier, const CleaningRules& rules) {
    IntervalTier out = tier;
    for (auto& iv : out.intervals) iv.text = clean_transcript(iv.text, rules);
    return out;
}

IntervalTier filter_short_words(const IntervalTier& tier, double min_duration) {
    constexpr double tol = 1e-9;
    IntervalTier out = tier;
    for (auto& iv : out.intervals) {
        if (text::trim(iv.text).empty()) continue;
        if (iv.duration() < min_duration - tol) iv.text.clear();
    }
    return out;
}

// ---------------------------------------------------------------- manifest

std::vector<ManifestEntry> parse_manifest(std::string_view csv, const std::string& base_dir) {
    namespace fs = std::filesystem;
    if (csv.starts_with("\xEF\xBB\xBF")) csv.remove_prefix(3);
    const auto rows = text::parse_csv(csv);
    if (rows.empty()) throw ConfigError("manifest is empty (a header row is required)");
    const auto& header = rows.front();
    auto column = [&](std::string_view name) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (text::trim(header[i]) == name) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    const auto c_audio = column("path_audio");
    const auto c_grid = column("path_textgrid");
    const auto c_lang = column("language");
    const auto c_split = column("split");
    if (c_audio < 0 || c_grid < 0 || c_lang < 0)
        throw ConfigError("manifest header must contain path_audio, path_textgrid and language");

    auto resolve = [&](const std::string& p) {
        if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
        return (fs::path(base_dir) / p).lexically_normal().string();
    };
    std::vector<ManifestEntry> entries;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto field = [&](std::ptrdiff_t c) {
            return c >= 0 && static_cast<std::size_t>(c) < row.size() ? std::string(text::trim(row[static_cast<std::size_t>(c)])) : std::string();
        };
        ManifestEntry e{resolve(field(c_audio)), resolve(field(c_grid)), field(c_lang), field(c_split)};
        if (e.audio_path.empty() && e.textgrid_path.empty()) continue;
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::string content;
    try {
        content = text::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_manifest(content, std::filesystem::path(path).parent_path().string());
}

std::string serialize_manifest(const std::vector<ManifestEntry>& entries) {
    std::string out = "path_audio,path_textgrid,language,split\n";
    for (const auto& e : entries)
        out += fmt::format("{},{},{},{}\n", text::csv_field(e.audio_path), text::csv_field(e.textgrid_path),
                           text::csv_field(e.language), text::csv_field(e.split));
    return out;
}

// ------------------------------------------------------------------ summary

double DatasetSummary::minutes_for(const std::vector<std::string>& languages,
                                   const std::vector<std::string>& splits) const {
    double total = 0.0;
    for (const auto& [key, minutes] : language_split_minutes) {
        if (std::find(languages.begin(), languages.end(), key.first) == languages.end()) continue;
        if (!splits.empty() && std::find(splits.begin(), splits.end(), key.second) == splits.end()) continue;
        total += minutes;
    }
    return total;
}

std::string DatasetSummary::to_json() const {
    json j;
    j["files"] = files;
    j["total_minutes"] = total_minutes;
    j["language_minutes"] = json::object();
    for (const auto& [lang, m] : language_minutes) j["language_minutes"][lang] = m;
    j["language_split_minutes"] = json::array();
    for (const auto& [key, m] : language_split_minutes)
        j["language_split_minutes"].push_back({{"language", key.first}, {"split", key.second}, {"minutes", m}});
    j["errors"] = json::array();
    for (const auto& e : errors) j["errors"].push_back({{"path", e.path}, {"kind", e.kind}, {"message", e.message}});
    return j.dump(2) + "\n";
}

DatasetSummary assemble_dataset(const std::vector<ManifestEntry>& manifest) {
    DatasetSummary summary;
    std::map<std::pair<std::string, std::string>, double> seconds;
    for (const auto& entry : manifest) {
        double duration = 0.0;
        try {
            duration = probe_wav_file(entry.audio_path).duration();
        } catch (const Error& e) {
            summary.errors.push_back({entry.audio_path, std::string(e.kind()), e.what()});
            continue;
        } catch (const std::exception& e) {
            summary.errors.push_back({entry.audio_path, "IoError", e.what()});
            continue;
        }
        try {
            (void)read_textgrid(entry.textgrid_path);
        } catch (const Error& e) {
            summary.errors.push_back({entry.textgrid_path, std::string(e.kind()), e.what()});
            continue;
        }
        seconds[{entry.language, entry.split}] += duration;
        ++summary.files;
    }
    std::map<std::string, double> language_seconds;
    for (const auto& [key, s] : seconds) {
        summary.language_split_minutes[key] = s / 60.0;
        language_seconds[key.first] += s;
    }
    for (const auto& [lang, s] : language_seconds) summary.language_minutes[lang] = s / 60.0;
    for (const auto& [lang, m] : summary.language_minutes) summary.total_minutes += m;
    return summary;
}

}  // namespace alignval
