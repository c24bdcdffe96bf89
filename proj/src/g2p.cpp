#include "alignval/g2p.hpp"

#include "alignval/text.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <set>

namespace alignval {

using nlohmann::json;

G2PRuleSet::G2PRuleSet(std::string language, std::vector<G2PRule> rules)
    : language_(std::move(language)), rules_(std::move(rules)) {
    std::set<std::string> seen;
    for (const auto& r : rules_) {
        if (r.grapheme.empty()) throw ConfigError("g2p rule with empty grapheme");
        if (!seen.insert(r.grapheme).second)
            throw ConfigError(fmt::format("duplicate g2p grapheme '{}' for language '{}'", r.grapheme, language_));
    }
    order_.resize(rules_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return text::utf8_length(rules_[a].grapheme) > text::utf8_length(rules_[b].grapheme);
    });
}

G2PRuleSet G2PRuleSet::from_json(std::string language, std::string_view doc) {
    std::vector<G2PRule> rules;
    try {
        const json j = json::parse(doc);
        if (!j.is_array()) throw ConfigError("g2p rules must be a JSON array of {grapheme, phones}");
        for (const auto& item : j) {
            G2PRule r;
            r.grapheme = item.at("grapheme").get<std::string>();
            const auto& phones = item.at("phones");
            if (phones.is_string()) r.phones = text::split_whitespace(phones.get<std::string>());
            else r.phones = phones.get<std::vector<std::string>>();
            rules.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("g2p rules: ") + e.what());
    }
    return G2PRuleSet(std::move(language), std::move(rules));
}

std::string G2PRuleSet::to_json() const {
    json j = json::array();
    for (const auto& r : rules_) j.push_back({{"grapheme", r.grapheme}, {"phones", r.phones}});
    return j.dump(2) + "\n";
}

G2PResult apply_g2p(std::string_view word, const G2PRuleSet& rules) {
    G2PResult result;
    std::size_t pos = 0;
    while (pos < word.size()) {
        const G2PRule* hit = nullptr;
        for (const std::size_t idx : rules.match_order()) {
            const auto& r = rules.rules()[idx];
            if (word.substr(pos).starts_with(r.grapheme)) {
                hit = &r;
                break;
            }
        }
        if (hit) {
            result.phones.insert(result.phones.end(), hit->phones.begin(), hit->phones.end());
            pos += hit->grapheme.size();
            continue;
        }
        const auto [cp, len] = text::decode_utf8(word, pos);
        const std::size_t step = len == 0 ? 1 : len;
        result.unmapped.emplace_back(word.substr(pos, step));
        pos += step;
    }
    return result;
}

std::vector<std::string> build_wordlist(std::span<const IntervalTier> tiers, const WordlistOptions& options) {
    std::set<std::string> words;
    for (const auto& tier : tiers)
        for (const auto& iv : tier.intervals)
            for (auto& token : text::split_whitespace(iv.text))
                words.insert(options.case_fold ? text::fold_case(token) : token);
    return {words.begin(), words.end()};
}

std::string serialize_dictionary(const PronunciationDictionary& dict) {
    std::string out;
    for (const auto& [word, phones] : dict) out += fmt::format("{}\t{}\n", word, fmt::join(phones, " "));
    return out;
}

PronunciationDictionary parse_dictionary(std::string_view doc) {
    PronunciationDictionary dict;
    std::size_t start = 0;
    while (start < doc.size()) {
        auto end = doc.find('\n', start);
        if (end == std::string_view::npos) end = doc.size();
        std::string_view line = doc.substr(start, end - start);
        start = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw ParseError(fmt::format("dictionary line without TAB: '{}'", line));
        dict[std::string(line.substr(0, tab))] = text::split_whitespace(line.substr(tab + 1));
    }
    return dict;
}

void validate_dictionary(const PronunciationDictionary& dict, const PhoneInventory& inventory, Diagnostics& diag) {
    for (const auto& [word, phones] : dict)
        for (const auto& p : phones)
            if (!inventory.contains(p))
                diag.error("PhoneNotInInventory",
                           fmt::format("word '{}': phone '{}' is not in the {} inventory", word, p, inventory.language));
}

}  // namespace alignval

namespace alignval {

namespace {

using Table = std::vector<std::pair<const char*, const char*>>;

G2PRuleSet make_set(const char* language, const Table& table) {
    std::vector<G2PRule> rules;
    rules.reserve(table.size());
    for (const auto& [g, p] : table) rules.push_back({g, text::split_whitespace(p)});
    return G2PRuleSet(language, std::move(rules));
}

const Table kLongVowels{{"aa", "aː"}, {"ii", "iː"}, {"uu", "uː"}};

Table join(std::initializer_list<const Table*> parts) {
    Table out;
    for (const auto* t : parts) out.insert(out.end(), t->begin(), t->end());
    return out;
}

}  // namespace

std::vector<G2PRuleSet> default_g2p_rulesets() {
    const Table sonorants{{"m", "m"},   {"n", "n"},   {"rn", "ɳ"}, {"ny", "ɲ"}, {"ng", "ŋ"}, {"l", "l"},
                          {"rl", "ɭ"},  {"rr", "r"},  {"r", "ɻ"},  {"w", "w"},  {"y", "j"}};
    const Table voiced{{"b", "b"}, {"d", "d"}, {"rd", "ɖ"}, {"j", "ɟ"}, {"g", "ɡ"}};
    const Table voiceless{{"p", "p"}, {"t", "t"}, {"rt", "ʈ"}, {"tj", "c"}, {"k", "k"}};
    const Table ly{{"ly", "ʎ"}};
    const Table aiu{{"a", "a"}, {"i", "i"}, {"u", "u"}};
    const Table o{{"o", "o"}};
    const Table e{{"e", "e"}};
    const Table dj{{"dj", "ɟ"}};
    const Table laminal{{"th", "t̪"}, {"dh", "d̪"}, {"nh", "n̪"}, {"'", "ʔ"}, {"ŋ", "ŋ"}};
    const Table yidiny_sonorants{{"m", "m"}, {"n", "n"}, {"ny", "ɲ"}, {"ng", "ŋ"}, {"l", "l"},
                                 {"rr", "r"}, {"r", "ɻ"}, {"w", "w"}, {"y", "j"}};
    const Table yidiny_stops{{"b", "b"}, {"d", "d"}, {"j", "ɟ"}, {"g", "ɡ"}};

    std::vector<G2PRuleSet> out;
    out.push_back(make_set("Bardi", join({&voiced, &sonorants, &ly, &aiu, &o, &kLongVowels})));
    out.push_back(make_set("Gija", join({&voiced, &sonorants, &ly, &aiu})));
    out.push_back(make_set("Kunbarlang", join({&voiceless, &voiced, &dj, &sonorants, &aiu, &e, &o})));
    out.push_back(make_set("Ngaanyatjarra", join({&voiceless, &sonorants, &ly, &aiu, &kLongVowels})));
    out.push_back(make_set("Yan-nhangu", join({&voiceless, &voiced, &dj, &laminal, &sonorants, &aiu, &kLongVowels})));
    out.push_back(make_set("Yidiny", join({&yidiny_stops, &yidiny_sonorants, &aiu, &kLongVowels})));
    return out;
}

const G2PRuleSet* find_ruleset(const std::vector<G2PRuleSet>& all, std::string_view language) {
    for (const auto& s : all)
        if (s.language() == language) return &s;
    return nullptr;
}

std::vector<G2PRuleSet> g2p_rulesets_from_json(std::string_view doc) {
    std::vector<G2PRuleSet> out;
    try {
        const json j = json::parse(doc);
        if (!j.is_object()) throw ConfigError("g2p tables must be a JSON object keyed by language");
        for (const auto& [language, rules] : j.items()) out.push_back(G2PRuleSet::from_json(language, rules.dump()));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("g2p tables: ") + e.what());
    }
    return out;
}

std::string g2p_rulesets_to_json(const std::vector<G2PRuleSet>& sets) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& s : sets) {
        auto& arr = j[s.language()] = nlohmann::ordered_json::array();
        for (const auto& r : s.rules()) arr.push_back({{"grapheme", r.grapheme}, {"phones", r.phones}});
    }
    return j.dump(2) + "\n";
}

}  // namespace alignval
