#include "alignval/inventory.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <algorithm>

namespace alignval {

using nlohmann::json;
using nlohmann::ordered_json;

void NaturalClassMap::add_class(const std::string& label, const std::vector<std::string>& phones) {
    if (label.empty()) throw ConfigError("natural class label must not be empty");
    if (classes_.find(label) == classes_.end()) labels_.push_back(label);
    auto& members = classes_[label];
    for (const auto& p : phones) {
        if (auto it = phone_to_class_.find(p); it != phone_to_class_.end() && it->second != label)
            throw ConfigError(fmt::format("phone '{}' is assigned to both '{}' and '{}'", p, it->second, label));
        phone_to_class_[p] = label;
        members.insert(p);
    }
}

const std::string* NaturalClassMap::find(std::string_view phone) const {
    const auto it = phone_to_class_.find(phone);
    return it == phone_to_class_.end() ? nullptr : &it->second;
}

const std::string& NaturalClassMap::classify(std::string_view phone) const {
    if (const auto* label = find(phone)) return *label;
    throw UnknownPhone(fmt::format("phone '{}' has no natural class", phone));
}

void NaturalClassMap::check_covers(const std::vector<PhoneInventory>& inventories) const {
    std::vector<std::string> unassigned;
    for (const auto& inv : inventories)
        for (const auto& p : inv.phones)
            if (!find(p)) unassigned.push_back(fmt::format("{} ({})", p, inv.language));
    if (!unassigned.empty())
        throw ConfigError(fmt::format("phones without a natural class: {}", fmt::join(unassigned, ", ")));
}

NaturalClassMap NaturalClassMap::defaults() {
    NaturalClassMap m;
    m.add_class("stop", {"p", "t", "t̪", "ʈ", "c", "k", "b", "d", "d̪", "ɖ", "ɟ", "ɡ", "ʔ"});
    m.add_class("nasal", {"m", "n", "n̪", "ɳ", "ɲ", "ŋ"});
    m.add_class("trill", {"r"});
    m.add_class("lateral", {"l", "l̪", "ɭ", "ʎ"});
    m.add_class("approximant", {"w", "j"});
    m.add_class("rhotic-approximant", {"ɻ"});
    m.add_class("short-vowel", {"a", "e", "i", "o", "u"});
    m.add_class("long-vowel", {"aː", "eː", "iː", "oː", "uː"});
    return m;
}

NaturalClassMap NaturalClassMap::from_json(std::string_view doc) {
    json j;
    try {
        j = json::parse(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("class map: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("class map must be a JSON object of label -> phone list");
    std::vector<std::string> order;
    for (const auto& label : default_class_labels())
        if (j.contains(label)) order.push_back(label);
    std::vector<std::string> extra;
    for (const auto& [label, _] : j.items())
        if (std::find(order.begin(), order.end(), label) == order.end()) extra.push_back(label);
    std::sort(extra.begin(), extra.end());
    order.insert(order.end(), extra.begin(), extra.end());

    NaturalClassMap m;
    try {
        for (const auto& label : order) m.add_class(label, j.at(label).get<std::vector<std::string>>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("class map: ") + e.what());
    }
    return m;
}

std::string NaturalClassMap::to_json() const {
    ordered_json j = ordered_json::object();
    for (const auto& label : labels_) {
        const auto& members = classes_.at(label);
        j[label] = std::vector<std::string>(members.begin(), members.end());
    }
    return j.dump(2) + "\n";
}

// -------------------------------------------------------------- inventories

namespace {

PhoneInventory make(std::string language, std::vector<std::string> phones) {
    PhoneInventory inv;
    inv.language = std::move(language);
    inv.phones.insert(phones.begin(), phones.end());
    for (const std::string v : {"a", "e", "i", "o", "u"})
        if (inv.phones.count(v) && inv.phones.count(v + "ː")) inv.long_counterparts[v] = v + "ː";
    return inv;
}

}  // namespace

// Stop series: where a language contrasts two series, the fortis/tense
// member is written with the voiceless symbol and the lenis member with the
// voiced one; single-series languages use whichever their orthography does.
std::vector<PhoneInventory> default_inventories() {
    return {
        make("Bardi", {"b", "d", "ɖ", "ɟ", "ɡ", "m", "n", "ɳ", "ɲ", "ŋ", "l", "ɭ", "ʎ", "r", "ɻ", "w", "j",
                       "a", "i", "o", "u", "aː", "iː", "uː"}),
        make("Gija", {"b", "d", "ɖ", "ɟ", "ɡ", "m", "n", "ɳ", "ɲ", "ŋ", "l", "ɭ", "ʎ", "r", "ɻ", "w", "j",
                      "a", "i", "u"}),
        make("Kunbarlang", {"p", "t", "ʈ", "c", "k", "b", "d", "ɖ", "ɟ", "ɡ", "m", "n", "ɳ", "ɲ", "ŋ", "l", "ɭ",
                            "r", "ɻ", "w", "j", "a", "e", "i", "o", "u"}),
        make("Ngaanyatjarra", {"p", "t", "ʈ", "c", "k", "m", "n", "ɳ", "ɲ", "ŋ", "l", "ɭ", "ʎ", "r", "ɻ", "w",
                               "j", "a", "i", "u", "aː", "iː", "uː"}),
        make("Yan-nhangu", {"p", "t", "t̪", "ʈ", "c", "k", "b", "d", "d̪", "ɖ", "ɟ", "ɡ", "ʔ", "m", "n", "n̪", "ɳ",
                            "ɲ", "ŋ", "l", "ɭ", "r", "ɻ", "w", "j", "a", "i", "u", "aː", "iː", "uː"}),
        make("Yidiny", {"b", "d", "ɟ", "ɡ", "m", "n", "ɲ", "ŋ", "l", "r", "ɻ", "w", "j", "a", "i", "u", "aː",
                        "iː", "uː"}),
    };
}

const PhoneInventory* find_inventory(const std::vector<PhoneInventory>& all, std::string_view language) {
    for (const auto& inv : all)
        if (inv.language == language) return &inv;
    return nullptr;
}

std::vector<PhoneInventory> inventories_from_json(std::string_view doc) {
    std::vector<PhoneInventory> out;
    try {
        const json j = json::parse(doc);
        if (!j.is_object()) throw ConfigError("inventories must be a JSON object keyed by language");
        for (const auto& [language, body] : j.items()) {
            PhoneInventory inv;
            inv.language = language;
            const auto phones = body.is_array() ? body.get<std::vector<std::string>>()
                                                : body.at("phones").get<std::vector<std::string>>();
            inv.phones.insert(phones.begin(), phones.end());
            if (body.is_object() && body.contains("long_counterparts"))
                inv.long_counterparts = body.at("long_counterparts").get<std::map<std::string, std::string>>();
            if (inv.phones.empty()) throw ConfigError("inventory for '" + language + "' is empty");
            out.push_back(std::move(inv));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("inventories: ") + e.what());
    }
    return out;
}

std::string inventories_to_json(const std::vector<PhoneInventory>& inventories) {
    ordered_json j = ordered_json::object();
    for (const auto& inv : inventories) {
        ordered_json body;
        body["phones"] = std::vector<std::string>(inv.phones.begin(), inv.phones.end());
        body["long_counterparts"] = inv.long_counterparts;
        j[inv.language] = body;
    }
    return j.dump(2) + "\n";
}

CoverageReport coverage_report(const PhoneInventory& test, const std::vector<PhoneInventory>& train) {
    CoverageReport r;
    r.test_language = test.language;
    for (const auto& inv : train) r.train_languages.push_back(inv.language);
    for (const auto& phone : test.phones) {
        std::vector<bool> row;
        bool any = false;
        for (const auto& inv : train) {
            row.push_back(inv.contains(phone));
            any = any || row.back();
        }
        if (!any) r.missing.insert(phone);
        r.presence[phone] = std::move(row);
    }
    return r;
}

std::string CoverageReport::to_json() const {
    ordered_json j;
    j["test_language"] = test_language;
    j["train_languages"] = train_languages;
    j["missing"] = std::vector<std::string>(missing.begin(), missing.end());
    ordered_json presence_json = ordered_json::object();
    for (const auto& [phone, row] : presence) presence_json[phone] = row;
    j["presence"] = presence_json;
    return j.dump(2) + "\n";
}

}  // namespace alignval
