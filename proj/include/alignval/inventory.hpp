#pragma once

// Per-language phone inventories and the phone -> natural class partition
// used to group boundary statistics.

#include "alignval/error.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

struct PhoneInventory {
    std::string language;
    std::set<std::string> phones;
    std::map<std::string, std::string> long_counterparts;  // short -> long

    bool contains(std::string_view phone) const { return phones.count(std::string(phone)) > 0; }
};

// Canonical class labels, in the row order used by reports.
inline const std::vector<std::string>& default_class_labels() {
    static const std::vector<std::string> labels{"stop",        "nasal",       "trill",       "lateral",
                                                 "approximant", "rhotic-approximant", "short-vowel", "long-vowel"};
    return labels;
}

class NaturalClassMap {
public:
    NaturalClassMap() = default;

    // Throws ConfigError when a phone is listed under two classes.
    void add_class(const std::string& label, const std::vector<std::string>& phones);

    // Throws UnknownPhone.
    const std::string& classify(std::string_view phone) const;
    const std::string* find(std::string_view phone) const;

    // Class labels in declaration order.
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::map<std::string, std::set<std::string>>& classes() const noexcept { return classes_; }
    bool is_vowel_class(std::string_view label) const { return label == "short-vowel" || label == "long-vowel"; }

    // Every inventory phone must be assigned; throws ConfigError listing the
    // unassigned ones.
    void check_covers(const std::vector<PhoneInventory>& inventories) const;

    static NaturalClassMap defaults();
    // {"stop": ["p", ...], "nasal": [...], ...}; object key order is ignored,
    // labels are ordered canonically with unknown labels appended sorted.
    static NaturalClassMap from_json(std::string_view json);
    std::string to_json() const;

private:
    std::vector<std::string> labels_;
    std::map<std::string, std::set<std::string>> classes_;
    std::map<std::string, std::string, std::less<>> phone_to_class_;
};

// Shipped fixture inventories for Bardi, Gija, Kunbarlang, Ngaanyatjarra,
// Yan-nhangu and Yidiny. They are editable approximations, not an
// authoritative phonology.
std::vector<PhoneInventory> default_inventories();
const PhoneInventory* find_inventory(const std::vector<PhoneInventory>& all, std::string_view language);

// {"Bardi": {"phones": [...], "long_counterparts": {"a": "aː"}}, ...}
std::vector<PhoneInventory> inventories_from_json(std::string_view json);
std::string inventories_to_json(const std::vector<PhoneInventory>& inventories);

struct CoverageReport {
    std::string test_language;
    std::set<std::string> missing;  // test phones absent from every train inventory
    std::vector<std::string> train_languages;
    // phone -> presence per train language (same order as train_languages)
    std::map<std::string, std::vector<bool>> presence;

    std::string to_json() const;
};

CoverageReport coverage_report(const PhoneInventory& test, const std::vector<PhoneInventory>& train);

}  // namespace alignval
