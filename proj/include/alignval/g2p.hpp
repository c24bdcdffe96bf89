#pragma once

// Rule-based grapheme -> phoneme conversion and MFA-style dictionaries.

#include "alignval/error.hpp"
#include "alignval/inventory.hpp"
#include "alignval/textgrid.hpp"

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

struct G2PRule {
    std::string grapheme;
    std::vector<std::string> phones;
};

class G2PRuleSet {
public:
    G2PRuleSet() = default;
    // Throws ConfigError on an empty or duplicate grapheme.
    G2PRuleSet(std::string language, std::vector<G2PRule> rules);

    const std::string& language() const noexcept { return language_; }
    // Declaration order.
    const std::vector<G2PRule>& rules() const noexcept { return rules_; }
    // Indices into rules(): longest grapheme first (code points), ties in
    // declaration order.
    const std::vector<std::size_t>& match_order() const noexcept { return order_; }

    // JSON array of {"grapheme": "ng", "phones": ["ŋ"]}.
    static G2PRuleSet from_json(std::string language, std::string_view json);
    std::string to_json() const;

private:
    std::string language_;
    std::vector<G2PRule> rules_;
    std::vector<std::size_t> order_;
};

// Unofficial practical-orthography tables for the six fixture languages,
// restricted to the phones of the matching default inventory.
std::vector<G2PRuleSet> default_g2p_rulesets();
const G2PRuleSet* find_ruleset(const std::vector<G2PRuleSet>& all, std::string_view language);

// {"Yidiny": [{"grapheme": "ng", "phones": ["ŋ"]}, ...], ...}
std::vector<G2PRuleSet> g2p_rulesets_from_json(std::string_view json);
std::string g2p_rulesets_to_json(const std::vector<G2PRuleSet>& sets);

struct G2PResult {
    std::vector<std::string> phones;
    std::vector<std::string> unmapped;  // one entry per skipped code point
};

// Left-to-right greedy longest match; unmatched code points are skipped and
// reported.
G2PResult apply_g2p(std::string_view word, const G2PRuleSet& rules);

struct WordlistOptions {
    bool case_fold = true;
};

// Unique non-empty whitespace-separated tokens of all labels, sorted.
std::vector<std::string> build_wordlist(std::span<const IntervalTier> tiers, const WordlistOptions& options = {});

using PronunciationDictionary = std::map<std::string, std::vector<std::string>>;

// "word<TAB>p1 p2 ...\n" per entry, sorted by word.
std::string serialize_dictionary(const PronunciationDictionary& dict);
PronunciationDictionary parse_dictionary(std::string_view text);

// Reports phones outside the inventory as "PhoneNotInInventory" errors.
void validate_dictionary(const PronunciationDictionary& dict, const PhoneInventory& inventory, Diagnostics& diag);

}  // namespace alignval
