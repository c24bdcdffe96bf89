#pragma once

// Transcript cleaning, short-word filtering and dataset bookkeeping.

#include "alignval/error.hpp"
#include "alignval/textgrid.hpp"

#include <map>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

enum class MarkerPosition { any, initial, final };

struct PartialWordMarker {
    std::string text;
    MarkerPosition position = MarkerPosition::final;
};

struct StripRule {
    std::string pattern;  // ECMAScript regular expression
    std::string replacement;
    std::regex compiled;
};

class CleaningRules {
public:
    CleaningRules() = default;

    // Throws InvalidPattern for a bad expression, ConfigError for a negative
    // minimum duration.
    void add_strip_pattern(std::string pattern, std::string replacement);
    void add_marker(PartialWordMarker marker);
    void set_min_word_duration(double seconds);

    const std::vector<StripRule>& strip_patterns() const noexcept { return strip_; }
    const std::vector<PartialWordMarker>& markers() const noexcept { return markers_; }
    double min_word_duration() const noexcept { return min_word_duration_; }

    // Parenthesised and bracketed comments stripped, token-final hyphen marks
    // a partial word, 0.1 s minimum word duration.
    static CleaningRules defaults();
    // {"strip_patterns": [{"pattern": ..., "replacement": ...}],
    //  "partial_word_markers": ["-", {"text": "-", "position": "final"}],
    //  "min_word_duration": 0.1}
    // A bare string marker matches anywhere in the token.
    static CleaningRules from_json(std::string_view json);
    std::string to_json() const;

private:
    std::vector<StripRule> strip_;
    std::vector<PartialWordMarker> markers_;
    double min_word_duration_ = 0.1;
};

std::string clean_transcript(std::string_view text, const CleaningRules& rules);

// Cleans every label of the tier in place (timeline untouched).
IntervalTier clean_tier(const IntervalTier& tier, const CleaningRules& rules);

// Labels of non-empty intervals strictly shorter than min_duration are
// emptied. Durations within 1e-9 s of the threshold count as equal to it,
// so a nominal 0.1 s word is kept despite binary rounding.
IntervalTier filter_short_words(const IntervalTier& tier, double min_duration);

struct ManifestEntry {
    std::string audio_path;
    std::string textgrid_path;
    std::string language;
    std::string split;
};

// UTF-8 CSV with header path_audio,path_textgrid,language,split (column
// order free, split optional). Relative paths resolve against base_dir.
std::vector<ManifestEntry> parse_manifest(std::string_view csv, const std::string& base_dir = {});
std::vector<ManifestEntry> read_manifest(const std::string& path);
std::string serialize_manifest(const std::vector<ManifestEntry>& entries);

struct FileIssue {
    std::string path;
    std::string kind;
    std::string message;
};

struct DatasetSummary {
    std::size_t files = 0;
    double total_minutes = 0.0;
    std::map<std::string, double> language_minutes;
    std::map<std::pair<std::string, std::string>, double> language_split_minutes;
    std::vector<FileIssue> errors;

    // Minutes of rows whose language is in `languages`; when `splits` is
    // non-empty only (language, split) rows with a listed split count.
    double minutes_for(const std::vector<std::string>& languages, const std::vector<std::string>& splits = {}) const;
    std::string to_json() const;
};

// Duration comes from the WAV headers; each TextGrid must parse. Failures
// are collected in `errors` and the file is left out of the totals.
DatasetSummary assemble_dataset(const std::vector<ManifestEntry>& manifest);

}  // namespace alignval
