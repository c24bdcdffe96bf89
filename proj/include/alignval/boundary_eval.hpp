#pragma once

// Onset-boundary evaluation of an aligner's phone tier against a
// human-corrected reference.
//
// Sign convention: diff_ms = (hypothesis onset - reference onset) * 1000, so
// a positive value means the aligner placed the boundary later.

#include "alignval/error.hpp"
#include "alignval/inventory.hpp"
#include "alignval/stats.hpp"
#include "alignval/textgrid.hpp"

#include <array>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

struct LabelOptions {
    // Labels treated like the empty label (silence / spoken-noise markers).
    std::set<std::string> ignore{"sil", "sp", "spn"};
};

// Trimmed label, or empty when the label is in options.ignore.
std::string normalize_label(std::string_view label, const LabelOptions& options = {});

struct AlignmentPair {
    std::string phone;
    Interval gold;
    Interval hyp;
    std::string word;          // enclosing reference word, empty when unknown
    std::string file;
    std::size_t position = 0;  // index of the phone within its word
    std::size_t word_length = 0;

    bool word_internal() const noexcept { return word_length > 2 && position > 0 && position + 1 < word_length; }
};

enum class EditKind { deletion, insertion, substitution };

struct AlignmentIssue {
    EditKind kind;
    std::string gold_label;  // empty for insertions
    std::string hyp_label;   // empty for deletions
    double time = 0.0;       // onset of the involved interval(s)
};

struct MatchResult {
    std::vector<AlignmentPair> pairs;
    std::vector<AlignmentIssue> issues;

    void report(Diagnostics& diag, const std::string& file) const;
};

// Pairs the non-empty intervals of both tiers. Identical label sequences pair
// positionally; otherwise a unit-cost Levenshtein alignment pairs only exact
// label matches. Throws EmptyTier when either tier has no labelled interval.
// `gold_words` (optional) supplies word context for each pair.
MatchResult match_tiers(const IntervalTier& gold, const IntervalTier& hyp, const IntervalTier* gold_words = nullptr,
                        const std::string& file = {}, const LabelOptions& options = {});

// (hyp - gold) * 1000, rounded to the nearest nanosecond (1e-6 ms) so that
// decimal boundary times give decimal diffs (1.012 vs 1.000 -> exactly 12).
double onset_diff_ms(double gold_onset_s, double hyp_onset_s);

struct BoundaryDiff {
    AlignmentPair pair;
    double diff_ms = 0.0;
};

std::vector<BoundaryDiff> onset_diffs(std::span<const AlignmentPair> pairs);

// ------------------------------------------------------------- aggregation

inline constexpr double kHistogramLimitMs = 205.0;
inline constexpr double kHistogramBinWidthMs = 10.0;
inline constexpr std::size_t kHistogramBins = 41;

enum class RangeFilter { include_all, in_histogram_range };

struct GroupingSpec {
    std::string model;
    std::string setting;
    bool by_class = true;
    bool by_file = false;
    RangeFilter range = RangeFilter::include_all;
};

struct DiffStats {
    std::string model;
    std::string setting;
    std::string cls;   // "all" when not grouped by class
    std::string file;  // empty when not grouped by file
    std::size_t n = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;  // population
    double mean_abs_ms = 0.0;
};

// One row per non-empty group, ordered by (file, class order of the map).
// Throws UnknownPhone naming the file when a phone is unclassifiable.
std::vector<DiffStats> aggregate(std::span<const BoundaryDiff> diffs, const NaturalClassMap& classes,
                                 const GroupingSpec& spec);

// Same, over exported diff records whose class column is already filled.
// `class_order` fixes the row order; classes not listed follow sorted.
// One row of an exported diff table.
struct DiffRecord {
    std::string file, word, phone, cls;
    std::size_t position = 0;
    double gold_onset_s = 0.0, hyp_onset_s = 0.0, diff_ms = 0.0;
};
std::vector<DiffStats> aggregate(std::span<const DiffRecord> records, const std::vector<std::string>& class_order,
                                 const GroupingSpec& spec);

struct HistogramResult {
    std::array<double, kHistogramBins + 1> bin_edges{};  // -205, -195, ..., 195, 205
    std::array<std::size_t, kHistogramBins> counts{};
    std::size_t total = 0;
    std::size_t in_range_count = 0;
    double excluded_pct = 0.0;

    // Bin index for an in-range value: [lo, hi) except the last bin, which
    // is closed. Returns kHistogramBins when out of range.
    static std::size_t bin_of(double diff_ms) noexcept;
    static std::array<double, kHistogramBins + 1> edges() noexcept;
};

HistogramResult histogram(std::span<const double> diffs_ms);
HistogramResult histogram(std::span<const BoundaryDiff> diffs);

struct FlaggedPair {
    AlignmentPair pair;
    double diff_ms = 0.0;
};

// First `limit` pairs, in input order, with |diff| strictly above the
// threshold.
std::vector<FlaggedPair> flag_misalignments(std::span<const AlignmentPair> pairs, double threshold_ms = 100.0,
                                            std::size_t limit = 100);

// ------------------------------------------------------------------ export

// file,word,phone,class,position,gold_onset_s,hyp_onset_s,diff_ms
std::string diffs_to_csv(std::span<const BoundaryDiff> diffs, const NaturalClassMap& classes);

std::vector<DiffRecord> diffs_from_csv(std::string_view csv);

// model,setting,class,n,mean_ms,std_ms,mean_abs_ms
std::string stats_to_csv(std::span<const DiffStats> stats);
std::string stats_to_json(std::span<const DiffStats> stats, RangeFilter range);

// file,word,phone,position,word_length,word_internal,gold_onset_s,hyp_onset_s,diff_ms
std::string flagged_to_csv(std::span<const FlaggedPair> flagged);

}  // namespace alignval
