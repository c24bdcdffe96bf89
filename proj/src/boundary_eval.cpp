#include "alignval/boundary_eval.hpp"

#include "alignval/text.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace alignval {

std::string normalize_label(std::string_view label, const LabelOptions& options) {
    std::string s(text::trim(label));
    if (options.ignore.count(s)) return {};
    return s;
}

void MatchResult::report(Diagnostics& diag, const std::string& file) const {
    for (const auto& issue : issues) {
        switch (issue.kind) {
        case EditKind::deletion:
            diag.warn("Deletion", fmt::format("reference phone '{}' at {} s has no aligned counterpart",
                                              issue.gold_label, issue.time), file);
            break;
        case EditKind::insertion:
            diag.warn("Insertion", fmt::format("aligned phone '{}' at {} s has no reference counterpart",
                                               issue.hyp_label, issue.time), file);
            break;
        case EditKind::substitution:
            diag.warn("Substitution", fmt::format("reference '{}' vs aligned '{}' at {} s", issue.gold_label,
                                                  issue.hyp_label, issue.time), file);
            break;
        }
    }
}

namespace {

struct Labelled {
    const Interval* interval;
    std::string label;
};

std::vector<Labelled> labelled(const IntervalTier& tier, const LabelOptions& options) {
    std::vector<Labelled> out;
    for (const auto& iv : tier.intervals) {
        auto label = normalize_label(iv.text, options);
        if (!label.empty()) out.push_back({&iv, std::move(label)});
    }
    return out;
}

struct WordContext {
    std::string word;
    std::size_t position = 0;
    std::size_t length = 0;
};

// Word context of every labelled reference phone, keyed by its index.
std::vector<WordContext> word_contexts(const std::vector<Labelled>& phones, const IntervalTier* words,
                                       const LabelOptions& options) {
    std::vector<WordContext> ctx(phones.size());
    if (!words) return ctx;
    std::vector<std::ptrdiff_t> word_of(phones.size(), -1);
    const auto& ivs = words->intervals;
    for (std::size_t i = 0; i < phones.size(); ++i) {
        const double mid = phones[i].interval->midpoint();
        auto it = std::upper_bound(ivs.begin(), ivs.end(), mid, [](double t, const Interval& w) { return t < w.xmin; });
        if (it == ivs.begin()) continue;
        --it;
        if (mid >= it->xmax || normalize_label(it->text, options).empty()) continue;
        word_of[i] = it - ivs.begin();
    }
    std::map<std::ptrdiff_t, std::size_t> sizes;
    for (auto w : word_of)
        if (w >= 0) ++sizes[w];
    std::map<std::ptrdiff_t, std::size_t> seen;
    for (std::size_t i = 0; i < phones.size(); ++i) {
        const auto w = word_of[i];
        if (w < 0) continue;
        ctx[i].word = std::string(text::trim(ivs[static_cast<std::size_t>(w)].text));
        ctx[i].position = seen[w]++;
        ctx[i].length = sizes[w];
    }
    return ctx;
}

}  // namespace

MatchResult match_tiers(const IntervalTier& gold, const IntervalTier& hyp, const IntervalTier* gold_words,
                        const std::string& file, const LabelOptions& options) {
    const auto g = labelled(gold, options);
    const auto h = labelled(hyp, options);
    if (g.empty()) throw EmptyTier(fmt::format("reference tier '{}' has no labelled intervals{}", gold.name,
                                               file.empty() ? "" : " in " + file));
    if (h.empty()) throw EmptyTier(fmt::format("aligned tier '{}' has no labelled intervals{}", hyp.name,
                                               file.empty() ? "" : " in " + file));

    const auto ctx = word_contexts(g, gold_words, options);
    MatchResult result;
    auto make_pair = [&](std::size_t gi, std::size_t hi) {
        AlignmentPair p;
        p.phone = g[gi].label;
        p.gold = *g[gi].interval;
        p.hyp = *h[hi].interval;
        p.word = ctx[gi].word;
        p.file = file;
        p.position = ctx[gi].position;
        p.word_length = ctx[gi].length;
        return p;
    };

    const bool identical = g.size() == h.size() &&
                           std::equal(g.begin(), g.end(), h.begin(), [](const auto& a, const auto& b) { return a.label == b.label; });
    if (identical) {
        for (std::size_t i = 0; i < g.size(); ++i) result.pairs.push_back(make_pair(i, i));
        return result;
    }

    const std::size_t n = g.size(), m = h.size();
    std::vector<std::size_t> d((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = at(i - 1, j - 1) + (g[i - 1].label == h[j - 1].label ? 0 : 1);
            at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
        }

    // Backtrace preferring matches, then deletions, then insertions.
    std::vector<AlignmentPair> pairs;
    std::vector<AlignmentIssue> issues;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && g[i - 1].label == h[j - 1].label && at(i, j) == at(i - 1, j - 1)) {
            pairs.push_back(make_pair(i - 1, j - 1));
            --i, --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            issues.push_back({EditKind::deletion, g[i - 1].label, {}, g[i - 1].interval->xmin});
            --i;
        } else if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
            issues.push_back({EditKind::insertion, {}, h[j - 1].label, h[j - 1].interval->xmin});
            --j;
        } else {
            issues.push_back({EditKind::substitution, g[i - 1].label, h[j - 1].label, g[i - 1].interval->xmin});
            --i, --j;
        }
    }
    std::reverse(pairs.begin(), pairs.end());
    std::reverse(issues.begin(), issues.end());
    result.pairs = std::move(pairs);
    result.issues = std::move(issues);
    return result;
}

double onset_diff_ms(double gold_onset_s, double hyp_onset_s) {
    return std::round((hyp_onset_s - gold_onset_s) * 1e9) / 1e6;
}

std::vector<BoundaryDiff> onset_diffs(std::span<const AlignmentPair> pairs) {
    std::vector<BoundaryDiff> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({p, onset_diff_ms(p.gold.xmin, p.hyp.xmin)});
    return out;
}

// ------------------------------------------------------------- aggregation

namespace {

bool in_histogram_range(double d) {
    return d >= -kHistogramLimitMs && d <= kHistogramLimitMs;
}

struct Item {
    const std::string* cls;
    const std::string* file;
    double diff;
};

std::vector<DiffStats> aggregate_items(const std::vector<Item>& items, const std::vector<std::string>& class_order,
                                       const GroupingSpec& spec) {
    static const std::string all = "all";
    static const std::string none;
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < class_order.size(); ++i) rank.emplace(class_order[i], i);
    // key: (file, class rank, class)
    std::map<std::tuple<std::string, std::size_t, std::string>, RunningStats> groups;
    for (const auto& item : items) {
        if (spec.range == RangeFilter::in_histogram_range && !in_histogram_range(item.diff)) continue;
        const std::string& cls = spec.by_class ? *item.cls : all;
        const std::string& file = spec.by_file ? *item.file : none;
        const auto r = rank.find(cls);
        const std::size_t order = r == rank.end() ? class_order.size() : r->second;
        groups[{file, order, cls}].add(item.diff);
    }
    std::vector<DiffStats> rows;
    rows.reserve(groups.size());
    for (const auto& [key, stats] : groups) {
        DiffStats row;
        row.model = spec.model;
        row.setting = spec.setting;
        row.file = std::get<0>(key);
        row.cls = std::get<2>(key);
        row.n = stats.count();
        row.mean_ms = stats.mean();
        row.std_ms = stats.stddev();
        row.mean_abs_ms = stats.mean_abs();
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<DiffStats> aggregate(std::span<const BoundaryDiff> diffs, const NaturalClassMap& classes,
                                 const GroupingSpec& spec) {
    std::vector<Item> items;
    items.reserve(diffs.size());
    for (const auto& d : diffs) {
        const std::string* cls = classes.find(d.pair.phone);
        if (!cls)
            throw UnknownPhone(fmt::format("phone '{}' has no natural class (file '{}', word '{}')", d.pair.phone,
                                           d.pair.file, d.pair.word));
        items.push_back({cls, &d.pair.file, d.diff_ms});
    }
    return aggregate_items(items, classes.labels(), spec);
}

std::vector<DiffStats> aggregate(std::span<const DiffRecord> records, const std::vector<std::string>& class_order,
                                 const GroupingSpec& spec) {
    std::vector<Item> items;
    items.reserve(records.size());
    for (const auto& r : records) items.push_back({&r.cls, &r.file, r.diff_ms});
    return aggregate_items(items, class_order, spec);
}

std::array<double, kHistogramBins + 1> HistogramResult::edges() noexcept {
    std::array<double, kHistogramBins + 1> e{};
    for (std::size_t i = 0; i <= kHistogramBins; ++i)
        e[i] = -kHistogramLimitMs + kHistogramBinWidthMs * static_cast<double>(i);
    return e;
}

std::size_t HistogramResult::bin_of(double d) noexcept {
    if (!in_histogram_range(d)) return kHistogramBins;
    if (d == kHistogramLimitMs) return kHistogramBins - 1;
    static const auto e = edges();
    auto idx = static_cast<std::ptrdiff_t>(std::floor((d + kHistogramLimitMs) / kHistogramBinWidthMs));
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(kHistogramBins) - 1);
    // the division can round across an edge; settle against the exact edges
    while (idx > 0 && d < e[static_cast<std::size_t>(idx)]) --idx;
    while (idx + 1 < static_cast<std::ptrdiff_t>(kHistogramBins) && d >= e[static_cast<std::size_t>(idx) + 1]) ++idx;
    return static_cast<std::size_t>(idx);
}

HistogramResult histogram(std::span<const double> diffs_ms) {
    HistogramResult h;
    h.bin_edges = HistogramResult::edges();
    h.total = diffs_ms.size();
    for (double d : diffs_ms) {
        const auto b = HistogramResult::bin_of(d);
        if (b == kHistogramBins) continue;
        ++h.counts[b];
        ++h.in_range_count;
    }
    h.excluded_pct = h.total == 0 ? 0.0
                                  : 100.0 * static_cast<double>(h.total - h.in_range_count) / static_cast<double>(h.total);
    return h;
}

HistogramResult histogram(std::span<const BoundaryDiff> diffs) {
    std::vector<double> values;
    values.reserve(diffs.size());
    for (const auto& d : diffs) values.push_back(d.diff_ms);
    return histogram(values);
}

std::vector<FlaggedPair> flag_misalignments(std::span<const AlignmentPair> pairs, double threshold_ms,
                                            std::size_t limit) {
    if (!(threshold_ms > 0.0)) throw std::invalid_argument("flag_misalignments: threshold must be positive");
    std::vector<FlaggedPair> out;
    for (const auto& p : pairs) {
        if (out.size() >= limit) break;
        const double d = onset_diff_ms(p.gold.xmin, p.hyp.xmin);
        if (std::fabs(d) > threshold_ms) out.push_back({p, d});
    }
    return out;
}

// ------------------------------------------------------------------ export

std::string diffs_to_csv(std::span<const BoundaryDiff> diffs, const NaturalClassMap& classes) {
    using text::csv_field;
    using text::format_real;
    std::string out = "file,word,phone,class,position,gold_onset_s,hyp_onset_s,diff_ms\n";
    for (const auto& d : diffs) {
        const std::string* cls = classes.find(d.pair.phone);
        out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(d.pair.file), csv_field(d.pair.word),
                           csv_field(d.pair.phone), csv_field(cls ? *cls : std::string()), d.pair.position,
                           format_real(d.pair.gold.xmin), format_real(d.pair.hyp.xmin), format_real(d.diff_ms));
    }
    return out;
}

std::vector<DiffRecord> diffs_from_csv(std::string_view csv) {
    const auto rows = text::parse_csv(csv);
    if (rows.empty()) throw ParseError("diff table is empty");
    const std::vector<std::string> expected{"file", "word", "phone", "class", "position", "gold_onset_s",
                                            "hyp_onset_s", "diff_ms"};
    if (rows.front() != expected) throw ParseError("diff table header does not match the export format");
    std::vector<DiffRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != expected.size()) throw ParseError(fmt::format("diff table row {} has {} fields", r + 1, row.size()));
        DiffRecord rec{row[0], row[1], row[2], row[3]};
        const auto pos = text::parse_real(row[4]);
        const auto g = text::parse_real(row[5]);
        const auto h = text::parse_real(row[6]);
        const auto d = text::parse_real(row[7]);
        if (!pos || !g || !h || !d) throw ParseError(fmt::format("diff table row {} has a malformed number", r + 1));
        rec.position = static_cast<std::size_t>(*pos);
        rec.gold_onset_s = *g;
        rec.hyp_onset_s = *h;
        rec.diff_ms = *d;
        out.push_back(std::move(rec));
    }
    return out;
}

std::string stats_to_csv(std::span<const DiffStats> stats) {
    using text::csv_field;
    using text::format_real;
    std::string out = "model,setting,class,n,mean_ms,std_ms,mean_abs_ms\n";
    for (const auto& s : stats)
        out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(s.model), csv_field(s.setting), csv_field(s.cls), s.n,
                           format_real(s.mean_ms), format_real(s.std_ms), format_real(s.mean_abs_ms));
    return out;
}

std::string stats_to_json(std::span<const DiffStats> stats, RangeFilter range) {
    nlohmann::ordered_json j;
    j["range_filter"] = range == RangeFilter::include_all ? "include-all" : "in-histogram-range";
    j["std_convention"] = "population";
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& s : stats) {
        nlohmann::ordered_json row;
        row["model"] = s.model;
        row["setting"] = s.setting;
        row["class"] = s.cls;
        if (!s.file.empty()) row["file"] = s.file;
        row["n"] = s.n;
        row["mean_ms"] = s.mean_ms;
        row["std_ms"] = s.std_ms;
        row["mean_abs_ms"] = s.mean_abs_ms;
        j["rows"].push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

std::string flagged_to_csv(std::span<const FlaggedPair> flagged) {
    using text::csv_field;
    using text::format_real;
    std::string out = "file,word,phone,position,word_length,word_internal,gold_onset_s,hyp_onset_s,diff_ms\n";
    for (const auto& f : flagged)
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(f.pair.file), csv_field(f.pair.word),
                           csv_field(f.pair.phone), f.pair.position, f.pair.word_length,
                           f.pair.word_internal() ? "true" : "false", format_real(f.pair.gold.xmin),
                           format_real(f.pair.hyp.xmin), format_real(f.diff_ms));
    return out;
}

}  // namespace alignval
