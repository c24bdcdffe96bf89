#include "alignval/boundary_eval.hpp"
#include "alignval/stats.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

using namespace alignval;
using testsupport::make_tier;

namespace {

// Contiguous tier of `labels`, each `step` seconds long.
IntervalTier phone_tier(const std::vector<std::string>& labels, double start = 0.0, double step = 0.1) {
    std::vector<double> b{start};
    for (std::size_t i = 0; i < labels.size(); ++i) b.push_back(start + step * static_cast<double>(i + 1));
    return make_tier("phones", b, labels);
}

// Minimal unit-cost edit distance by exhaustive enumeration of monotone
// alignments (sequences of at most 6 symbols).
std::size_t exhaustive_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::function<std::size_t(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size()) return b.size() - j;
        if (j == b.size()) return a.size() - i;
        const std::size_t diag = rec(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
        return std::min({diag, rec(i + 1, j) + 1, rec(i, j + 1) + 1});
    };
    return rec(0, 0);
}

std::vector<AlignmentPair> pairs_for(const std::vector<double>& gold_onsets, const std::vector<double>& hyp_onsets) {
    std::vector<AlignmentPair> out;
    for (std::size_t i = 0; i < gold_onsets.size(); ++i) {
        AlignmentPair p;
        p.phone = "a";
        p.gold = {gold_onsets[i], gold_onsets[i] + 0.05, "a"};
        p.hyp = {hyp_onsets[i], hyp_onsets[i] + 0.05, "a"};
        p.file = "f";
        out.push_back(p);
    }
    return out;
}

}  // namespace

TEST_CASE("identical label sequences pair positionally") {
    const auto g = phone_tier({"ŋ", "a", "j"});
    const auto r = match_tiers(g, phone_tier({"ŋ", "a", "j"}, 0.01));
    REQUIRE(r.pairs.size() == 3);
    CHECK(r.issues.empty());
    CHECK(r.pairs[1].phone == "a");
    CHECK(r.pairs[1].gold.xmin == g.intervals[1].xmin);
}

TEST_CASE("a deleted phone becomes a diagnostic, not a pair") {
    const auto r = match_tiers(phone_tier({"ŋ", "a", "j"}), phone_tier({"ŋ", "j"}));
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.pairs[0].phone == "ŋ");
    CHECK(r.pairs[1].phone == "j");
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].kind == EditKind::deletion);
    CHECK(r.issues[0].gold_label == "a");
    Diagnostics diag;
    r.report(diag, "f.TextGrid");
    CHECK(diag.count("Deletion") == 1);
    CHECK(diag.entries()[0].file == "f.TextGrid");
}

TEST_CASE("empty or silence-only tiers are EmptyTier") {
    CHECK_THROWS_AS(match_tiers(make_tier("p", {0, 1, 2}, {"", "sil"}), phone_tier({"a"})), EmptyTier);
    CHECK_THROWS_AS(match_tiers(phone_tier({"a"}), make_tier("p", {0, 1}, {" "})), EmptyTier);
}

TEST_CASE("silence labels never pair") {
    const auto g = make_tier("p", {0, 0.1, 0.2, 0.3, 0.4}, {"sil", "a", "sp", "b"});
    const auto h = make_tier("p", {0, 0.12, 0.3, 0.4}, {"", "a", "b"});
    const auto r = match_tiers(g, h);
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.issues.empty());
    CHECK(normalize_label(" sil ") == "");
    CHECK(normalize_label(" a ") == "a");
}

TEST_CASE("matching agrees with the exhaustive alignment oracle") {
    std::mt19937_64 rng(101);
    const std::vector<std::string> alphabet{"a", "b", "ŋ", "i"};
    for (int trial = 0; trial < 3000; ++trial) {
        std::vector<std::string> a(1 + rng() % 6), b(1 + rng() % 6);
        for (auto& s : a) s = alphabet[rng() % alphabet.size()];
        for (auto& s : b) s = alphabet[rng() % alphabet.size()];
        const auto gold = phone_tier(a), hyp = phone_tier(b, 0.0, 0.07);
        const auto r = match_tiers(gold, hyp);

        std::size_t del = 0, ins = 0, sub = 0;
        for (const auto& issue : r.issues) {
            if (issue.kind == EditKind::deletion) ++del;
            if (issue.kind == EditKind::insertion) ++ins;
            if (issue.kind == EditKind::substitution) ++sub;
        }
        CAPTURE(trial);
        REQUIRE(r.pairs.size() + del + sub == a.size());
        REQUIRE(r.pairs.size() + ins + sub == b.size());
        CHECK(del + ins + sub == exhaustive_edit_distance(a, b));
        // Pairs are label-equal and strictly increasing on both sides.
        for (std::size_t k = 0; k < r.pairs.size(); ++k) {
            CHECK(r.pairs[k].gold.text == r.pairs[k].hyp.text);
            if (k) {
                CHECK(r.pairs[k].gold.xmin > r.pairs[k - 1].gold.xmin);
                CHECK(r.pairs[k].hyp.xmin > r.pairs[k - 1].hyp.xmin);
            }
        }
        if (a == b) CHECK(r.issues.empty());
    }
}

TEST_CASE("word context and within-word position") {
    const auto phones = make_tier("phones", {0, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0}, {"", "b", "a", "n", "a", "ŋ", ""});
    const auto words = make_tier("words", {0, 0.3, 0.7, 0.8, 1.0}, {"", "bana", "ŋ", ""});
    const auto r = match_tiers(phones, phones, &words, "f");
    REQUIRE(r.pairs.size() == 5);
    CHECK(r.pairs[0].word == "bana");
    CHECK(r.pairs[0].position == 0);
    CHECK(r.pairs[2].position == 2);
    CHECK(r.pairs[2].word_length == 4);
    CHECK(r.pairs[2].word_internal());
    CHECK_FALSE(r.pairs[0].word_internal());
    CHECK_FALSE(r.pairs[3].word_internal());
    CHECK(r.pairs[4].word == "ŋ");
    CHECK(r.pairs[4].file == "f");
}

TEST_CASE("onset diffs: sign convention and exact decimals") {
    CHECK(onset_diff_ms(1.000, 1.012) == 12.0);
    CHECK(onset_diff_ms(2.500, 2.295) == -205.0);
    CHECK(onset_diff_ms(3.25, 3.25) == 0.0);
    const auto d = onset_diffs(pairs_for({1.0, 2.5}, {1.012, 2.295}));
    CHECK(d[0].diff_ms == 12.0);
    CHECK(d[1].diff_ms == -205.0);
}

TEST_CASE("a +12 ms shifted hypothesis gives +12 for every phone") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> ms(20, 300);
    std::vector<double> b{0.0};
    std::vector<std::string> labels;
    for (int i = 0; i < 400; ++i) {
        b.push_back(b.back() + ms(rng) / 1000.0);
        labels.push_back(i % 5 ? "a" : "b");
    }
    std::vector<double> shifted = b;
    for (std::size_t i = 1; i + 1 < shifted.size(); ++i) shifted[i] += 0.012;
    const auto gold = make_tier("phones", b, labels);
    auto hyp = make_tier("phones", shifted, labels);
    const auto r = match_tiers(gold, hyp);
    const auto diffs = onset_diffs(r.pairs);
    REQUIRE(diffs.size() == labels.size());
    for (std::size_t i = 1; i < diffs.size(); ++i) CHECK(diffs[i].diff_ms == 12.0);
}

TEST_CASE("antisymmetry and translation invariance") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> on(0.0, 100.0), jitter(-0.3, 0.3), shift(-5.0, 5.0);
    for (int i = 0; i < 20000; ++i) {
        const double g = on(rng), h = std::max(0.0, g + jitter(rng)), dt = shift(rng);
        CHECK(onset_diff_ms(h, g) == -onset_diff_ms(g, h));
        if (g + dt >= 0 && h + dt >= 0) CHECK(std::fabs(onset_diff_ms(g + dt, h + dt) - onset_diff_ms(g, h)) <= 1e-6);
    }
}

TEST_CASE("aggregate: hand arithmetic") {
    const auto classes = NaturalClassMap::defaults();
    auto diffs_of = [](std::vector<std::pair<std::string, double>> v) {
        std::vector<BoundaryDiff> out;
        for (auto& [phone, d] : v) {
            BoundaryDiff bd;
            bd.pair.phone = phone;
            bd.pair.file = "f";
            bd.diff_ms = d;
            out.push_back(bd);
        }
        return out;
    };
    auto s = aggregate(diffs_of({{"b", 10}, {"d", -10}}), classes, {"m", "s"});
    REQUIRE(s.size() == 1);
    CHECK(s[0].cls == "stop");
    CHECK(s[0].mean_ms == 0.0);
    CHECK(s[0].std_ms == 10.0);
    CHECK(s[0].mean_abs_ms == 10.0);
    CHECK(s[0].model == "m");
    CHECK(s[0].setting == "s");

    s = aggregate(diffs_of({{"b", 7}}), classes, {});
    CHECK(s[0].mean_ms == 7.0);
    CHECK(s[0].std_ms == 0.0);
    CHECK(s[0].mean_abs_ms == 7.0);

    s = aggregate(diffs_of({{"n", -20}, {"b", 10}}), classes, {});
    REQUIRE(s.size() == 2);
    CHECK(s[0].cls == "stop");
    CHECK(s[0].n == 1);
    CHECK(s[1].cls == "nasal");
    CHECK(s[1].mean_ms == -20.0);

    s = aggregate(diffs_of({{"n", -20}, {"b", 10}}), classes, {.by_class = false});
    REQUIRE(s.size() == 1);
    CHECK(s[0].cls == "all");
    CHECK(s[0].n == 2);

    CHECK_THROWS_AS(aggregate(diffs_of({{"q", 1}}), classes, {}), UnknownPhone);
    CHECK(aggregate(std::vector<BoundaryDiff>{}, classes, {}).empty());
}

TEST_CASE("aggregate equals a brute-force group-by on random inputs") {
    const auto classes = NaturalClassMap::defaults();
    const std::vector<std::string> phones{"b", "d", "m", "ŋ", "r", "l", "w", "ɻ", "a", "i", "aː", "uː"};
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        std::normal_distribution<double> d(std::uniform_real_distribution<double>(-50, 50)(rng), 40.0);
        std::vector<BoundaryDiff> diffs(1 + rng() % 10000);
        for (auto& x : diffs) {
            x.pair.phone = phones[rng() % phones.size()];
            x.pair.file = "f" + std::to_string(rng() % 3);
            x.diff_ms = std::round(d(rng) * 1e6) / 1e6;
        }
        const bool by_file = trial % 2;
        const bool in_range = trial % 3 == 0;
        const auto stats = aggregate(diffs, classes,
                                     {"m", "s", true, by_file,
                                      in_range ? RangeFilter::in_histogram_range : RangeFilter::include_all});
        std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
        for (const auto& x : diffs) {
            if (in_range && std::fabs(x.diff_ms) > 205.0) continue;
            groups[{by_file ? x.pair.file : "", classes.classify(x.pair.phone)}].push_back(x.diff_ms);
        }
        REQUIRE(stats.size() == groups.size());
        for (const auto& row : stats) {
            const auto ref = testsupport::reference_stats(groups.at({row.file, row.cls}));
            CHECK(row.n == ref.n);
            CHECK(std::fabs(row.mean_ms - ref.mean) <= 1e-9 * std::max(1.0, std::fabs(ref.mean)));
            CHECK(std::fabs(row.std_ms - ref.std) <= 1e-9 * std::max(1.0, ref.std));
            CHECK(std::fabs(row.mean_abs_ms - ref.mean_abs) <= 1e-9 * std::max(1.0, ref.mean_abs));
        }
    }
}

TEST_CASE("partial statistics merge associatively") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(10.0, 25.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs(2 + rng() % 500);
        for (auto& x : xs) x = d(rng);
        const std::size_t cut = 1 + rng() % (xs.size() - 1);
        RunningStats whole, left, right;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            whole.add(xs[i]);
            (i < cut ? left : right).add(xs[i]);
        }
        left.merge(right);
        CHECK(left.count() == whole.count());
        CHECK(left.mean() == doctest::Approx(whole.mean()).epsilon(1e-12));
        CHECK(left.stddev() == doctest::Approx(whole.stddev()).epsilon(1e-12));
        CHECK(left.mean_abs() == doctest::Approx(whole.mean_abs()).epsilon(1e-12));
    }
}

TEST_CASE("histogram edges and examples") {
    const auto e = HistogramResult::edges();
    CHECK(e.front() == -205.0);
    CHECK(e[20] == -5.0);
    CHECK(e[21] == 5.0);
    CHECK(e.back() == 205.0);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] - e[i - 1] == 10.0);

    const std::vector<double> central{0.0, 4.9, -4.9};
    const auto h = histogram(central);
    CHECK(h.counts[20] == 3);
    CHECK(h.excluded_pct == 0.0);

    const std::vector<double> wide{210.0, -300.0, 10.0};
    const auto w = histogram(wide);
    CHECK(w.in_range_count == 1);
    CHECK(w.counts[21] == 1);
    CHECK(w.excluded_pct == doctest::Approx(66.67).epsilon(0.0001));
    CHECK(std::fabs(w.excluded_pct - 200.0 / 3.0) < 1e-12);

    CHECK(HistogramResult::bin_of(-205.0) == 0);
    CHECK(HistogramResult::bin_of(205.0) == 40);
    CHECK(HistogramResult::bin_of(195.0) == 40);
    CHECK(HistogramResult::bin_of(5.0) == 21);
    CHECK(HistogramResult::bin_of(-5.0) == 20);
    CHECK(HistogramResult::bin_of(205.000001) == kHistogramBins);
    CHECK(HistogramResult::bin_of(-205.000001) == kHistogramBins);
    CHECK(histogram(std::vector<double>{}).excluded_pct == 0.0);
}

TEST_CASE("histogram equals the reference binning") {
    std::mt19937_64 rng(1000);
    for (int trial = 0; trial < 100; ++trial) {
        std::normal_distribution<double> d(0.0, trial % 2 ? 30.0 : 120.0);
        std::vector<double> xs(1000);
        for (auto& x : xs) x = std::round(d(rng) * 1e6) / 1e6;
        // Exact edge values too.
        for (int k = 0; k < 20; ++k) xs[static_cast<std::size_t>(k)] = -205.0 + 10.0 * (rng() % 42);
        std::size_t outside = 0;
        const auto ref = testsupport::reference_bins(xs, &outside);
        const auto h = histogram(xs);
        for (std::size_t b = 0; b < kHistogramBins; ++b) CHECK(h.counts[b] == ref[b]);
        CHECK(h.in_range_count + outside == xs.size());
        CHECK(h.total == xs.size());
        std::size_t sum = 0;
        for (auto c : h.counts) sum += c;
        CHECK(sum == h.in_range_count);
        CHECK(h.excluded_pct == doctest::Approx(100.0 * static_cast<double>(outside) / 1000.0));
    }
}

TEST_CASE("flagging is strict and keeps the first items in order") {
    auto pairs = pairs_for({1.0, 2.0, 3.0}, {1.099, 2.101, 3.150});
    auto f = flag_misalignments(pairs);
    REQUIRE(f.size() == 2);
    CHECK(f[0].pair.gold.xmin == 2.0);
    CHECK(f[0].diff_ms == 101.0);
    CHECK(f[1].diff_ms == 150.0);
    CHECK(flag_misalignments(pairs_for({1.0}, {1.1})).empty());  // exactly 100 ms

    std::vector<double> g, h;
    for (int i = 0; i < 300; ++i) {
        g.push_back(i);
        h.push_back(i + (i % 2 ? 0.2 : -0.2));
    }
    const auto many = flag_misalignments(pairs_for(g, h));
    REQUIRE(many.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(many[i].pair.gold.xmin == static_cast<double>(i));
    CHECK(flag_misalignments(pairs_for(g, h), 100.0, 7).size() == 7);
}

TEST_CASE("diff CSV round trip") {
    const auto phones = make_tier("phones", {0, 0.3, 0.4, 0.5, 1.0}, {"", "b", "a", ""});
    const auto words = make_tier("words", {0, 0.3, 0.5, 1.0}, {"", "ba,\"x\"", ""});
    auto hyp = make_tier("phones", {0, 0.312, 0.395, 0.5, 1.0}, {"", "b", "a", ""});
    const auto r = match_tiers(phones, hyp, &words, "file one");
    const auto diffs = onset_diffs(r.pairs);
    const auto csv = diffs_to_csv(diffs, NaturalClassMap::defaults());
    CHECK(csv.rfind("file,word,phone,class,position,gold_onset_s,hyp_onset_s,diff_ms\n", 0) == 0);
    const auto back = diffs_from_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].word == "ba,\"x\"");
    CHECK(back[0].cls == "stop");
    CHECK(back[0].diff_ms == 12.0);
    CHECK(back[1].diff_ms == -5.0);
    CHECK(back[1].position == 1);
    CHECK(back[1].hyp_onset_s == 0.395);

    const auto from_records = aggregate(back, default_class_labels(), {.model = "m"});
    const auto from_diffs = aggregate(diffs, NaturalClassMap::defaults(), {.model = "m"});
    REQUIRE(from_records.size() == from_diffs.size());
    for (std::size_t i = 0; i < from_records.size(); ++i) {
        CHECK(from_records[i].cls == from_diffs[i].cls);
        CHECK(from_records[i].mean_ms == from_diffs[i].mean_ms);
    }
    CHECK(stats_to_csv(from_records).rfind("model,setting,class,n,mean_ms,std_ms,mean_abs_ms\n", 0) == 0);
    CHECK(stats_to_json(from_records, RangeFilter::include_all).find("include-all") != std::string::npos);
    CHECK_THROWS_AS(diffs_from_csv("file,word\nx,y\n"), Error);
}
