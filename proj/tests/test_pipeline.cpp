#include "alignval/pipeline.hpp"
#include "alignval/report.hpp"
#include "alignval/text.hpp"
#include "support.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <stdexcept>

using namespace alignval;
using testsupport::fixture;
using testsupport::make_grid;
using testsupport::make_tier;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

Resources resources_for(const std::string& manifest, const std::string& out) {
    RunConfig c;
    c.manifest = manifest;
    c.output_dir = out;
    return load_resources(c);
}

std::vector<HypothesisSource> hyps_of(const testsupport::EvalCorpus& c) {
    std::vector<HypothesisSource> out;
    for (const auto& [m, d] : c.hyps) out.push_back({m, d});
    return out;
}

// Every regular file under root, relative path -> contents.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = text::read_file(e.path().string());
    return out;
}

int run_cli(const std::string& args, const std::string& env = {}) {
    const std::string cmd = fmt::format("{}\"{}\" {} >/dev/null 2>&1", env, ALIGNVAL_CLI, args);
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config JSON: round trip, relative paths, errors") {
    const auto c = RunConfig::from_json(
        R"({"manifest": "corpus/m.csv", "output_dir": "/abs/out", "flag_limit": 7, "std_range": "in-histogram-range",
            "strict": true, "workers": 3, "ignore_labels": ["sil"]})",
        "/base");
    CHECK(c.manifest == "/base/corpus/m.csv");
    CHECK(c.output_dir == "/abs/out");
    CHECK(c.flag_limit == 7);
    CHECK(c.std_range == RangeFilter::in_histogram_range);
    CHECK(c.strict);
    CHECK(c.workers == 3);
    CHECK(c.ignore_labels == std::vector<std::string>{"sil"});
    const auto back = RunConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());

    CHECK_THROWS_AS(RunConfig::from_json(R"({"manfest": "x"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(R"({"flag_threshold_ms": 0})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(R"({"std_range": "some"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(R"({"workers": "many"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json("[]"), ConfigError);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped data files equal the built-in defaults") {
    RunConfig c;
    c.class_map = testsupport::data_file("class_map.json");
    c.inventories = testsupport::data_file("inventories.json");
    c.cleaning_rules = testsupport::data_file("cleaning_rules.json");
    c.g2p_rules = testsupport::data_file("g2p_rules.json");
    c.formant_config = testsupport::data_file("formant_config.json");
    const auto res = load_resources(c);
    CHECK(res.classes.to_json() == NaturalClassMap::defaults().to_json());
    CHECK(inventories_to_json(res.inventories) == inventories_to_json(default_inventories()));
    CHECK(res.cleaning.to_json() == CleaningRules::defaults().to_json());
    CHECK(g2p_rulesets_to_json(res.g2p) == g2p_rulesets_to_json(default_g2p_rulesets()));
    CHECK(res.formant.to_json() == FormantConfig{}.to_json());

    const auto example = RunConfig::load(testsupport::data_file("example_config.json"));
    CHECK(example.class_map == c.class_map);
    CHECK(example.setting_tag == "zero-shot");
}

TEST_CASE("load_resources reports every bad file at once") {
    TempDir dir;
    text::write_file_atomic(dir / "bad_classes.json", "[]");
    text::write_file_atomic(dir / "bad_rules.json", R"({"min_word_duration": -1})");
    RunConfig c;
    c.class_map = dir / "bad_classes.json";
    c.cleaning_rules = dir / "bad_rules.json";
    c.inventories = dir / "missing.json";
    try {
        load_resources(c);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("bad_classes.json") != std::string::npos);
        CHECK(what.find("bad_rules.json") != std::string::npos);
        CHECK(what.find("missing.json") != std::string::npos);
    }
}

TEST_CASE("validate: a gapped tier is a data error") {
    std::string expected_kind;
    try {
        read_textgrid(fixture("textgrids_invalid/gap.TextGrid"));
    } catch (const Error& e) {
        expected_kind = e.kind();
    }
    REQUIRE_FALSE(expected_kind.empty());

    TempDir dir;
    text::write_file_atomic(dir / "a.wav", encode_wav(AudioBuffer{1000, std::vector<double>(1500, 0.0)}));
    text::write_file_atomic(dir / "m.csv", fmt::format("path_audio,path_textgrid,language\na.wav,{},Bardi\n",
                                                       fixture("textgrids_invalid/gap.TextGrid")));
    const auto r = cmd_validate(resources_for(dir / "m.csv", dir / "out"));
    CHECK(r.exit_code == kExitDataError);
    CHECK(r.diagnostics.count(expected_kind) == 1);
    CHECK(fs::exists(dir / "out/validation.json"));
}

TEST_CASE("validate: clean corpus passes, empty manifest warns") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.0});
    const auto ok = cmd_validate(resources_for(corpus.manifest, dir / "out"));
    CHECK(ok.exit_code == kExitOk);
    CHECK(ok.diagnostics.empty());

    text::write_file_atomic(dir / "empty.csv", "path_audio,path_textgrid,language\n");
    auto res = resources_for(dir / "empty.csv", dir / "out2");
    const auto r = cmd_validate(res);
    CHECK(r.exit_code == kExitOk);
    CHECK(r.diagnostics.count("EmptyManifest") == 1);
    res.config.strict = true;
    CHECK(cmd_validate(res).exit_code == kExitDataError);

    res.config.manifest.clear();
    CHECK_THROWS_AS(cmd_validate(res), ConfigError);
}

TEST_CASE("eval: gold against itself gives all-zero statistics") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.0});
    const auto r = cmd_eval(resources_for(corpus.manifest, dir / "out"), corpus.gold_dir, {{"self", corpus.gold_dir}});
    CHECK(r.exit_code == kExitOk);
    const auto records = diffs_from_csv(text::read_file(dir / "out/default/self/diffs.csv"));
    CHECK(records.size() == 36);  // 3 files x 12 phones, silences ignored
    for (const auto& d : records) CHECK(d.diff_ms == 0.0);
    const auto stats = text::parse_csv(text::read_file(dir / "out/default/stats.csv"));
    REQUIRE(stats.size() > 1);
    CHECK(stats[0] == std::vector<std::string>{"model", "setting", "class", "n", "mean_ms", "std_ms", "mean_abs_ms"});
    for (std::size_t i = 1; i < stats.size(); ++i) {
        CHECK(stats[i][4] == "0");
        CHECK(stats[i][5] == "0");
        CHECK(stats[i][6] == "0");
    }
    CHECK(text::read_file(dir / "out/default/self/flagged.csv").find('\n') + 1 ==
          text::read_file(dir / "out/default/self/flagged.csv").size());
}

TEST_CASE("eval: scripted offsets come back exactly") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"late", "early"}, {0.012, -0.150});
    auto res = resources_for(corpus.manifest, dir / "out");
    res.config.setting_tag = "seen";
    const auto r = cmd_eval(res, corpus.gold_dir, hyps_of(corpus));
    CHECK(r.exit_code == kExitOk);
    for (const auto& [model, want] : std::vector<std::pair<std::string, double>>{{"late", 12.0}, {"early", -150.0}}) {
        const auto records = diffs_from_csv(text::read_file(dir / fmt::format("out/seen/{}/diffs.csv", model)));
        REQUIRE(records.size() == 36);
        for (const auto& d : records) CHECK(d.diff_ms == want);
        const auto flagged = text::parse_csv(text::read_file(dir / fmt::format("out/seen/{}/flagged.csv", model)));
        CHECK(flagged.size() == (std::fabs(want) > 100.0 ? 37u : 1u));
    }
    const auto summary = text::read_file(dir / "out/seen/histogram_summary.csv");
    CHECK(summary.find("late,seen,36,36,0\n") != std::string::npos);
    CHECK(summary.find("early,seen,36,36,0\n") != std::string::npos);
    for (const char* f : {"histograms.svg", "heatmap_means.svg", "heatmap_stds.svg", "stats.json", "diagnostics.json"})
        CHECK(fs::exists(dir.path() / "out/seen" / f));
}

TEST_CASE("eval: a missing hypothesis file is skipped with a warning; strict makes it an error") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.02});
    fs::remove(fs::path(corpus.hyps[0].second) / "yid_01.TextGrid");
    auto res = resources_for(corpus.manifest, dir / "out");
    const auto r = cmd_eval(res, corpus.gold_dir, hyps_of(corpus));
    CHECK(r.exit_code == kExitOk);
    CHECK(r.diagnostics.count("MissingHypothesis") == 1);
    CHECK(diffs_from_csv(text::read_file(dir / "out/default/m/diffs.csv")).size() == 24);
    res.config.strict = true;
    CHECK(cmd_eval(res, corpus.gold_dir, hyps_of(corpus)).exit_code == kExitDataError);
}

TEST_CASE("eval: a phone with no natural class is an error and is excluded") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.0});
    for (const auto& d : {corpus.gold_dir, corpus.hyps[0].second}) {
        auto g = read_textgrid(d + "/yid_00.TextGrid");
        std::get<IntervalTier>(g.tiers[1]).intervals[1].text = "q";
        text::write_file_atomic(d + "/yid_00.TextGrid", serialize_textgrid(g));
    }
    const auto r = cmd_eval(resources_for(corpus.manifest, dir / "out"), corpus.gold_dir, hyps_of(corpus));
    CHECK(r.exit_code == kExitDataError);
    CHECK(r.diagnostics.count("UnknownPhone") == 1);
    CHECK(diffs_from_csv(text::read_file(dir / "out/default/m/diffs.csv")).size() == 35);
}

TEST_CASE("eval: configuration errors") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.0});
    const auto res = resources_for(corpus.manifest, dir / "out");
    CHECK_THROWS_AS(cmd_eval(res, corpus.gold_dir, {}), ConfigError);
    CHECK_THROWS_AS(cmd_eval(res, corpus.gold_dir, {{"m", dir / "nowhere"}}), ConfigError);
    CHECK_THROWS_AS(cmd_eval(res, corpus.gold_dir, {{"reference", corpus.gold_dir}}), ConfigError);
    CHECK_THROWS_AS(cmd_eval(res, corpus.gold_dir, {{"a/b", corpus.gold_dir}}), ConfigError);
    CHECK_THROWS_AS(cmd_eval(res, corpus.gold_dir, {{"m", corpus.gold_dir}, {"m", corpus.gold_dir}}), ConfigError);
    CHECK_THROWS_AS(cmd_eval(res, dir / "no_gold", hyps_of(corpus)), ConfigError);
}

TEST_CASE("eval is byte-identical across runs and worker counts, and leaves inputs alone") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"a", "b"}, {0.004, -0.033});
    const auto before = snapshot(dir.path() / "c");
    auto res = resources_for(corpus.manifest, dir / "run1");
    cmd_eval(res, corpus.gold_dir, hyps_of(corpus));
    res.config.output_dir = dir / "run2";
    res.config.workers = 4;
    cmd_eval(res, corpus.gold_dir, hyps_of(corpus));
    const auto one = snapshot(dir.path() / "run1"), two = snapshot(dir.path() / "run2");
    CHECK(one.size() == 12);
    CHECK(one == two);
    CHECK(snapshot(dir.path() / "c") == before);
}

TEST_CASE("report rebuilds figures from exported diff tables") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.012});
    auto res = resources_for(corpus.manifest, dir / "out");
    for (const char* setting : {"zero", "adapted"}) {
        res.config.setting_tag = setting;
        cmd_eval(res, corpus.gold_dir, hyps_of(corpus));
    }
    const auto r = cmd_report(res, {{"m", "zero", dir / "out/zero/m/diffs.csv"},
                                    {"m", "adapted", dir / "out/adapted/m/diffs.csv"}});
    CHECK(r.exit_code == kExitOk);
    // Same diffs, same statistics as the eval run produced.
    const auto eval_stats = text::parse_csv(text::read_file(dir / "out/zero/stats.csv"));
    const auto report_stats = text::parse_csv(text::read_file(dir / "out/report/stats.csv"));
    for (const auto& row : eval_stats)
        CHECK(std::find(report_stats.begin(), report_stats.end(), row) != report_stats.end());
    CHECK(fs::exists(dir / "out/report/adapted/heatmap_means.svg"));
    CHECK(FigureSpec::from_json(text::read_file(dir / "out/report/figure_spec.json")).cols ==
          std::vector<std::string>{"zero", "adapted"});

    CHECK_THROWS_AS(cmd_report(res, {}), ConfigError);
    CHECK_THROWS_AS(cmd_report(res, {{"m", "zero", dir / "missing.csv"}}), ConfigError);
    CHECK_THROWS_AS(cmd_report(res, {{"m", "z", dir / "out/zero/m/diffs.csv"}, {"m", "z", dir / "out/zero/m/diffs.csv"}}),
                    ConfigError);
}

TEST_CASE("prep and dict on the eval corpus") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.0});
    auto gold = read_textgrid(corpus.gold_dir + "/yid_02.TextGrid");
    std::get<IntervalTier>(gold.tiers[0]).intervals[1].text = "bana (laughs)";
    text::write_file_atomic(corpus.gold_dir + "/yid_02.TextGrid", serialize_textgrid(gold));

    const auto res = resources_for(corpus.manifest, dir / "out");
    const auto prep = cmd_prep(res);
    CHECK(prep.exit_code == kExitOk);
    const auto cleaned = read_textgrid(dir / "out/prep/textgrids/Yidiny/yid_02.TextGrid");
    CHECK(get_tier(cleaned, "words")->intervals[1].text == "bana");
    const auto m = read_manifest(dir / "out/prep/manifest.csv");
    REQUIRE(m.size() == 3);
    CHECK(fs::path(m[0].audio_path).is_absolute());
    CHECK(m[0].split == "test");

    const auto dict = cmd_dict(res);
    CHECK(dict.exit_code == kExitOk);
    CHECK(text::read_file(dir / "out/dictionary/wordlist.txt") == "bana\nnyiju\nraali\n");
    CHECK(parse_dictionary(text::read_file(dir / "out/dictionary/dictionary.dict")) ==
          PronunciationDictionary{{"bana", {"b", "a", "n", "a"}},
                                  {"nyiju", {"ɲ", "i", "ɟ", "u"}},
                                  {"raali", {"ɻ", "aː", "l", "i"}}});
}

TEST_CASE("dict reports languages without a g2p table") {
    TempDir dir;
    text::write_file_atomic(dir / "a.TextGrid", serialize_textgrid(make_grid({make_tier("words", {0, 1}, {"xy"})})));
    text::write_file_atomic(dir / "m.csv", "path_audio,path_textgrid,language\na.wav,a.TextGrid,Klingon\n");
    const auto r = cmd_dict(resources_for(dir / "m.csv", dir / "out"));
    CHECK(r.exit_code == kExitDataError);
    CHECK(r.diagnostics.count("NoG2PRules") == 1);
}

TEST_CASE("vowels: synthetic corpus measures gold and hypothesis tokens") {
    TempDir dir;
    std::mt19937_64 rng(3);
    const int rate = 16000;
    std::vector<double> samples(static_cast<std::size_t>(0.1 * rate), 0.0);
    const auto a = testsupport::synth_two_resonator(700, 1200, 0.2, rate, 40.0, rng);
    samples.insert(samples.end(), a.begin(), a.end());
    samples.resize(samples.size() + static_cast<std::size_t>(0.1 * rate), 0.0);
    const auto i = testsupport::synth_two_resonator(300, 2300, 0.2, rate, 40.0, rng);
    samples.insert(samples.end(), i.begin(), i.end());
    samples.resize(samples.size() + static_cast<std::size_t>(0.1 * rate), 0.0);
    text::write_file_atomic(dir / "v.wav", encode_wav(AudioBuffer{rate, samples}));
    const std::vector<double> b{0.0, 0.1, 0.3, 0.4, 0.6, 0.7};
    const auto grid = make_grid({make_tier("words", {0.0, 0.7}, {"ai"}),
                                 make_tier("phones", b, {"sil", "a", "sil", "i", "sil"})});
    fs::create_directories(dir.path() / "gold");
    fs::create_directories(dir.path() / "hyp");
    text::write_file_atomic(dir / "gold/v.TextGrid", serialize_textgrid(grid));
    auto shifted = b;
    for (std::size_t k = 1; k + 1 < shifted.size(); ++k) shifted[k] += 0.01;
    text::write_file_atomic(dir / "hyp/v.TextGrid",
                            serialize_textgrid(make_grid({make_tier("words", {0.0, 0.7}, {"ai"}),
                                                          make_tier("phones", shifted, {"sil", "a", "sil", "i", "sil"})})));
    text::write_file_atomic(dir / "m.csv", "path_audio,path_textgrid,language\nv.wav,gold/v.TextGrid,Yidiny\n");

    const auto r = cmd_vowels(resources_for(dir / "m.csv", dir / "out"), {}, {{"m1", dir / "hyp"}});
    CHECK(r.exit_code == kExitOk);
    const auto tokens = tokens_from_csv(text::read_file(dir / "out/default/vowels/tokens.csv"));
    REQUIRE(tokens.size() == 4);
    for (const auto& t : tokens) {
        CAPTURE(t.model);
        CAPTURE(t.vowel);
        const double f1 = t.vowel == "a" ? 700 : 300, f2 = t.vowel == "a" ? 1200 : 2300;
        CHECK(std::fabs(t.f1_hz - f1) / f1 < 0.1);
        CHECK(std::fabs(t.f2_hz - f2) / f2 < 0.1);
    }
    CHECK(tokens[0].model == "reference");
    CHECK(tokens[2].model == "m1");
    CHECK(fs::exists(dir / "out/default/vowels/vowel_chart_short-vowel.svg"));
}

TEST_CASE("vowels: no vowels gives an empty chart and a warning") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.0});
    auto res = resources_for(corpus.manifest, dir / "out");
    res.formant.window_length_s = 0.5;  // longer than any vowel: every token is TooShort
    const auto r = cmd_vowels(res, corpus.gold_dir, {});
    CHECK(r.diagnostics.count("NoVowels") == 1);
    CHECK(r.diagnostics.count("TooShort") > 0);
    CHECK(fs::exists(dir / "out/default/vowels/vowel_chart.svg"));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    for (unsigned workers : {1u, 2u, 7u}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
        for (const auto& h : hits) CHECK(h.load() == 1);
        CHECK_THROWS_AS(parallel_for(100, workers,
                                     [](std::size_t i) {
                                         if (i == 42) throw std::runtime_error("boom");
                                     }),
                        std::runtime_error);
    }
}

TEST_CASE("command-line exit codes") {
    TempDir dir;
    const auto corpus = testsupport::write_eval_corpus(dir.path() / "c", {"m"}, {0.0});
    CHECK(run_cli("") == kExitConfigError);
    CHECK(run_cli("frobnicate") == kExitConfigError);
    CHECK(run_cli("--help") == kExitOk);
    CHECK(run_cli(fmt::format("validate --manifest \"{}\" --out \"{}\"", corpus.manifest, dir / "o")) == kExitOk);
    CHECK(run_cli(fmt::format("validate --manifest \"{}\"", dir / "none.csv")) == kExitConfigError);
    CHECK(run_cli(fmt::format("eval --manifest \"{}\" --out \"{}\" --hyp nodir", corpus.manifest, dir / "o")) ==
          kExitConfigError);
    CHECK(run_cli(fmt::format("eval --manifest \"{}\" --out \"{}\" --gold \"{}\" --hyp m=\"{}\"", corpus.manifest,
                              dir / "o", corpus.gold_dir, corpus.hyps[0].second)) == kExitOk);
    CHECK(fs::exists(dir / "o/default/m/diffs.csv"));

    fs::remove(fs::path(corpus.hyps[0].second) / "yid_00.TextGrid");
    const auto eval = fmt::format("eval --manifest \"{}\" --out \"{}\" --gold \"{}\" --hyp m=\"{}\"", corpus.manifest,
                                  dir / "o", corpus.gold_dir, corpus.hyps[0].second);
    CHECK(run_cli(eval) == kExitOk);
    CHECK(run_cli(eval + " --strict") == kExitDataError);

    text::write_file_atomic(dir / "cfg.json", R"({"strict": true})");
    CHECK(run_cli(eval, fmt::format("{}=\"{}\" ", kConfigEnvVar, dir / "cfg.json")) == kExitDataError);
    text::write_file_atomic(dir / "bad.json", R"({"strict": "yes please"})");
    CHECK(run_cli(eval, fmt::format("{}=\"{}\" ", kConfigEnvVar, dir / "bad.json")) == kExitConfigError);

    CHECK(run_cli(fmt::format("defaults --out \"{}\"", dir / "d")) == kExitOk);
    CHECK(text::read_file(dir / "d/class_map.json") == text::read_file(testsupport::data_file("class_map.json")));
}
