#include "alignval/pipeline.hpp"

#include "alignval/audio.hpp"
#include "alignval/report.hpp"
#include "alignval/text.hpp"
#include "alignval/textgrid.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

namespace alignval {

namespace fs = std::filesystem;
using nlohmann::json;

// ------------------------------------------------------------------ config

namespace {

std::string std_range_name(RangeFilter r) {
    return r == RangeFilter::include_all ? "include-all" : "in-histogram-range";
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

void check_tag(const std::string& what, const std::string& tag) {
    if (tag.empty()) throw ConfigError(fmt::format("{} must not be empty", what));
    if (tag.find_first_of("/\\") != std::string::npos || tag == "." || tag == "..")
        throw ConfigError(fmt::format("{} '{}' cannot be used as a directory name", what, tag));
}

}  // namespace

RunConfig RunConfig::from_json(std::string_view doc, const std::string& base_dir) {
    static const std::set<std::string> known{
        "manifest",      "word_tier",        "phone_tier", "cleaning_rules",       "class_map",
        "g2p_rules",     "inventories",      "formant_config", "output_dir",       "model_tag",
        "setting_tag",   "flag_threshold_ms", "flag_limit", "std_range", "ellipse_axis_multiplier",
        "ignore_labels", "strict",           "workers"};
    RunConfig c;
    try {
        const json j = json::parse(doc);
        if (!j.is_object()) throw ConfigError("run config must be a JSON object");
        for (const auto& [key, value] : j.items())
            if (!known.count(key)) throw ConfigError(fmt::format("unknown run config key '{}'", key));
        const auto path = [&](const char* key, std::string& field) {
            if (j.contains(key)) field = resolve(j.at(key).get<std::string>(), base_dir);
        };
        path("manifest", c.manifest);
        path("cleaning_rules", c.cleaning_rules);
        path("class_map", c.class_map);
        path("g2p_rules", c.g2p_rules);
        path("inventories", c.inventories);
        path("formant_config", c.formant_config);
        path("output_dir", c.output_dir);
        c.word_tier = j.value("word_tier", c.word_tier);
        c.phone_tier = j.value("phone_tier", c.phone_tier);
        c.model_tag = j.value("model_tag", c.model_tag);
        c.setting_tag = j.value("setting_tag", c.setting_tag);
        c.flag_threshold_ms = j.value("flag_threshold_ms", c.flag_threshold_ms);
        c.flag_limit = j.value("flag_limit", c.flag_limit);
        c.ellipse_axis_multiplier = j.value("ellipse_axis_multiplier", c.ellipse_axis_multiplier);
        c.ignore_labels = j.value("ignore_labels", c.ignore_labels);
        c.strict = j.value("strict", c.strict);
        c.workers = j.value("workers", c.workers);
        if (j.contains("std_range")) {
            const auto r = j.at("std_range").get<std::string>();
            if (r == "include-all") c.std_range = RangeFilter::include_all;
            else if (r == "in-histogram-range") c.std_range = RangeFilter::in_histogram_range;
            else throw ConfigError(fmt::format("std_range '{}' is not include-all or in-histogram-range", r));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    if (!(c.flag_threshold_ms > 0.0)) throw ConfigError("flag_threshold_ms must be positive");
    if (!(c.ellipse_axis_multiplier > 0.0)) throw ConfigError("ellipse_axis_multiplier must be positive");
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::string doc;
    try {
        doc = text::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return from_json(doc, fs::path(path).parent_path().string());
}

std::string RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["manifest"] = manifest;
    j["word_tier"] = word_tier;
    j["phone_tier"] = phone_tier;
    j["cleaning_rules"] = cleaning_rules;
    j["class_map"] = class_map;
    j["g2p_rules"] = g2p_rules;
    j["inventories"] = inventories;
    j["formant_config"] = formant_config;
    j["output_dir"] = output_dir;
    j["model_tag"] = model_tag;
    j["setting_tag"] = setting_tag;
    j["flag_threshold_ms"] = flag_threshold_ms;
    j["flag_limit"] = flag_limit;
    j["std_range"] = std_range_name(std_range);
    j["ellipse_axis_multiplier"] = ellipse_axis_multiplier;
    j["ignore_labels"] = ignore_labels;
    j["strict"] = strict;
    j["workers"] = workers;
    return j.dump(2) + "\n";
}

Resources load_resources(const RunConfig& config) {
    Resources res;
    res.config = config;
    res.cleaning = CleaningRules::defaults();
    res.classes = NaturalClassMap::defaults();
    res.g2p = default_g2p_rulesets();
    res.inventories = default_inventories();
    res.labels.ignore = {config.ignore_labels.begin(), config.ignore_labels.end()};

    std::vector<std::string> problems;
    const auto load = [&](const std::string& path, const char* what, auto&& parse) {
        if (path.empty()) return;
        try {
            parse(text::read_file(path));
        } catch (const Error& e) {
            problems.push_back(fmt::format("{} '{}': {}", what, path, e.what()));
        }
    };
    load(config.cleaning_rules, "cleaning rules", [&](const std::string& d) { res.cleaning = CleaningRules::from_json(d); });
    load(config.class_map, "class map", [&](const std::string& d) { res.classes = NaturalClassMap::from_json(d); });
    load(config.g2p_rules, "g2p rules", [&](const std::string& d) { res.g2p = g2p_rulesets_from_json(d); });
    load(config.inventories, "inventories", [&](const std::string& d) { res.inventories = inventories_from_json(d); });
    load(config.formant_config, "formant config", [&](const std::string& d) { res.formant = FormantConfig::from_json(d); });
    if (!config.manifest.empty() && !fs::is_regular_file(config.manifest))
        problems.push_back(fmt::format("manifest '{}' does not exist", config.manifest));
    try {
        res.classes.check_covers(res.inventories);
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }
    try {
        res.formant.validate();
        check_tag("model tag", config.model_tag);
        check_tag("setting tag", config.setting_tag);
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }
    if (config.workers == 0) problems.push_back("workers must be at least 1");
    if (!problems.empty()) {
        std::string msg = "configuration errors:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return res;
}

// --------------------------------------------------------------- utilities

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    const auto threads = static_cast<std::size_t>(std::max(1u, workers));
    if (threads == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

void print_diagnostics(std::ostream& os, const Diagnostics& diag) {
    for (const auto& d : diag.entries()) {
        os << to_string(d.severity) << ": " << d.code;
        if (!d.file.empty()) os << " [" << d.file << "]";
        os << ": " << d.message << '\n';
    }
}

std::string diagnostics_to_json(const Diagnostics& diag) {
    nlohmann::ordered_json j;
    j["errors"] = diag.count(Severity::error);
    j["warnings"] = diag.count(Severity::warning);
    auto& arr = j["entries"] = nlohmann::ordered_json::array();
    for (const auto& d : diag.entries())
        arr.push_back({{"severity", std::string(to_string(d.severity))},
                       {"code", d.code},
                       {"file", d.file},
                       {"message", d.message}});
    return j.dump(2) + "\n";
}

namespace {

// Per-item diagnostics merged in input order keep the output deterministic
// under any worker count.
void merge_in_order(Diagnostics& into, const std::vector<Diagnostics>& parts) {
    for (const auto& p : parts) into.append(p);
}

void emit(CommandResult& result, const fs::path& path, std::string_view contents) {
    text::write_file_atomic(path.string(), contents);
    result.outputs.push_back(path.string());
}

int finish(CommandResult& result, bool strict) {
    if (result.diagnostics.has_errors() || (strict && result.diagnostics.count(Severity::warning) > 0))
        result.exit_code = kExitDataError;
    return result.exit_code;
}

std::vector<ManifestEntry> load_manifest(const RunConfig& config) {
    if (config.manifest.empty()) throw ConfigError("no manifest given (--manifest or \"manifest\" in the config)");
    return read_manifest(config.manifest);
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void report_error(Diagnostics& diag, const Error& e, const std::string& file) {
    diag.error(std::string(e.kind()), e.what(), file);
}

std::vector<HypothesisSource> checked_hyps(const std::vector<HypothesisSource>& hyps, bool required) {
    if (required && hyps.empty()) throw ConfigError("at least one --hyp MODEL=DIR is required");
    std::set<std::string> seen;
    for (const auto& h : hyps) {
        check_tag("model name", h.model);
        if (h.model == "reference") throw ConfigError("model name 'reference' is reserved for the gold series");
        if (!seen.insert(h.model).second) throw ConfigError(fmt::format("model '{}' given twice", h.model));
        if (!fs::is_directory(h.dir))
            throw ConfigError(fmt::format("hypothesis directory '{}' for model '{}' does not exist", h.dir, h.model));
    }
    return hyps;
}

std::string gold_path(const ManifestEntry& e, const std::string& gold_dir) {
    if (gold_dir.empty()) return e.textgrid_path;
    return (fs::path(gold_dir) / fs::path(e.textgrid_path).filename()).string();
}

std::string hyp_path(const ManifestEntry& e, const HypothesisSource& h) {
    return (fs::path(h.dir) / fs::path(e.textgrid_path).filename()).string();
}

struct LoadedGrid {
    std::optional<TextGrid> grid;
    Diagnostics diag;
};

std::vector<LoadedGrid> load_gold(const Resources& res, const std::vector<ManifestEntry>& entries,
                                  const std::string& gold_dir) {
    std::vector<LoadedGrid> out(entries.size());
    parallel_for(entries.size(), res.config.workers, [&](std::size_t i) {
        const auto path = gold_path(entries[i], gold_dir);
        try {
            out[i].grid = read_textgrid(path);
        } catch (const Error& e) {
            report_error(out[i].diag, e, path);
        }
    });
    return out;
}

std::vector<std::string> classes_present(const NaturalClassMap& classes, std::span<const DiffStats> stats) {
    std::set<std::string> seen;
    for (const auto& s : stats) seen.insert(s.cls);
    std::vector<std::string> out;
    for (const auto& label : classes.labels())
        if (seen.count(label)) out.push_back(label);
    return out;
}

void write_heatmaps(CommandResult& result, const fs::path& dir, std::span<const DiffStats> class_stats,
                    const std::vector<std::string>& models, const std::vector<std::string>& class_order,
                    const std::string& setting) {
    for (auto kind : {FigureKind::heatmap_means, FigureKind::heatmap_stds}) {
        FigureSpec spec;
        spec.kind = kind;
        spec.cols = models;
        spec.classes = class_order;
        spec.title = fmt::format("{}: {} of onset diffs (ms)", setting,
                                 kind == FigureKind::heatmap_means ? "mean" : "standard deviation");
        emit(result, dir / fmt::format("{}.svg", to_string(kind)), render_heatmap(class_stats, spec));
    }
}

}  // namespace

// ---------------------------------------------------------------- validate

CommandResult cmd_validate(const Resources& res) {
    CommandResult result;
    const auto entries = load_manifest(res.config);
    if (entries.empty()) result.diagnostics.warn("EmptyManifest", "manifest lists no files", res.config.manifest);

    std::vector<Diagnostics> parts(entries.size());
    parallel_for(entries.size(), res.config.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        auto& diag = parts[i];
        std::optional<double> grid_end;
        try {
            const auto grid = read_textgrid(e.textgrid_path);
            grid_end = grid.xmax;
            for (const auto& name : {res.config.word_tier, res.config.phone_tier})
                if (!get_tier(grid, name, &diag))
                    diag.warn("MissingTier", fmt::format("no interval tier named '{}'", name), e.textgrid_path);
        } catch (const Error& err) {
            report_error(diag, err, e.textgrid_path);
        }
        try {
            const auto info = probe_wav_file(e.audio_path);
            if (grid_end && std::fabs(*grid_end - info.duration()) > 0.01)
                diag.warn("DurationMismatch",
                          fmt::format("TextGrid ends at {} s, audio lasts {} s", text::format_real(*grid_end),
                                      text::format_real(info.duration())),
                          e.textgrid_path);
        } catch (const Error& err) {
            report_error(diag, err, e.audio_path);
        }
    });
    merge_in_order(result.diagnostics, parts);
    const fs::path out = res.config.output_dir;
    emit(result, out / "validation.json", diagnostics_to_json(result.diagnostics));
    finish(result, res.config.strict);
    return result;
}

// -------------------------------------------------------------------- prep

CommandResult cmd_prep(const Resources& res) {
    CommandResult result;
    const auto entries = load_manifest(res.config);
    if (entries.empty()) result.diagnostics.warn("EmptyManifest", "manifest lists no files", res.config.manifest);
    const fs::path dir = fs::path(res.config.output_dir) / "prep";

    // Output names must be unique per language.
    std::map<std::string, std::size_t> claimed;
    std::vector<bool> duplicate(entries.size(), false);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto rel = (fs::path("textgrids") / entries[i].language / fs::path(entries[i].textgrid_path).filename()).string();
        if (!claimed.emplace(rel, i).second) duplicate[i] = true;
    }

    std::vector<Diagnostics> parts(entries.size());
    std::vector<std::optional<std::string>> cleaned(entries.size());
    parallel_for(entries.size(), res.config.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        if (duplicate[i]) {
            parts[i].error("DuplicateFile", "another manifest row already writes this file name for the language",
                           e.textgrid_path);
            return;
        }
        try {
            auto grid = read_textgrid(e.textgrid_path);
            bool found = false;
            for (auto& tier : grid.tiers) {
                auto* it = std::get_if<IntervalTier>(&tier);
                if (!it || it->name != res.config.word_tier) continue;
                *it = filter_short_words(clean_tier(*it, res.cleaning), res.cleaning.min_word_duration());
                found = true;
                break;
            }
            if (!found)
                parts[i].warn("MissingTier", fmt::format("no interval tier named '{}'; copied unchanged", res.config.word_tier),
                              e.textgrid_path);
            cleaned[i] = serialize_textgrid(grid);
            probe_wav_file(e.audio_path);
        } catch (const Error& err) {
            report_error(parts[i], err, e.textgrid_path);
            cleaned[i].reset();
        }
    });
    merge_in_order(result.diagnostics, parts);

    std::vector<ManifestEntry> kept, kept_resolved;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!cleaned[i]) continue;
        const auto& e = entries[i];
        const auto rel = fs::path("textgrids") / e.language / fs::path(e.textgrid_path).filename();
        emit(result, dir / rel, *cleaned[i]);
        const auto audio = fs::absolute(e.audio_path).lexically_normal().string();
        kept.push_back({audio, rel.generic_string(), e.language, e.split});
        kept_resolved.push_back({audio, (dir / rel).string(), e.language, e.split});
    }
    emit(result, dir / "manifest.csv", serialize_manifest(kept));

    auto summary = assemble_dataset(kept_resolved);
    for (const auto& d : result.diagnostics.entries())
        if (d.severity == Severity::error) summary.errors.push_back({d.file, d.code, d.message});
    emit(result, dir / "summary.json", summary.to_json());
    emit(result, dir / "diagnostics.json", diagnostics_to_json(result.diagnostics));
    finish(result, res.config.strict);
    return result;
}

// -------------------------------------------------------------------- dict

CommandResult cmd_dict(const Resources& res) {
    CommandResult result;
    const auto entries = load_manifest(res.config);
    std::vector<Diagnostics> parts(entries.size());
    std::vector<std::optional<IntervalTier>> tiers(entries.size());
    parallel_for(entries.size(), res.config.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        try {
            const auto grid = read_textgrid(e.textgrid_path);
            if (const auto* t = get_tier(grid, res.config.word_tier, &parts[i]))
                tiers[i] = clean_tier(*t, res.cleaning);
            else
                parts[i].warn("MissingTier", fmt::format("no interval tier named '{}'", res.config.word_tier),
                              e.textgrid_path);
        } catch (const Error& err) {
            report_error(parts[i], err, e.textgrid_path);
        }
    });
    merge_in_order(result.diagnostics, parts);

    std::map<std::string, std::vector<IntervalTier>> by_language;
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (tiers[i]) by_language[entries[i].language].push_back(*tiers[i]);

    PronunciationDictionary dict;
    std::set<std::string> all_words;
    auto& diag = result.diagnostics;
    for (const auto& [language, lang_tiers] : by_language) {
        const auto words = build_wordlist(lang_tiers);
        all_words.insert(words.begin(), words.end());
        const auto* rules = find_ruleset(res.g2p, language);
        if (!rules) {
            diag.error("NoG2PRules", fmt::format("no g2p table for language '{}'", language), language);
            continue;
        }
        PronunciationDictionary local;
        for (const auto& w : words) {
            auto g = apply_g2p(w, *rules);
            if (!g.unmapped.empty()) {
                std::string list;
                for (const auto& u : g.unmapped) list += (list.empty() ? "" : " ") + u;
                diag.warn("UnmappedGrapheme", fmt::format("word '{}': skipped {}", w, list), language);
            }
            if (g.phones.empty()) {
                diag.warn("EmptyPronunciation", fmt::format("word '{}' produced no phones", w), language);
                continue;
            }
            local.emplace(w, std::move(g.phones));
        }
        if (const auto* inv = find_inventory(res.inventories, language)) {
            Diagnostics check;
            validate_dictionary(local, *inv, check);
            for (const auto& d : check.entries()) diag.add(d.severity, d.code, d.message, language);
        } else {
            diag.warn("NoInventory", fmt::format("no phone inventory for language '{}'; phones not checked", language),
                      language);
        }
        for (auto& [w, phones] : local) {
            const auto [it, inserted] = dict.emplace(w, phones);
            if (!inserted && it->second != phones)
                diag.warn("ConflictingPronunciation",
                          fmt::format("word '{}' already has a pronunciation from an earlier language", w), language);
        }
    }
    if (all_words.empty()) diag.warn("EmptyWordlist", "no words found; dictionary is empty", res.config.manifest);

    const fs::path dir = fs::path(res.config.output_dir) / "dictionary";
    std::string wordlist;
    for (const auto& w : all_words) wordlist += w + "\n";
    emit(result, dir / "wordlist.txt", wordlist);
    emit(result, dir / "dictionary.dict", serialize_dictionary(dict));
    emit(result, dir / "diagnostics.json", diagnostics_to_json(diag));
    finish(result, res.config.strict);
    return result;
}

// -------------------------------------------------------------------- eval

CommandResult cmd_eval(const Resources& res, const std::string& gold_dir, const std::vector<HypothesisSource>& hyps_in) {
    CommandResult result;
    const auto hyps = checked_hyps(hyps_in, true);
    if (!gold_dir.empty() && !fs::is_directory(gold_dir))
        throw ConfigError(fmt::format("gold directory '{}' does not exist", gold_dir));
    const auto entries = load_manifest(res.config);
    if (entries.empty()) result.diagnostics.warn("EmptyManifest", "manifest lists no files", res.config.manifest);
    const auto& cfg = res.config;
    auto& diag = result.diagnostics;

    const auto gold = load_gold(res, entries, gold_dir);
    for (const auto& g : gold) diag.append(g.diag);

    const fs::path setting_dir = fs::path(cfg.output_dir) / cfg.setting_tag;
    std::vector<std::string> models;
    std::vector<DiffStats> class_stats, all_stats;
    HistogramMatrix hist;

    for (const auto& h : hyps) {
        models.push_back(h.model);
        std::vector<Diagnostics> parts(entries.size());
        std::vector<MatchResult> matches(entries.size());
        parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
            if (!gold[i].grid) return;
            const auto& e = entries[i];
            const auto path = hyp_path(e, h);
            const auto file = stem_of(e.textgrid_path);
            if (!fs::exists(path)) {
                parts[i].warn("MissingHypothesis", fmt::format("model '{}' has no {}; skipped", h.model,
                                                               fs::path(path).filename().string()), path);
                return;
            }
            try {
                const auto hyp = read_textgrid(path);
                const auto* gp = get_tier(*gold[i].grid, cfg.phone_tier, &parts[i]);
                const auto* hp = get_tier(hyp, cfg.phone_tier, &parts[i]);
                if (!gp || !hp) {
                    parts[i].error("MissingTier", fmt::format("no interval tier named '{}'", cfg.phone_tier),
                                   gp ? path : gold_path(e, gold_dir));
                    return;
                }
                const auto* gw = get_tier(*gold[i].grid, cfg.word_tier, nullptr);
                matches[i] = match_tiers(*gp, *hp, gw, file, res.labels);
                matches[i].report(parts[i], path);
            } catch (const Error& err) {
                report_error(parts[i], err, path);
            }
        });
        merge_in_order(diag, parts);

        std::vector<AlignmentPair> pairs;
        std::set<std::string> unknown;
        for (auto& m : matches)
            for (auto& p : m.pairs) {
                if (!res.classes.find(p.phone)) {
                    if (unknown.insert(p.phone).second)
                        diag.error("UnknownPhone",
                                   fmt::format("phone '{}' (first seen in {}) has no natural class; excluded", p.phone,
                                               p.file),
                                   h.model);
                    continue;
                }
                pairs.push_back(std::move(p));
            }
        const auto diffs = onset_diffs(pairs);
        const fs::path model_dir = setting_dir / h.model;
        emit(result, model_dir / "diffs.csv", diffs_to_csv(diffs, res.classes));
        emit(result, model_dir / "flagged.csv",
             flagged_to_csv(flag_misalignments(pairs, cfg.flag_threshold_ms, cfg.flag_limit)));

        GroupingSpec spec{h.model, cfg.setting_tag, true, false, cfg.std_range};
        const auto by_class = aggregate(diffs, res.classes, spec);
        class_stats.insert(class_stats.end(), by_class.begin(), by_class.end());
        spec.by_class = false;
        const auto overall = aggregate(diffs, res.classes, spec);
        all_stats.insert(all_stats.end(), overall.begin(), overall.end());
        hist.push_back({histogram(diffs)});
    }

    std::vector<DiffStats> table;
    for (const auto& m : models) {
        for (const auto& s : class_stats)
            if (s.model == m) table.push_back(s);
        for (const auto& s : all_stats)
            if (s.model == m) table.push_back(s);
    }
    emit(result, setting_dir / "stats.csv", stats_to_csv(table));
    emit(result, setting_dir / "stats.json", stats_to_json(table, cfg.std_range));

    FigureSpec grid;
    grid.kind = FigureKind::histogram_grid;
    grid.rows = models;
    grid.cols = {cfg.setting_tag};
    emit(result, setting_dir / "histograms.svg", render_histogram_grid(hist, grid));
    emit(result, setting_dir / "histograms.csv", histograms_to_csv(hist, grid));
    emit(result, setting_dir / "histogram_summary.csv", histogram_summary_csv(hist, grid));
    write_heatmaps(result, setting_dir, class_stats, models, classes_present(res.classes, class_stats), cfg.setting_tag);
    emit(result, setting_dir / "diagnostics.json", diagnostics_to_json(diag));
    finish(result, cfg.strict);
    return result;
}

// ------------------------------------------------------------------ vowels

CommandResult cmd_vowels(const Resources& res, const std::string& gold_dir,
                         const std::vector<HypothesisSource>& hyps_in) {
    CommandResult result;
    const auto hyps = checked_hyps(hyps_in, false);
    if (!gold_dir.empty() && !fs::is_directory(gold_dir))
        throw ConfigError(fmt::format("gold directory '{}' does not exist", gold_dir));
    const auto entries = load_manifest(res.config);
    const auto& cfg = res.config;
    auto& diag = result.diagnostics;

    // series 0 is the reference, then one per hypothesis
    const std::size_t n_series = hyps.size() + 1;
    std::vector<Diagnostics> parts(entries.size());
    std::vector<std::vector<std::vector<VowelToken>>> tokens(entries.size(), std::vector<std::vector<VowelToken>>(n_series));
    parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        const auto file = stem_of(e.textgrid_path);
        AudioBuffer audio;
        try {
            audio = read_wav_file(e.audio_path);
        } catch (const Error& err) {
            report_error(parts[i], err, e.audio_path);
            return;
        }
        for (std::size_t s = 0; s < n_series; ++s) {
            const auto path = s == 0 ? gold_path(e, gold_dir) : hyp_path(e, hyps[s - 1]);
            const std::string model = s == 0 ? "reference" : hyps[s - 1].model;
            if (s > 0 && !fs::exists(path)) {
                parts[i].warn("MissingHypothesis", fmt::format("model '{}' has no {}; skipped", model,
                                                               fs::path(path).filename().string()), path);
                continue;
            }
            try {
                const auto grid = read_textgrid(path);
                const auto* tier = get_tier(grid, cfg.phone_tier, &parts[i]);
                if (!tier) {
                    parts[i].error("MissingTier", fmt::format("no interval tier named '{}'", cfg.phone_tier), path);
                    continue;
                }
                for (const auto& iv : tier->intervals) {
                    const auto label = normalize_label(iv.text, res.labels);
                    const auto* cls = label.empty() ? nullptr : res.classes.find(label);
                    if (!cls || !res.classes.is_vowel_class(*cls)) continue;
                    Interval vowel = iv;
                    vowel.text = label;
                    try {
                        auto t = measure_vowel(audio, vowel, res.formant);
                        t.file = file;
                        t.model = model;
                        tokens[i][s].push_back(std::move(t));
                    } catch (const AnalysisError& err) {
                        parts[i].warn(std::string(err.kind()),
                                      fmt::format("'{}' at {} s: {}", label, text::format_real(iv.xmin), err.what()), path);
                    }
                }
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& err) {
                report_error(parts[i], err, path);
            }
        }
    });
    merge_in_order(diag, parts);

    std::vector<VowelToken> gold_tokens, model_tokens;
    for (std::size_t s = 0; s < n_series; ++s)
        for (std::size_t i = 0; i < entries.size(); ++i)
            for (const auto& t : tokens[i][s]) (s == 0 ? gold_tokens : model_tokens).push_back(t);

    const auto gold_ellipses = build_ellipses(gold_tokens);
    const auto model_ellipses = build_ellipses(model_tokens);

    const fs::path dir = fs::path(cfg.output_dir) / cfg.setting_tag / "vowels";
    std::vector<VowelToken> all = gold_tokens;
    all.insert(all.end(), model_tokens.begin(), model_tokens.end());
    std::vector<VowelEllipse> all_ellipses = gold_ellipses;
    all_ellipses.insert(all_ellipses.end(), model_ellipses.begin(), model_ellipses.end());
    emit(result, dir / "tokens.csv", tokens_to_csv(all));
    emit(result, dir / "ellipses.csv", ellipses_to_csv(all_ellipses));

    VowelChartOptions options;
    options.style.ellipse_axis_multiplier = cfg.ellipse_axis_multiplier;
    for (const auto& h : hyps) options.model_order.push_back(h.model);

    if (all.empty()) {
        diag.warn("NoVowels", "no vowel intervals were measured; chart is empty", cfg.manifest);
        options.title = cfg.setting_tag;
        emit(result, dir / "vowel_chart.svg", render_vowel_chart({}, {}, options));
    } else {
        for (const auto& label : res.classes.labels()) {
            if (!res.classes.is_vowel_class(label)) continue;
            const auto in_class = [&](const VowelEllipse& e) {
                const auto* c = res.classes.find(e.vowel);
                return c && *c == label;
            };
            std::vector<VowelEllipse> g, m;
            std::copy_if(gold_ellipses.begin(), gold_ellipses.end(), std::back_inserter(g), in_class);
            std::copy_if(model_ellipses.begin(), model_ellipses.end(), std::back_inserter(m), in_class);
            if (g.empty() && m.empty()) continue;
            options.title = fmt::format("{}: {}", cfg.setting_tag, label);
            emit(result, dir / fmt::format("vowel_chart_{}.svg", label), render_vowel_chart(m, g, options));
        }
    }
    emit(result, dir / "diagnostics.json", diagnostics_to_json(diag));
    finish(result, cfg.strict);
    return result;
}

// ------------------------------------------------------------------ report

CommandResult cmd_report(const Resources& res, const std::vector<ReportInput>& inputs) {
    CommandResult result;
    if (inputs.empty()) throw ConfigError("at least one --input MODEL:SETTING=diffs.csv is required");
    std::vector<std::string> models, settings;
    std::map<std::pair<std::string, std::string>, std::vector<DiffRecord>> tables;
    for (const auto& in : inputs) {
        check_tag("model name", in.model);
        check_tag("setting name", in.setting);
        std::string doc;
        try {
            doc = text::read_file(in.diffs_csv);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        auto records = diffs_from_csv(doc);
        if (!tables.emplace(std::make_pair(in.model, in.setting), std::move(records)).second)
            throw ConfigError(fmt::format("model '{}' setting '{}' given twice", in.model, in.setting));
        if (std::find(models.begin(), models.end(), in.model) == models.end()) models.push_back(in.model);
        if (std::find(settings.begin(), settings.end(), in.setting) == settings.end()) settings.push_back(in.setting);
    }

    const fs::path dir = fs::path(res.config.output_dir) / "report";
    const auto& order = res.classes.labels();
    HistogramMatrix hist(models.size());
    std::vector<DiffStats> table;
    for (std::size_t i = 0; i < models.size(); ++i)
        for (const auto& setting : settings) {
            const auto it = tables.find({models[i], setting});
            std::vector<double> values;
            if (it != tables.end())
                for (const auto& r : it->second) values.push_back(r.diff_ms);
            hist[i].push_back(histogram(values));
        }
    for (const auto& setting : settings) {
        std::vector<DiffStats> class_stats;
        std::vector<std::string> setting_models;
        for (const auto& model : models) {
            const auto it = tables.find({model, setting});
            if (it == tables.end()) continue;
            setting_models.push_back(model);
            GroupingSpec spec{model, setting, true, false, res.config.std_range};
            const auto by_class = aggregate(it->second, order, spec);
            spec.by_class = false;
            const auto overall = aggregate(it->second, order, spec);
            class_stats.insert(class_stats.end(), by_class.begin(), by_class.end());
            table.insert(table.end(), by_class.begin(), by_class.end());
            table.insert(table.end(), overall.begin(), overall.end());
        }
        std::vector<std::string> present;
        std::set<std::string> seen;
        for (const auto& s : class_stats) seen.insert(s.cls);
        for (const auto& c : order)
            if (seen.count(c)) present.push_back(c);
        write_heatmaps(result, dir / setting, class_stats, setting_models, present, setting);
    }
    FigureSpec grid;
    grid.kind = FigureKind::histogram_grid;
    grid.rows = models;
    grid.cols = settings;
    emit(result, dir / "histograms.svg", render_histogram_grid(hist, grid));
    emit(result, dir / "histograms.csv", histograms_to_csv(hist, grid));
    emit(result, dir / "histogram_summary.csv", histogram_summary_csv(hist, grid));
    emit(result, dir / "stats.csv", stats_to_csv(table));
    emit(result, dir / "stats.json", stats_to_json(table, res.config.std_range));
    emit(result, dir / "figure_spec.json", grid.to_json());
    finish(result, res.config.strict);
    return result;
}

// ---------------------------------------------------------------- defaults

CommandResult cmd_defaults(const RunConfig& config) {
    CommandResult result;
    const fs::path dir = config.output_dir;
    emit(result, dir / "class_map.json", NaturalClassMap::defaults().to_json());
    emit(result, dir / "inventories.json", inventories_to_json(default_inventories()));
    emit(result, dir / "cleaning_rules.json", CleaningRules::defaults().to_json());
    emit(result, dir / "g2p_rules.json", g2p_rulesets_to_json(default_g2p_rulesets()));
    emit(result, dir / "formant_config.json", FormantConfig{}.to_json());
    return result;
}

}  // namespace alignval
