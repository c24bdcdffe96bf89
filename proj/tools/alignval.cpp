// alignval: forced-alignment evaluation over a manifest-driven corpus.
//
//   alignval validate --manifest m.csv
//   alignval prep     --manifest m.csv --out out
//   alignval dict     --manifest m.csv --out out
//   alignval eval     --manifest m.csv --gold gold/ --hyp eng=hyp/eng --hyp scratch=hyp/scratch
//   alignval vowels   --manifest m.csv --gold gold/ --hyp eng=hyp/eng
//   alignval report   --input eng:seen=out/seen/eng/diffs.csv ...
//   alignval defaults --out data/
//
// Exit status: 0 success, 1 data errors, 2 configuration errors.

#include "alignval/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

using namespace alignval;

struct Options {
    std::string config_path;
    std::string manifest, out, model_tag, setting_tag, word_tier, phone_tier;
    std::string gold_dir;
    std::vector<std::string> hyps, inputs;
    bool strict = false;
    unsigned workers = 0;
    double axis_multiplier = 0.0;
    std::string std_range;
    double central_fraction = 0.0;
};

RunConfig build_config(const Options& o) {
    RunConfig c;
    std::string path = o.config_path;
    if (path.empty())
        if (const char* env = std::getenv(kConfigEnvVar)) path = env;
    if (!path.empty()) c = RunConfig::load(path);
    if (!o.manifest.empty()) c.manifest = o.manifest;
    if (!o.out.empty()) c.output_dir = o.out;
    if (!o.model_tag.empty()) c.model_tag = o.model_tag;
    if (!o.setting_tag.empty()) c.setting_tag = o.setting_tag;
    if (!o.word_tier.empty()) c.word_tier = o.word_tier;
    if (!o.phone_tier.empty()) c.phone_tier = o.phone_tier;
    if (o.strict) c.strict = true;
    if (o.workers > 0) c.workers = o.workers;
    if (o.axis_multiplier > 0.0) c.ellipse_axis_multiplier = o.axis_multiplier;
    if (o.std_range == "include-all") c.std_range = RangeFilter::include_all;
    else if (o.std_range == "in-histogram-range") c.std_range = RangeFilter::in_histogram_range;
    return c;
}

std::vector<HypothesisSource> parse_hyps(const std::vector<std::string>& specs) {
    std::vector<HypothesisSource> out;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
            throw ConfigError("--hyp expects MODEL=DIR, got '" + s + "'");
        out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    return out;
}

std::vector<ReportInput> parse_inputs(const std::vector<std::string>& specs) {
    std::vector<ReportInput> out;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        const auto colon = s.find(':');
        if (eq == std::string::npos || colon == std::string::npos || colon == 0 || colon + 1 >= eq || eq + 1 == s.size())
            throw ConfigError("--input expects MODEL:SETTING=diffs.csv, got '" + s + "'");
        out.push_back({s.substr(0, colon), s.substr(colon + 1, eq - colon - 1), s.substr(eq + 1)});
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forced-alignment evaluation toolkit"};
    app.require_subcommand(1);
    Options o;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, std::string("Run config JSON (default: $") + kConfigEnvVar + ")");
        sub->add_option("--manifest", o.manifest, "Corpus manifest CSV");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--model-tag", o.model_tag, "Model tag for single-model outputs");
        sub->add_option("--setting-tag", o.setting_tag, "Testing-setting tag (output subdirectory)");
        sub->add_option("--word-tier", o.word_tier, "Name of the word tier");
        sub->add_option("--phone-tier", o.phone_tier, "Name of the phone tier");
        sub->add_flag("--strict", o.strict, "Treat warnings (e.g. missing hypothesis files) as data errors");
        sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 256u));
    };

    auto* validate = app.add_subcommand("validate", "Parse every TextGrid and WAV in the manifest");
    auto* prep = app.add_subcommand("prep", "Clean transcripts and summarise the dataset");
    auto* dict = app.add_subcommand("dict", "Build one pronunciation dictionary from the corpus");
    auto* eval = app.add_subcommand("eval", "Onset-boundary evaluation against gold TextGrids");
    auto* vowels = app.add_subcommand("vowels", "Formant tokens and vowel charts");
    auto* report = app.add_subcommand("report", "Figures across models and settings from diff tables");
    auto* defaults = app.add_subcommand("defaults", "Write the built-in resource files");
    for (auto* sub : {validate, prep, dict, eval, vowels, report}) common(sub);
    defaults->add_option("--out", o.out, "Output directory")->required();

    for (auto* sub : {eval, vowels}) {
        sub->add_option("--gold", o.gold_dir, "Gold TextGrid directory (default: manifest paths)");
        sub->add_option("--hyp", o.hyps, "MODEL=DIR hypothesis directory (repeatable)");
    }
    for (auto* sub : {eval, report})
        sub->add_option("--std-range", o.std_range, "Tokens entering the statistics")
            ->check(CLI::IsMember({"include-all", "in-histogram-range"}));
    vowels->add_option("--axis-multiplier", o.axis_multiplier, "Ellipse semi-axis in standard deviations")
        ->check(CLI::PositiveNumber);
    vowels->add_option("--central-fraction", o.central_fraction, "Average formants over this centred fraction")
        ->check(CLI::Range(0.01, 1.0));
    report->add_option("--input", o.inputs, "MODEL:SETTING=diffs.csv (repeatable)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    try {
        const RunConfig config = build_config(o);
        CommandResult result;
        if (defaults->parsed()) {
            result = cmd_defaults(config);
        } else {
            Resources res = load_resources(config);
            if (o.central_fraction > 0.0) res.formant.central_fraction = o.central_fraction;
            if (validate->parsed()) result = cmd_validate(res);
            else if (prep->parsed()) result = cmd_prep(res);
            else if (dict->parsed()) result = cmd_dict(res);
            else if (eval->parsed()) result = cmd_eval(res, o.gold_dir, parse_hyps(o.hyps));
            else if (vowels->parsed()) result = cmd_vowels(res, o.gold_dir, parse_hyps(o.hyps));
            else if (report->parsed()) result = cmd_report(res, parse_inputs(o.inputs));
        }
        print_diagnostics(std::cerr, result.diagnostics);
        for (const auto& path : result.outputs) std::cout << path << '\n';
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}
