#pragma once

// Subcommand implementations behind the alignval tool. Each command reads a
// manifest-driven corpus, writes only under RunConfig::output_dir (atomic
// renames) and returns a process exit code.

#include "alignval/boundary_eval.hpp"
#include "alignval/corpus_prep.hpp"
#include "alignval/error.hpp"
#include "alignval/g2p.hpp"
#include "alignval/inventory.hpp"
#include "alignval/vowel_analysis.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

inline constexpr const char* kConfigEnvVar = "ALIGNVAL_CONFIG";

struct RunConfig {
    std::string manifest;
    std::string word_tier = "words";
    std::string phone_tier = "phones";
    // Optional resource files; empty means the built-in defaults.
    std::string cleaning_rules;
    std::string class_map;
    std::string g2p_rules;
    std::string inventories;
    std::string formant_config;
    std::string output_dir = "out";
    std::string model_tag = "model";
    std::string setting_tag = "default";

    double flag_threshold_ms = 100.0;
    std::size_t flag_limit = 100;
    RangeFilter std_range = RangeFilter::include_all;
    double ellipse_axis_multiplier = 1.0;
    std::vector<std::string> ignore_labels{"sil", "sp", "spn"};
    bool strict = false;
    unsigned workers = 1;

    // Relative paths in the document resolve against base_dir. Throws
    // ConfigError.
    static RunConfig from_json(std::string_view json, const std::string& base_dir = {});
    static RunConfig load(const std::string& path);
    std::string to_json() const;
};

// Everything a command needs, parsed up front.
struct Resources {
    RunConfig config;
    CleaningRules cleaning;
    NaturalClassMap classes;
    std::vector<G2PRuleSet> g2p;
    std::vector<PhoneInventory> inventories;
    FormantConfig formant;
    LabelOptions labels;
};

// Loads every referenced resource file, collecting all failures into one
// ConfigError.
Resources load_resources(const RunConfig& config);

struct CommandResult {
    int exit_code = kExitOk;
    Diagnostics diagnostics;
    std::vector<std::string> outputs;  // files written, in write order
};

struct HypothesisSource {
    std::string model;
    std::string dir;
};

// Parses every TextGrid and WAV in the manifest.
CommandResult cmd_validate(const Resources& res);

// Cleans the word tier of every TextGrid into output_dir/prep and writes a
// manifest for the cleaned corpus plus a dataset summary.
CommandResult cmd_prep(const Resources& res);

// One merged pronunciation dictionary over every language in the manifest.
CommandResult cmd_dict(const Resources& res);

// Onset-boundary evaluation of each hypothesis directory against gold.
// `gold_dir` empty means the TextGrids named in the manifest are the gold.
CommandResult cmd_eval(const Resources& res, const std::string& gold_dir, const std::vector<HypothesisSource>& hyps);

// Vowel formant tokens and charts for gold and each hypothesis.
CommandResult cmd_vowels(const Resources& res, const std::string& gold_dir, const std::vector<HypothesisSource>& hyps);

struct ReportInput {
    std::string model;
    std::string setting;
    std::string diffs_csv;
};

// Figures and tables across models x settings from exported diff tables.
CommandResult cmd_report(const Resources& res, const std::vector<ReportInput>& inputs);

// Writes the built-in resource files into output_dir.
CommandResult cmd_defaults(const RunConfig& config);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

void print_diagnostics(std::ostream& os, const Diagnostics& diag);
std::string diagnostics_to_json(const Diagnostics& diag);

}  // namespace alignval
