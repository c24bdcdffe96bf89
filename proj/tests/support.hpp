#pragma once

// Shared helpers for the unit tests and the acceptance runner: fixture
// paths, scratch directories, tier builders, signal synthesis and the
// independent reference computations the library is checked against.

#include "alignval/audio.hpp"
#include "alignval/boundary_eval.hpp"
#include "alignval/textgrid.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

std::string fixture(const std::string& relative);
std::string data_file(const std::string& relative);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::string operator/(const std::string& rel) const { return (path_ / rel).string(); }

private:
    std::filesystem::path path_;
};

// Tier over [bounds.front(), bounds.back()] with labels.size() ==
// bounds.size() - 1.
alignval::IntervalTier make_tier(const std::string& name, const std::vector<double>& bounds,
                                 const std::vector<std::string>& labels);
alignval::TextGrid make_grid(std::vector<alignval::IntervalTier> tiers);

// Random well-formed grid: 1-4 tiers, mixed interval/point tiers, labels
// with quotes, non-ASCII and whitespace.
alignval::TextGrid random_grid(std::mt19937_64& rng);

std::string to_utf16le_with_bom(const std::string& utf8);

// Vowel-like test signal: Klatt's impulsive voicing source at f0 (1% period
// jitter) through a cascade of two second-order resonators at (f1, bw1) and
// (f2, bw2), with lip radiation and white noise at the requested SNR.
std::vector<double> synth_two_resonator(double f1, double f2, double seconds, int rate, double snr_db,
                                        std::mt19937_64& rng, double f0 = 120.0, double bw1 = 60.0,
                                        double bw2 = 90.0);

// Reference bin counts for [-205, 205] in 10 ms bins, written directly from
// the bin definition (integer arithmetic on nanosecond ticks).
std::vector<std::size_t> reference_bins(const std::vector<double>& diffs_ms, std::size_t* out_of_range);

// Textbook sums over a sample: mean, population std and mean |x|.
struct ReferenceStats {
    std::size_t n = 0;
    double mean = 0.0, std = 0.0, mean_abs = 0.0;
};
ReferenceStats reference_stats(const std::vector<double>& xs);

// Writes a small evaluation corpus: manifest.csv, wav/, gold/ and one hyp
// directory per offset list, where hyp onsets are gold onsets shifted by
// the scripted per-phone offsets (seconds).
struct EvalCorpus {
    std::string manifest;
    std::string gold_dir;
    std::vector<std::pair<std::string, std::string>> hyps;  // model, dir
};
EvalCorpus write_eval_corpus(const std::filesystem::path& root, const std::vector<std::string>& models,
                             const std::vector<double>& shift_s);

}  // namespace testsupport
