#include "support.hpp"

#include "alignval/text.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numbers>

namespace testsupport {

namespace fs = std::filesystem;
using namespace alignval;

std::string fixture(const std::string& relative) { return std::string(ALIGNVAL_FIXTURES) + "/" + relative; }
std::string data_file(const std::string& relative) { return std::string(ALIGNVAL_DATA) + "/" + relative; }

TempDir::TempDir() {
    std::random_device rd;
    const auto base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / fmt::format("alignval-test-{:016x}", (std::uint64_t{rd()} << 32) ^ rd());
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("could not create a temporary directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

IntervalTier make_tier(const std::string& name, const std::vector<double>& bounds,
                       const std::vector<std::string>& labels) {
    if (bounds.size() != labels.size() + 1) throw std::invalid_argument("make_tier: bounds/labels size mismatch");
    IntervalTier t{name, bounds.front(), bounds.back(), {}};
    for (std::size_t i = 0; i < labels.size(); ++i) t.intervals.push_back({bounds[i], bounds[i + 1], labels[i]});
    return t;
}

TextGrid make_grid(std::vector<IntervalTier> tiers) {
    TextGrid g;
    g.xmin = tiers.empty() ? 0.0 : tiers.front().xmin;
    g.xmax = tiers.empty() ? 1.0 : tiers.front().xmax;
    for (auto& t : tiers) g.tiers.emplace_back(std::move(t));
    return g;
}

TextGrid random_grid(std::mt19937_64& rng) {
    static const std::vector<std::string> pool{"", "a", "ba", "\"quoted\"", "two words", "ɲiɟu", "aː", "sil",
                                               "x\"\"y", "  padded ", "ŋ", "tab\there", "ñandú"};
    std::uniform_int_distribution<int> n_tiers(1, 4), n_items(1, 12), pick(0, static_cast<int>(pool.size()) - 1);
    std::uniform_real_distribution<double> step(0.001, 0.7), coin(0.0, 1.0);
    TextGrid g;
    g.xmin = coin(rng) < 0.5 ? 0.0 : std::round(coin(rng) * 1000.0) / 1000.0;
    const int tiers = n_tiers(rng);
    std::vector<std::vector<double>> all_bounds;
    double end = g.xmin;
    for (int t = 0; t < tiers; ++t) {
        std::vector<double> b{g.xmin};
        const int n = n_items(rng);
        for (int i = 0; i < n; ++i) b.push_back(b.back() + step(rng));
        end = std::max(end, b.back());
        all_bounds.push_back(std::move(b));
    }
    g.xmax = end;
    for (int t = 0; t < tiers; ++t) {
        auto& b = all_bounds[static_cast<std::size_t>(t)];
        const std::string name = fmt::format("tier{}{}", t, t % 2 ? " ŋ" : "");
        if (coin(rng) < 0.25) {
            PointTier p{name, g.xmin, g.xmax, {}};
            for (std::size_t i = 1; i + 1 < b.size(); ++i) p.points.push_back({b[i], pool[static_cast<std::size_t>(pick(rng))]});
            g.tiers.emplace_back(std::move(p));
            continue;
        }
        b.back() = g.xmax;
        if (b[b.size() - 2] >= g.xmax) b.erase(b.end() - 2);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i + 1 < b.size(); ++i) labels.push_back(pool[static_cast<std::size_t>(pick(rng))]);
        g.tiers.emplace_back(make_tier(name, b, labels));
    }
    return g;
}

std::string to_utf16le_with_bom(const std::string& utf8) {
    std::string out = "\xFF\xFE";
    std::size_t pos = 0;
    while (pos < utf8.size()) {
        const auto [cp, len] = text::decode_utf8(utf8, pos);
        if (len == 0) throw std::invalid_argument("to_utf16le_with_bom: invalid UTF-8");
        pos += len;
        const auto put = [&](char32_t unit) {
            out.push_back(static_cast<char>(unit & 0xFF));
            out.push_back(static_cast<char>((unit >> 8) & 0xFF));
        };
        if (cp >= 0x10000) {
            const char32_t v = cp - 0x10000;
            put(0xD800 + (v >> 10));
            put(0xDC00 + (v & 0x3FF));
        } else {
            put(cp);
        }
    }
    return out;
}

std::vector<double> synth_two_resonator(double f1, double f2, double seconds, int rate, double snr_db,
                                        std::mt19937_64& rng, double f0, double bw1, double bw2) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    const double dt = 1.0 / rate;
    struct Resonator {
        double a, b, c, y1 = 0.0, y2 = 0.0;
        Resonator(double f, double bw, double dt) {
            c = -std::exp(-2.0 * std::numbers::pi * bw * dt);
            b = 2.0 * std::exp(-std::numbers::pi * bw * dt) * std::cos(2.0 * std::numbers::pi * f * dt);
            a = 1.0 - b - c;
        }
        double step(double x) {
            const double y = a * x + b * y1 + c * y2;
            y2 = y1;
            y1 = y;
            return y;
        }
    };
    // Antiresonator: the inverse of a resonator with the same parameters.
    struct Antiresonator {
        double a, b, c, x1 = 0.0, x2 = 0.0;
        Antiresonator(double f, double bw, double dt) {
            const Resonator r(f, bw, dt);
            a = 1.0 / r.a;
            b = -r.b / r.a;
            c = -r.c / r.a;
        }
        double step(double x) {
            const double y = a * x + b * x1 + c * x2;
            x2 = x1;
            x1 = x;
            return y;
        }
    };
    // Impulsive voicing source after Klatt (1980): RGP (0 Hz, bw 100) and
    // RGZ (1500 Hz, bw 6000), then lip radiation as a first difference.
    Resonator rgp(0.0, 100.0, dt), r1(f1, bw1, dt), r2(f2, bw2, dt);
    Antiresonator rgz(1500.0, 6000.0, dt);
    std::vector<double> s(n);
    std::normal_distribution<double> jitter(0.0, 0.01);
    double period = 1.0 / f0;
    double phase = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * period;
    double previous = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        phase += dt;
        double x = 0.0;
        if (phase >= period) {
            phase -= period;
            period = (1.0 + jitter(rng)) / f0;
            x = 1.0;
        }
        const double v = r2.step(r1.step(rgz.step(rgp.step(x))));
        s[i] = v - previous;
        previous = v;
    }
    double power = 0.0;
    for (double v : s) power += v * v;
    power /= static_cast<double>(n);
    const double noise_sd = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    std::normal_distribution<double> noise(0.0, noise_sd);
    double peak = 0.0;
    for (auto& v : s) {
        v += noise(rng);
        peak = std::max(peak, std::fabs(v));
    }
    for (auto& v : s) v *= 0.5 / peak;
    return s;
}

std::vector<std::size_t> reference_bins(const std::vector<double>& diffs_ms, std::size_t* out_of_range) {
    // Ticks of 1 ns (1e-6 ms); the range is [-205e6, 205e6] ticks.
    constexpr long long limit = 205'000'000, width = 10'000'000;
    std::vector<std::size_t> counts(41, 0);
    std::size_t outside = 0;
    for (double d : diffs_ms) {
        const long long t = std::llround(d * 1e6);
        if (t < -limit || t > limit) {
            ++outside;
            continue;
        }
        long long bin = (t + limit) / width;
        if (bin == 41) bin = 40;
        ++counts[static_cast<std::size_t>(bin)];
    }
    if (out_of_range) *out_of_range = outside;
    return counts;
}

ReferenceStats reference_stats(const std::vector<double>& xs) {
    ReferenceStats r;
    r.n = xs.size();
    if (xs.empty()) return r;
    long double sum = 0.0L, sum_abs = 0.0L;
    for (double x : xs) {
        sum += x;
        sum_abs += std::fabs(x);
    }
    const long double mean = sum / xs.size();
    long double ss = 0.0L;
    for (double x : xs) ss += (x - mean) * (x - mean);
    r.mean = static_cast<double>(mean);
    r.std = static_cast<double>(std::sqrt(ss / xs.size()));
    r.mean_abs = static_cast<double>(sum_abs / xs.size());
    return r;
}

EvalCorpus write_eval_corpus(const fs::path& root, const std::vector<std::string>& models,
                             const std::vector<double>& shift_s) {
    if (models.size() != shift_s.size()) throw std::invalid_argument("write_eval_corpus: one shift per model");
    EvalCorpus c;
    fs::create_directories(root / "wav");
    fs::create_directories(root / "gold");
    std::string manifest = "path_audio,path_textgrid,language,split\n";
    const std::vector<std::string> phones{"b", "a", "n", "a", "ɲ", "i", "ɟ", "u", "r", "aː", "l", "i"};
    for (int k = 0; k < 3; ++k) {
        const std::string name = fmt::format("yid_{:02}", k);
        AudioBuffer silence{1000, std::vector<double>(2000, 0.0)};
        text::write_file_atomic((root / "wav" / (name + ".wav")).string(), encode_wav(silence));

        std::vector<double> pb{0.0, 0.3};
        std::vector<std::string> pl{"sil"};
        for (std::size_t i = 0; i < phones.size(); ++i) {
            pb.push_back(0.3 + 0.11 * static_cast<double>(i + 1) + 0.01 * k);
            pl.push_back(phones[i]);
        }
        pb.push_back(2.0);
        pl.push_back("sil");
        const std::vector<double> wb{0.0, 0.3, pb[5], pb[9], pb[13], 2.0};
        const std::vector<std::string> wl{"", "bana", "nyiju", "raali", ""};
        const auto gold = make_grid({make_tier("words", wb, wl), make_tier("phones", pb, pl)});
        text::write_file_atomic((root / "gold" / (name + ".TextGrid")).string(), serialize_textgrid(gold));

        for (std::size_t m = 0; m < models.size(); ++m) {
            auto hb = pb;
            for (std::size_t i = 1; i + 1 < hb.size(); ++i) hb[i] += shift_s[m];
            const auto hyp = make_grid({make_tier("words", wb, wl), make_tier("phones", hb, pl)});
            const auto dir = root / ("hyp_" + models[m]);
            text::write_file_atomic((dir / (name + ".TextGrid")).string(), serialize_textgrid(hyp));
        }
        manifest += fmt::format("wav/{0}.wav,gold/{0}.TextGrid,Yidiny,test\n", name);
    }
    c.manifest = (root / "manifest.csv").string();
    text::write_file_atomic(c.manifest, manifest);
    c.gold_dir = (root / "gold").string();
    for (const auto& m : models) c.hyps.emplace_back(m, (root / ("hyp_" + m)).string());
    return c;
}

}  // namespace testsupport
