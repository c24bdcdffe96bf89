#include "alignval/vowel_analysis.hpp"

#include "alignval/text.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>

namespace alignval {

void FormantConfig::validate() const {
    if (max_formants < 2 || max_formants > 7) throw ConfigError("max_formants must lie in [2, 7]");
    if (!(ceiling_hz > 0.0)) throw ConfigError("ceiling_hz must be positive");
    if (!(window_length_s > 0.0)) throw ConfigError("window_length_s must be positive");
    if (!(time_step_s > 0.0)) throw ConfigError("time_step_s must be positive");
    if (!(pre_emphasis_from_hz > 0.0) || !(pre_emphasis_from_hz < ceiling_hz))
        throw ConfigError("pre_emphasis_from_hz must lie in (0, ceiling_hz)");
    if (!(max_bandwidth_hz > 0.0)) throw ConfigError("max_bandwidth_hz must be positive");
    if (!(edge_margin_hz >= 0.0) || !(edge_margin_hz < ceiling_hz / 2)) throw ConfigError("edge_margin_hz out of range");
    if (!(central_fraction > 0.0) || central_fraction > 1.0) throw ConfigError("central_fraction must lie in (0, 1]");
}

FormantConfig FormantConfig::from_json(std::string_view doc) {
    FormantConfig c;
    try {
        const auto j = nlohmann::json::parse(doc);
        if (!j.is_object()) throw ConfigError("formant config must be a JSON object");
        c.max_formants = j.value("max_formants", c.max_formants);
        c.ceiling_hz = j.value("ceiling_hz", c.ceiling_hz);
        c.window_length_s = j.value("window_length_s", c.window_length_s);
        c.time_step_s = j.value("time_step_s", c.time_step_s);
        c.pre_emphasis_from_hz = j.value("pre_emphasis_from_hz", c.pre_emphasis_from_hz);
        c.max_bandwidth_hz = j.value("max_bandwidth_hz", c.max_bandwidth_hz);
        c.edge_margin_hz = j.value("edge_margin_hz", c.edge_margin_hz);
        c.central_fraction = j.value("central_fraction", c.central_fraction);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("formant config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string FormantConfig::to_json() const {
    nlohmann::ordered_json j;
    j["max_formants"] = max_formants;
    j["ceiling_hz"] = ceiling_hz;
    j["window_length_s"] = window_length_s;
    j["time_step_s"] = time_step_s;
    j["pre_emphasis_from_hz"] = pre_emphasis_from_hz;
    j["max_bandwidth_hz"] = max_bandwidth_hz;
    j["edge_margin_hz"] = edge_margin_hz;
    j["central_fraction"] = central_fraction;
    return j.dump(2) + "\n";
}

// --------------------------------------------------------------------- LPC

std::vector<double> lpc_burg(std::span<const double> frame, std::size_t order) {
    const std::size_t n = frame.size();
    if (order == 0 || n <= order) throw std::invalid_argument("lpc_burg: frame must be longer than the order");
    const auto [lo, hi] = std::minmax_element(frame.begin(), frame.end());
    if (*lo == *hi) throw DegenerateFrame(*lo == 0.0 ? "all-zero frame" : "constant frame");

    std::vector<double> f(frame.begin(), frame.end());
    std::vector<double> b(frame.begin(), frame.end());
    std::vector<double> a(order + 1, 0.0), prev(order + 1, 0.0);
    a[0] = 1.0;
    for (std::size_t m = 1; m <= order; ++m) {
        double num = 0.0, den = 0.0;
        for (std::size_t t = m; t < n; ++t) {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        if (!(den > 0.0)) break;  // perfectly predicted; higher coefficients stay zero
        const double k = -2.0 * num / den;

        prev = a;
        for (std::size_t i = 1; i < m; ++i) a[i] = prev[i] + k * prev[m - i];
        a[m] = k;

        for (std::size_t t = n - 1; t >= m; --t) {
            const double ft = f[t];
            f[t] = ft + k * b[t - 1];
            b[t] = b[t - 1] + k * ft;
        }
    }
    return {a.begin() + 1, a.end()};
}

std::vector<std::complex<double>> lpc_roots(std::span<const double> coeffs) {
    const auto p = static_cast<Eigen::Index>(coeffs.size());
    if (p == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = -coeffs[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        throw RootFindingFailure(fmt::format("eigenvalue iteration did not converge for order {}", p));
    std::vector<std::complex<double>> roots;
    roots.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) roots.push_back(solver.eigenvalues()(i));
    return roots;
}

std::vector<Formant> formants_from_lpc(std::span<const double> coeffs, double sample_rate, const FormantFilter& filter) {
    const double nyquist = 0.5 * sample_rate;
    std::vector<Formant> out;
    for (auto z : lpc_roots(coeffs)) {
        if (!(z.imag() > 0.0)) continue;
        if (std::abs(z) > 1.0) z = 1.0 / std::conj(z);
        const double freq = std::arg(z) * sample_rate / (2.0 * std::numbers::pi);
        const double bw = -std::log(std::abs(z)) * sample_rate / std::numbers::pi;
        if (freq <= filter.min_hz || freq >= nyquist - filter.edge_margin_hz) continue;
        if (!(bw < filter.max_bandwidth_hz)) continue;
        out.push_back({freq, bw});
    }
    std::sort(out.begin(), out.end(), [](const Formant& a, const Formant& b) { return a.frequency_hz < b.frequency_hz; });
    return out;
}

// ------------------------------------------------------------- measurement

VowelToken measure_vowel(const AudioBuffer& audio, const Interval& interval, const FormantConfig& cfg) {
    cfg.validate();
    constexpr double tol = 1e-9;
    if (interval.xmin < -tol || interval.xmax > audio.duration() + tol || !(interval.xmin < interval.xmax))
        throw OutOfRange(fmt::format("interval [{}, {}] outside audio of {} s", interval.xmin, interval.xmax,
                                     audio.duration()));

    const double mid = interval.midpoint();
    const double span = interval.duration() * cfg.central_fraction;
    if (span + tol < cfg.window_length_s)
        throw TooShort(fmt::format("{} s of vowel is shorter than the {} s analysis window", span, cfg.window_length_s));
    const auto n_frames = static_cast<std::size_t>(std::floor((span - cfg.window_length_s) / cfg.time_step_s + tol)) + 1;

    const double physical_window = 2.0 * cfg.window_length_s;
    const int rate = static_cast<int>(std::lround(2.0 * cfg.ceiling_hz));
    if (rate > audio.sample_rate + 1)
        throw ConfigError(fmt::format("formant ceiling {} Hz needs at least {} Hz audio, got {} Hz", cfg.ceiling_hz,
                                      rate, audio.sample_rate));

    // Context around the interval so windows and the resampling kernel see
    // real signal at the interval edges.
    const double margin = physical_window + 0.02;
    const auto first = std::max<std::int64_t>(0, sample_index(mid - 0.5 * span - margin, audio.sample_rate));
    const auto last = std::min<std::int64_t>(static_cast<std::int64_t>(audio.samples.size()),
                                             sample_index(mid + 0.5 * span + margin, audio.sample_rate));
    AudioBuffer context;
    context.sample_rate = audio.sample_rate;
    context.samples.assign(audio.samples.begin() + first, audio.samples.begin() + last);
    const double context_t0 = static_cast<double>(first) / audio.sample_rate;
    const AudioBuffer prepared = pre_emphasis(resample(context, rate), cfg.pre_emphasis_from_hz);

    const auto window_samples = static_cast<std::size_t>(std::floor(physical_window * rate));
    const auto window = gaussian_window(window_samples);
    const std::size_t order = 2 * static_cast<std::size_t>(cfg.max_formants);
    const FormantFilter filter{50.0, cfg.edge_margin_hz, cfg.max_bandwidth_hz};

    double sum_f1 = 0.0, sum_f2 = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n_frames; ++i) {
        const double t = mid + (static_cast<double>(i) - 0.5 * static_cast<double>(n_frames - 1)) * cfg.time_step_s;
        const double center = (t - context_t0) * rate;
        const auto start = static_cast<std::int64_t>(std::llround(center - 0.5 * static_cast<double>(window_samples)));
        auto frame = padded_span(prepared, start, static_cast<std::int64_t>(window_samples));
        for (std::size_t k = 0; k < frame.size(); ++k) frame[k] *= window[k];
        try {
            const auto coeffs = lpc_burg(frame, order);
            const auto formants = formants_from_lpc(coeffs, rate, filter);
            if (formants.size() < 2) continue;
            sum_f1 += formants[0].frequency_hz;
            sum_f2 += formants[1].frequency_hz;
            ++used;
        } catch (const AnalysisError&) {
            continue;
        }
    }
    if (used == 0) throw NoVoicedFrames(fmt::format("no frame in [{}, {}] yielded two formants", interval.xmin, interval.xmax));

    VowelToken token;
    token.vowel = std::string(text::trim(interval.text));
    token.f1_hz = sum_f1 / static_cast<double>(used);
    token.f2_hz = sum_f2 / static_cast<double>(used);
    token.interval = interval;
    token.frames = used;
    return token;
}

// ---------------------------------------------------------------- ellipses

std::vector<VowelEllipse> build_ellipses(std::span<const VowelToken> tokens) {
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::vector<const VowelToken*>> groups;
    for (const auto& t : tokens) {
        auto key = std::make_pair(t.model, t.vowel);
        auto& g = groups[key];
        if (g.empty()) order.push_back(key);
        g.push_back(&t);
    }
    std::vector<VowelEllipse> out;
    out.reserve(order.size());
    for (const auto& key : order) {
        const auto& g = groups.at(key);
        const auto n = static_cast<double>(g.size());
        double s1 = 0.0, s2 = 0.0;
        for (const auto* t : g) {
            s1 += t->f1_hz;
            s2 += t->f2_hz;
        }
        const double m1 = s1 / n, m2 = s2 / n;
        double v1 = 0.0, v2 = 0.0;
        for (const auto* t : g) {
            v1 += (t->f1_hz - m1) * (t->f1_hz - m1);
            v2 += (t->f2_hz - m2) * (t->f2_hz - m2);
        }
        VowelEllipse e;
        e.model = key.first;
        e.vowel = key.second;
        e.center_f1 = m1;
        e.center_f2 = m2;
        e.semi_f1 = std::sqrt(v1 / n);
        e.semi_f2 = std::sqrt(v2 / n);
        e.n = g.size();
        out.push_back(std::move(e));
    }
    return out;
}

std::string tokens_to_csv(std::span<const VowelToken> tokens) {
    using text::csv_field;
    using text::format_real;
    std::string out = "file,model,vowel,f1_hz,f2_hz,t_start,t_end\n";
    for (const auto& t : tokens)
        out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(t.file), csv_field(t.model), csv_field(t.vowel),
                           format_real(t.f1_hz), format_real(t.f2_hz), format_real(t.interval.xmin),
                           format_real(t.interval.xmax));
    return out;
}

std::vector<VowelToken> tokens_from_csv(std::string_view csv) {
    const auto rows = text::parse_csv(csv);
    if (rows.empty()) throw ParseError("token table is empty");
    std::vector<VowelToken> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 7) throw ParseError(fmt::format("token table row {} has {} fields", r + 1, row.size()));
        const auto f1 = text::parse_real(row[3]), f2 = text::parse_real(row[4]);
        const auto t0 = text::parse_real(row[5]), t1 = text::parse_real(row[6]);
        if (!f1 || !f2 || !t0 || !t1) throw ParseError(fmt::format("token table row {} has a malformed number", r + 1));
        VowelToken t;
        t.file = row[0];
        t.model = row[1];
        t.vowel = row[2];
        t.f1_hz = *f1;
        t.f2_hz = *f2;
        t.interval = {*t0, *t1, row[2]};
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace alignval
