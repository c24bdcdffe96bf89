#include "alignval/report.hpp"

#include "alignval/text.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

namespace alignval {

namespace {

using text::xml_escape;

// Fixed two-decimal coordinates; never "-0.00".
std::string num(double v) {
    if (std::fabs(v) < 0.005) return "0";
    auto s = fmt::format("{:.2f}", v);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

struct Rgb {
    int r, g, b;
};

Rgb parse_hex(std::string_view hex) {
    if (hex.size() != 7 || hex[0] != '#') throw ConfigError(fmt::format("colour '{}' is not #rrggbb", hex));
    const auto part = [&](std::size_t i) { return std::stoi(std::string(hex.substr(i, 2)), nullptr, 16); };
    return {part(1), part(3), part(5)};
}

std::string to_hex(Rgb c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

Rgb lerp(Rgb a, Rgb b, double t) {
    t = std::clamp(t, 0.0, 1.0);
    const auto mix = [t](int x, int y) { return static_cast<int>(std::lround(x + (y - x) * t)); };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

constexpr Rgb kDivergingLow{0x21, 0x66, 0xac};
constexpr Rgb kDivergingMid{0xf7, 0xf7, 0xf7};
constexpr Rgb kDivergingHigh{0xb2, 0x18, 0x2b};
constexpr Rgb kSequentialLow{0xff, 0xf5, 0xeb};
constexpr Rgb kSequentialHigh{0x7f, 0x27, 0x04};
constexpr const char* kMissingFill = "#e0e0e0";
constexpr const char* kBarFill = "#4c72b0";

// XML comments may not contain "--" or end in "-".
std::string comment(std::string body) {
    std::size_t pos;
    while ((pos = body.find("--")) != std::string::npos) body.replace(pos, 2, "- -");
    return "<!-- " + body + " -->\n";
}

std::string svg_open(double width, double height, const FigureStyle& style) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"{2}\" font-size=\"12\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
        num(width), num(height), xml_escape(style.font_family));
}

std::string text_el(double x, double y, std::string_view content, std::string_view cls, std::string_view extra = {}) {
    return fmt::format("<text class=\"{}\" x=\"{}\" y=\"{}\"{}{}>{}</text>\n", cls, num(x), num(y),
                       extra.empty() ? "" : " ", extra, xml_escape(content));
}

const std::vector<std::string>& palette_for(const FigureStyle& style) {
    return style.model_palette.empty() ? default_model_palette() : style.model_palette;
}

}  // namespace

std::string_view to_string(FigureKind kind) noexcept {
    switch (kind) {
        case FigureKind::histogram_grid: return "histogram_grid";
        case FigureKind::heatmap_means: return "heatmap_means";
        case FigureKind::heatmap_stds: return "heatmap_stds";
        case FigureKind::vowel_chart: return "vowel_chart";
    }
    return "?";
}

FigureKind figure_kind_from_string(std::string_view name) {
    for (auto k : {FigureKind::histogram_grid, FigureKind::heatmap_means, FigureKind::heatmap_stds,
                   FigureKind::vowel_chart})
        if (to_string(k) == name) return k;
    throw ConfigError(fmt::format("unknown figure kind '{}'", name));
}

const std::vector<std::string>& default_model_palette() {
    static const std::vector<std::string> palette{"#0072b2", "#d55e00", "#009e73", "#cc79a7",
                                                  "#e69f00", "#56b4e9", "#8c564b", "#7f7f7f"};
    return palette;
}

void FigureSpec::validate() const {
    const bool grid = kind == FigureKind::histogram_grid;
    const bool heat = kind == FigureKind::heatmap_means || kind == FigureKind::heatmap_stds;
    if (grid && (rows.empty() || cols.empty())) throw ConfigError("histogram grid needs non-empty rows and cols");
    if (heat && cols.empty()) throw ConfigError("heatmap needs at least one model column");
    if (style.label_decimals < 0 || style.label_decimals > 6) throw ConfigError("label_decimals must lie in [0, 6]");
    if (!(style.ellipse_axis_multiplier > 0.0)) throw ConfigError("ellipse_axis_multiplier must be positive");
    if (style.heatmap_limit_ms < 0.0) throw ConfigError("heatmap_limit_ms must not be negative");
    for (const auto& c : style.model_palette) parse_hex(c);
    for (double d : {style.panel_width, style.panel_height, style.cell_width, style.cell_height, style.chart_width,
                     style.chart_height})
        if (!(d > 0.0)) throw ConfigError("figure dimensions must be positive");
}

FigureSpec FigureSpec::from_json(std::string_view doc) {
    FigureSpec s;
    try {
        const auto j = nlohmann::json::parse(doc);
        s.kind = figure_kind_from_string(j.at("kind").get<std::string>());
        s.rows = j.value("rows", s.rows);
        s.cols = j.value("cols", s.cols);
        s.classes = j.value("classes", s.classes);
        s.title = j.value("title", s.title);
        if (j.contains("style")) {
            const auto& st = j.at("style");
            auto& y = s.style;
            y.panel_width = st.value("panel_width", y.panel_width);
            y.panel_height = st.value("panel_height", y.panel_height);
            y.cell_width = st.value("cell_width", y.cell_width);
            y.cell_height = st.value("cell_height", y.cell_height);
            y.chart_width = st.value("chart_width", y.chart_width);
            y.chart_height = st.value("chart_height", y.chart_height);
            y.font_family = st.value("font_family", y.font_family);
            y.label_decimals = st.value("label_decimals", y.label_decimals);
            y.heatmap_limit_ms = st.value("heatmap_limit_ms", y.heatmap_limit_ms);
            y.ellipse_axis_multiplier = st.value("ellipse_axis_multiplier", y.ellipse_axis_multiplier);
            y.model_palette = st.value("model_palette", y.model_palette);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("figure spec: ") + e.what());
    }
    s.validate();
    return s;
}

std::string FigureSpec::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(kind));
    j["rows"] = rows;
    j["cols"] = cols;
    j["classes"] = classes;
    j["title"] = title;
    auto& st = j["style"];
    st["panel_width"] = style.panel_width;
    st["panel_height"] = style.panel_height;
    st["cell_width"] = style.cell_width;
    st["cell_height"] = style.cell_height;
    st["chart_width"] = style.chart_width;
    st["chart_height"] = style.chart_height;
    st["font_family"] = style.font_family;
    st["label_decimals"] = style.label_decimals;
    st["heatmap_limit_ms"] = style.heatmap_limit_ms;
    st["ellipse_axis_multiplier"] = style.ellipse_axis_multiplier;
    st["model_palette"] = style.model_palette;
    return j.dump(2) + "\n";
}

std::string format_cell_value(double v, int decimals) {
    auto s = fmt::format("{:.{}f}", std::fabs(v), decimals);
    const bool zero = s.find_first_not_of("0.") == std::string::npos;
    if (v < 0 && !zero) return "−" + s;
    return s;
}

// ------------------------------------------------------------ histograms

std::string render_histogram_grid(const HistogramMatrix& results, const FigureSpec& spec) {
    if (spec.rows.empty() || spec.cols.empty()) throw ShapeMismatch("figure needs at least one row and one column");
    if (results.size() != spec.rows.size())
        throw ShapeMismatch(fmt::format("{} result rows for {} models", results.size(), spec.rows.size()));
    for (std::size_t i = 0; i < results.size(); ++i)
        if (results[i].size() != spec.cols.size())
            throw ShapeMismatch(fmt::format("row '{}' has {} panels for {} settings", spec.rows[i], results[i].size(),
                                            spec.cols.size()));

    const auto& st = spec.style;
    const double left = 120.0, top = spec.title.empty() ? 36.0 : 60.0, gap_x = 20.0, gap_y = 36.0;
    const double pw = st.panel_width, ph = st.panel_height;
    const double width = left + spec.cols.size() * (pw + gap_x) + 10.0;
    const double height = top + spec.rows.size() * (ph + gap_y) + 40.0;

    std::string out = svg_open(width, height, st);
    out += comment(fmt::format(
        "alignval figure kind=histogram_grid; rows=models; cols=settings; x range [-{0}, {0}] ms in {1} bins of {2} "
        "ms, last bin closed; top-left label = percent of tokens outside the range; label below = tokens inside "
        "the range",
        kHistogramLimitMs, kHistogramBins, kHistogramBinWidthMs));
    if (!spec.title.empty()) out += text_el(width / 2, 24, spec.title, "title", "text-anchor=\"middle\" font-size=\"16\"");
    for (std::size_t j = 0; j < spec.cols.size(); ++j)
        out += text_el(left + j * (pw + gap_x) + pw / 2, top - 10, spec.cols[j], "col-label", "text-anchor=\"middle\"");

    const double span = 2.0 * kHistogramLimitMs;
    const auto x_of = [&](double x0, double ms) { return x0 + (ms + kHistogramLimitMs) / span * pw; };

    for (std::size_t i = 0; i < spec.rows.size(); ++i) {
        const double y0 = top + i * (ph + gap_y);
        out += text_el(left - 8, y0 + ph / 2, spec.rows[i], "row-label", "text-anchor=\"end\"");
        for (std::size_t j = 0; j < spec.cols.size(); ++j) {
            const auto& h = results[i][j];
            const double x0 = left + j * (pw + gap_x);
            out += fmt::format("<g class=\"panel{}\" data-model=\"{}\" data-setting=\"{}\">\n",
                               h.total == 0 ? " no-data" : "", xml_escape(spec.rows[i]), xml_escape(spec.cols[j]));
            if (h.total == 0) {
                out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#999999\"/>\n",
                                   num(x0), num(y0), num(pw), num(ph), kMissingFill);
                out += text_el(x0 + pw / 2, y0 + ph / 2 + 4, "no data", "no-data", "text-anchor=\"middle\"");
                out += "</g>\n";
                continue;
            }
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999999\"/>\n",
                               num(x0), num(y0), num(pw), num(ph));
            const std::size_t peak = *std::max_element(h.counts.begin(), h.counts.end());
            const double bar_area = ph - 22.0;
            for (std::size_t b = 0; b < kHistogramBins; ++b) {
                if (h.counts[b] == 0) continue;
                const double bh = bar_area * static_cast<double>(h.counts[b]) / static_cast<double>(peak);
                const double bx = x_of(x0, h.bin_edges[b]);
                const double bw = x_of(x0, h.bin_edges[b + 1]) - bx;
                out += fmt::format(
                    "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" data-count=\"{}\"/>\n",
                    num(bx), num(y0 + ph - bh), num(bw), num(bh), kBarFill, h.counts[b]);
            }
            out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#555555\" "
                               "stroke-dasharray=\"2 2\"/>\n",
                               num(x_of(x0, 0.0)), num(y0), num(y0 + ph));
            for (double tick : {-200.0, -100.0, 0.0, 100.0, 200.0})
                out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#999999\"/>\n",
                                   num(x_of(x0, tick)), num(y0 + ph), num(y0 + ph + 4));
            out += text_el(x0 + 4, y0 + 14, fmt::format("{:.1f}%", h.excluded_pct), "excluded");
            out += text_el(x0 + pw / 2, y0 + ph + 16, fmt::format("{}", h.in_range_count), "count",
                           "text-anchor=\"middle\"");
            out += "</g>\n";
        }
    }
    const double axis_y = top + spec.rows.size() * (ph + gap_y) + 4;
    for (std::size_t j = 0; j < spec.cols.size(); ++j) {
        const double x0 = left + j * (pw + gap_x);
        for (double tick : {-200.0, -100.0, 0.0, 100.0, 200.0})
            out += text_el(x_of(x0, tick), axis_y, format_cell_value(tick, 0), "tick", "text-anchor=\"middle\" font-size=\"10\"");
        out += text_el(x0 + pw / 2, axis_y + 16, "onset diff (ms)", "axis-label", "text-anchor=\"middle\" font-size=\"10\"");
    }
    out += "</svg>\n";
    return out;
}

std::string histograms_to_csv(const HistogramMatrix& results, const FigureSpec& spec) {
    if (results.size() != spec.rows.size()) throw ShapeMismatch("histogram matrix does not match the figure rows");
    std::string out = "model,setting,bin_lo_ms,bin_hi_ms,count\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].size() != spec.cols.size()) throw ShapeMismatch("histogram matrix does not match the figure cols");
        for (std::size_t j = 0; j < results[i].size(); ++j) {
            const auto& h = results[i][j];
            for (std::size_t b = 0; b < kHistogramBins; ++b)
                out += fmt::format("{},{},{},{},{}\n", text::csv_field(spec.rows[i]), text::csv_field(spec.cols[j]),
                                   text::format_real(h.bin_edges[b]), text::format_real(h.bin_edges[b + 1]),
                                   h.counts[b]);
        }
    }
    return out;
}

std::string histogram_summary_csv(const HistogramMatrix& results, const FigureSpec& spec) {
    if (results.size() != spec.rows.size()) throw ShapeMismatch("histogram matrix does not match the figure rows");
    std::string out = "model,setting,total,in_range,excluded_pct\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].size() != spec.cols.size()) throw ShapeMismatch("histogram matrix does not match the figure cols");
        for (std::size_t j = 0; j < results[i].size(); ++j) {
            const auto& h = results[i][j];
            out += fmt::format("{},{},{},{},{}\n", text::csv_field(spec.rows[i]), text::csv_field(spec.cols[j]), h.total,
                               h.in_range_count, text::format_real(h.excluded_pct));
        }
    }
    return out;
}

// -------------------------------------------------------------- heatmaps

std::string render_heatmap(std::span<const DiffStats> stats, const FigureSpec& spec) {
    const bool means = spec.kind == FigureKind::heatmap_means;
    if (!means && spec.kind != FigureKind::heatmap_stds)
        throw ConfigError(fmt::format("render_heatmap called with figure kind {}", to_string(spec.kind)));
    if (spec.cols.empty()) throw ShapeMismatch("heatmap needs at least one model column");

    std::map<std::string, std::size_t> col_of;
    for (std::size_t j = 0; j < spec.cols.size(); ++j) col_of.emplace(spec.cols[j], j);

    std::vector<std::string> classes = spec.classes;
    std::set<std::string> listed(classes.begin(), classes.end());
    std::vector<std::string> extra;
    std::map<std::pair<std::string, std::size_t>, const DiffStats*> cells;
    for (const auto& s : stats) {
        const auto it = col_of.find(s.model);
        if (it == col_of.end()) throw ShapeMismatch(fmt::format("stats for model '{}' not in the figure columns", s.model));
        if (!cells.emplace(std::make_pair(s.cls, it->second), &s).second)
            throw ShapeMismatch(fmt::format("more than one value for class '{}', model '{}'", s.cls, s.model));
        if (listed.insert(s.cls).second) extra.push_back(s.cls);
    }
    if (!spec.classes.empty()) std::sort(extra.begin(), extra.end());
    classes.insert(classes.end(), extra.begin(), extra.end());

    const auto value_of = [means](const DiffStats& s) { return means ? s.mean_ms : s.std_ms; };
    double limit = spec.style.heatmap_limit_ms;
    if (limit == 0.0)
        for (const auto& [key, s] : cells) limit = std::max(limit, std::fabs(value_of(*s)));
    if (limit == 0.0) limit = 1.0;

    const auto colour = [&](double v) {
        if (means) {
            const double t = v / limit;
            return t < 0 ? lerp(kDivergingMid, kDivergingLow, -t) : lerp(kDivergingMid, kDivergingHigh, t);
        }
        return lerp(kSequentialLow, kSequentialHigh, v / limit);
    };

    const auto& st = spec.style;
    const double left = 150.0, top = spec.title.empty() ? 40.0 : 64.0;
    const double cw = st.cell_width, ch = st.cell_height;
    const double grid_w = spec.cols.size() * cw, grid_h = classes.size() * ch;
    const double legend_x = left + grid_w + 24.0;
    const double width = legend_x + 90.0, height = top + std::max(grid_h, 200.0) + 30.0;

    std::string out = svg_open(width, height, st);
    out += comment(fmt::format(
        "alignval figure kind={}; rows=natural classes; cols=models; value={} in ms; palette={} from {} to {}{}; "
        "colour bound {} ms; cell labels rounded to {} decimals; missing cells grey",
        to_string(spec.kind), means ? "mean onset diff" : "population std of onset diff",
        means ? "diverging, centred at 0," : "sequential, 0 lightest,", to_hex(means ? kDivergingLow : kSequentialLow),
        to_hex(means ? kDivergingHigh : kSequentialHigh), means ? fmt::format(" through {}", to_hex(kDivergingMid)) : "",
        text::format_real(limit), st.label_decimals));
    if (!spec.title.empty()) out += text_el(width / 2, 24, spec.title, "title", "text-anchor=\"middle\" font-size=\"16\"");
    for (std::size_t j = 0; j < spec.cols.size(); ++j)
        out += text_el(left + j * cw + cw / 2, top - 10, spec.cols[j], "col-label", "text-anchor=\"middle\"");

    for (std::size_t i = 0; i < classes.size(); ++i) {
        const double y = top + i * ch;
        out += text_el(left - 8, y + ch / 2 + 4, classes[i], "row-label", "text-anchor=\"end\"");
        for (std::size_t j = 0; j < spec.cols.size(); ++j) {
            const double x = left + j * cw;
            const auto it = cells.find({classes[i], j});
            if (it == cells.end()) {
                out += fmt::format("<g class=\"cell missing\" data-class=\"{}\" data-model=\"{}\">\n",
                                   xml_escape(classes[i]), xml_escape(spec.cols[j]));
                out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\"/>\n",
                                   num(x), num(y), num(cw), num(ch), kMissingFill);
                out += text_el(x + cw / 2, y + ch / 2 + 4, "–", "label", "text-anchor=\"middle\"");
                out += "</g>\n";
                continue;
            }
            const double v = value_of(*it->second);
            const Rgb fill = colour(v);
            const double luminance = 0.299 * fill.r + 0.587 * fill.g + 0.114 * fill.b;
            out += fmt::format("<g class=\"cell\" data-class=\"{}\" data-model=\"{}\" data-value=\"{}\" data-n=\"{}\">\n",
                               xml_escape(classes[i]), xml_escape(spec.cols[j]), text::format_real(v), it->second->n);
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\"/>\n",
                               num(x), num(y), num(cw), num(ch), to_hex(fill));
            out += text_el(x + cw / 2, y + ch / 2 + 4, format_cell_value(v, st.label_decimals), "label",
                           fmt::format("text-anchor=\"middle\" fill=\"{}\"", luminance < 128 ? "#ffffff" : "#000000"));
            out += "</g>\n";
        }
    }

    // Legend: 11 swatches from the low to the high end of the scale.
    const double lo = means ? -limit : 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double v = limit - (limit - lo) * k / 10.0;
        out += fmt::format("<rect class=\"legend\" x=\"{}\" y=\"{}\" width=\"16\" height=\"16\" fill=\"{}\"/>\n",
                           num(legend_x), num(top + k * 16.0), to_hex(colour(v)));
    }
    out += text_el(legend_x + 22, top + 12, format_cell_value(limit, st.label_decimals), "legend-label");
    out += text_el(legend_x + 22, top + 172, format_cell_value(lo, st.label_decimals), "legend-label");
    out += text_el(legend_x, top + 196, "ms", "legend-label");
    out += "</svg>\n";
    return out;
}

// ---------------------------------------------------------- vowel charts

namespace {

struct Range {
    double lo, hi;
};

Range nice_range(double lo, double hi) {
    const double pad = std::max(0.1 * (hi - lo), 50.0);
    lo = std::floor((lo - pad) / 100.0) * 100.0;
    hi = std::ceil((hi + pad) / 100.0) * 100.0;
    if (hi - lo < 200.0) hi = lo + 200.0;
    return {std::max(lo, 0.0), hi};
}

double tick_step(Range r) {
    for (double s : {100.0, 200.0, 250.0, 500.0, 1000.0, 2000.0})
        if ((r.hi - r.lo) / s <= 8.0) return s;
    return 5000.0;
}

}  // namespace

std::string render_vowel_chart(std::span<const VowelEllipse> ellipses, std::span<const VowelEllipse> gold,
                               const VowelChartOptions& options) {
    const auto& st = options.style;
    const double mult = st.ellipse_axis_multiplier;
    if (!(mult > 0.0)) throw ConfigError("ellipse_axis_multiplier must be positive");

    std::vector<std::string> models = options.model_order;
    for (const auto& e : ellipses)
        if (std::find(models.begin(), models.end(), e.model) == models.end()) models.push_back(e.model);
    const auto& palette = palette_for(st);
    const auto colour_of = [&](const std::string& model) {
        const auto idx = static_cast<std::size_t>(std::find(models.begin(), models.end(), model) - models.begin());
        return palette[idx % palette.size()];
    };

    bool any = false;
    double f1_lo = 0, f1_hi = 0, f2_lo = 0, f2_hi = 0;
    const auto extend = [&](const VowelEllipse& e) {
        const double a = e.drawable() ? mult * e.semi_f2 : 0.0, b = e.drawable() ? mult * e.semi_f1 : 0.0;
        if (!any) {
            f2_lo = e.center_f2 - a, f2_hi = e.center_f2 + a, f1_lo = e.center_f1 - b, f1_hi = e.center_f1 + b;
            any = true;
        } else {
            f2_lo = std::min(f2_lo, e.center_f2 - a), f2_hi = std::max(f2_hi, e.center_f2 + a);
            f1_lo = std::min(f1_lo, e.center_f1 - b), f1_hi = std::max(f1_hi, e.center_f1 + b);
        }
    };
    for (const auto& e : gold) extend(e);
    for (const auto& e : ellipses) extend(e);
    const Range f2 = any ? nice_range(f2_lo, f2_hi) : Range{500.0, 3000.0};
    const Range f1 = any ? nice_range(f1_lo, f1_hi) : Range{200.0, 1000.0};

    const double left = 70.0, top = options.title.empty() ? 30.0 : 56.0;
    const double w = st.chart_width, h = st.chart_height;
    const double legend_h = 18.0 * static_cast<double>(models.size() + 1);
    const double width = left + w + 170.0, height = top + std::max(h, legend_h) + 60.0;
    const auto x_of = [&](double hz) { return left + (f2.hi - hz) / (f2.hi - f2.lo) * w; };
    const auto y_of = [&](double hz) { return top + (hz - f1.lo) / (f1.hi - f1.lo) * h; };

    std::string out = svg_open(width, height, st);
    out += comment(fmt::format(
        "alignval figure kind=vowel_chart; x=F2 Hz decreasing rightward [{}, {}]; y=F1 Hz increasing downward [{}, "
        "{}]; ellipse centre = mean (F2, F1); semi-axes = {} x population std; reference ellipses black solid, "
        "model ellipses dashed in palette order; glyph only when n < 2",
        text::format_real(f2.hi), text::format_real(f2.lo), text::format_real(f1.lo), text::format_real(f1.hi),
        text::format_real(mult)));
    if (!options.title.empty())
        out += text_el(left + w / 2, 24, options.title, "title", "text-anchor=\"middle\" font-size=\"16\"");

    out += fmt::format("<rect class=\"plot-area\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                       "stroke=\"#555555\"/>\n",
                       num(left), num(top), num(w), num(h));
    const double sx = tick_step(f2), sy = tick_step(f1);
    for (double t = std::ceil(f2.lo / sx) * sx; t <= f2.hi + 1e-9; t += sx) {
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#999999\"/>\n", num(x_of(t)),
                           num(top + h), num(top + h + 4));
        out += text_el(x_of(t), top + h + 16, text::format_real(t), "tick", "text-anchor=\"middle\" font-size=\"10\"");
    }
    for (double t = std::ceil(f1.lo / sy) * sy; t <= f1.hi + 1e-9; t += sy) {
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#999999\"/>\n", num(left - 4),
                           num(y_of(t)), num(left));
        out += text_el(left - 6, y_of(t) + 3, text::format_real(t), "tick", "text-anchor=\"end\" font-size=\"10\"");
    }
    out += text_el(left + w / 2, top + h + 34, "F2 (Hz)", "axis-label", "text-anchor=\"middle\"");
    out += text_el(16, top + h / 2, "F1 (Hz)", "axis-label",
                   fmt::format("text-anchor=\"middle\" transform=\"rotate(-90 16 {})\"", num(top + h / 2)));

    const auto draw = [&](const VowelEllipse& e, const std::string& colour, bool reference) {
        out += fmt::format("<g class=\"series-item {}\" data-model=\"{}\" data-vowel=\"{}\" data-n=\"{}\">\n",
                           reference ? "gold" : "model", xml_escape(reference ? std::string("reference") : e.model),
                           xml_escape(e.vowel), e.n);
        if (e.drawable()) {
            const double rx = mult * e.semi_f2 * w / (f2.hi - f2.lo), ry = mult * e.semi_f1 * h / (f1.hi - f1.lo);
            out += fmt::format("<ellipse class=\"ellipse\" cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"none\" "
                               "stroke=\"{}\" stroke-width=\"{}\"{}/>\n",
                               num(x_of(e.center_f2)), num(y_of(e.center_f1)), num(rx), num(ry), colour,
                               reference ? "1.5" : "1.2", reference ? "" : " stroke-dasharray=\"6 3\"");
        }
        out += text_el(x_of(e.center_f2), y_of(e.center_f1) + 5, e.vowel, "glyph",
                       fmt::format("text-anchor=\"middle\" font-size=\"16\" fill=\"{}\"", colour));
        out += "</g>\n";
    };
    for (const auto& e : gold) draw(e, "#000000", true);
    for (const auto& e : ellipses) draw(e, colour_of(e.model), false);

    const double lx = left + w + 20.0;
    double ly = top + 10.0;
    if (!gold.empty()) {
        out += fmt::format("<line class=\"legend\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000000\" "
                           "stroke-width=\"1.5\"/>\n",
                           num(lx), num(ly), num(lx + 24));
        out += text_el(lx + 30, ly + 4, "human annotated", "legend-label");
        ly += 18.0;
    }
    for (const auto& m : models) {
        out += fmt::format("<line class=\"legend\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" "
                           "stroke-width=\"1.2\" stroke-dasharray=\"6 3\"/>\n",
                           num(lx), num(ly), num(lx + 24), colour_of(m));
        out += text_el(lx + 30, ly + 4, m, "legend-label");
        ly += 18.0;
    }
    out += "</svg>\n";
    return out;
}

std::string ellipses_to_csv(std::span<const VowelEllipse> ellipses) {
    using text::csv_field;
    using text::format_real;
    std::string out = "model,vowel,n,center_f1,center_f2,std_f1,std_f2\n";
    for (const auto& e : ellipses)
        out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(e.model), csv_field(e.vowel), e.n,
                           format_real(e.center_f1), format_real(e.center_f2), format_real(e.semi_f1),
                           format_real(e.semi_f2));
    return out;
}

}  // namespace alignval
