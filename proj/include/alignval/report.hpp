#pragma once

// SVG figures (histogram grid, per-class heatmaps, vowel charts) and the
// companion tables they are drawn from. Output is byte-deterministic.

#include "alignval/boundary_eval.hpp"
#include "alignval/error.hpp"
#include "alignval/vowel_analysis.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

enum class FigureKind { histogram_grid, heatmap_means, heatmap_stds, vowel_chart };

std::string_view to_string(FigureKind kind) noexcept;
FigureKind figure_kind_from_string(std::string_view name);  // throws ConfigError

struct FigureStyle {
    double panel_width = 200.0;  // histogram panel
    double panel_height = 120.0;
    double cell_width = 90.0;  // heatmap cell
    double cell_height = 36.0;
    double chart_width = 560.0;  // vowel chart plot area
    double chart_height = 420.0;
    std::string font_family = "sans-serif";
    int label_decimals = 0;                   // heatmap cell labels
    double heatmap_limit_ms = 0.0;            // colour-scale bound; 0 = data maximum
    double ellipse_axis_multiplier = 1.0;     // semi-axis = multiplier * std
    std::vector<std::string> model_palette;   // empty = built-in palette
};

struct FigureSpec {
    FigureKind kind = FigureKind::histogram_grid;
    std::vector<std::string> rows;  // histogram grid: model tags
    std::vector<std::string> cols;  // histogram grid: settings; heatmap: models
    std::vector<std::string> classes;  // heatmap row order; empty = order of appearance
    std::string title;
    FigureStyle style;

    // Throws ConfigError.
    void validate() const;
    static FigureSpec from_json(std::string_view json);
    std::string to_json() const;
};

// Default palette, assigned to models in declaration order.
const std::vector<std::string>& default_model_palette();

using HistogramMatrix = std::vector<std::vector<HistogramResult>>;  // [row][col]

// One panel per (row, col) with the excluded percentage top-left and the
// in-range count beneath; a panel with no tokens is a "no data" cell.
// Throws ShapeMismatch unless the matrix is rows x cols.
std::string render_histogram_grid(const HistogramMatrix& results, const FigureSpec& spec);

// Rows are natural classes, columns the models in spec.cols. Stats must hold
// at most one value per (class, model) and name only listed models, else
// ShapeMismatch. Means use a diverging palette centred at 0, stds a
// sequential one starting at its lightest colour for 0.
std::string render_heatmap(std::span<const DiffStats> stats, const FigureSpec& spec);

struct VowelChartOptions {
    std::string title;
    std::vector<std::string> model_order;  // colour order; unlisted models follow by appearance
    FigureStyle style;
};

// F2 decreasing rightward, F1 increasing downward. Gold ellipses are black
// and solid; models are coloured. Categories with n < 2 get a glyph only.
std::string render_vowel_chart(std::span<const VowelEllipse> ellipses, std::span<const VowelEllipse> gold,
                               const VowelChartOptions& options = {});

// Heatmap cell label: rounded, with U+2212 for negatives ("-0" prints "0").
std::string format_cell_value(double v, int decimals);

// model,setting,bin_lo_ms,bin_hi_ms,count
std::string histograms_to_csv(const HistogramMatrix& results, const FigureSpec& spec);
// model,setting,total,in_range,excluded_pct
std::string histogram_summary_csv(const HistogramMatrix& results, const FigureSpec& spec);
// model,vowel,n,center_f1,center_f2,std_f1,std_f2
std::string ellipses_to_csv(std::span<const VowelEllipse> ellipses);

}  // namespace alignval
