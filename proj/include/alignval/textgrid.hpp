#pragma once

// Praat TextGrid model, reader and writer.
//
// The reader accepts the "ooTextFile" long and short text formats in UTF-8,
// UTF-16 (with or without BOM) or Latin-1. The writer always emits the long
// format in UTF-8. Times are written as the shortest decimal that reads back
// to the same double, so parse(serialize(g)) == g holds exactly.

#include "alignval/error.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace alignval {

// Boundaries closer than this are treated as shared when reading a tier.
inline constexpr double kContiguityTolerance = 1e-9;

struct Interval {
    double xmin = 0.0;
    double xmax = 0.0;
    std::string text;

    double duration() const noexcept { return xmax - xmin; }
    double midpoint() const noexcept { return 0.5 * (xmin + xmax); }
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct IntervalTier {
    std::string name;
    double xmin = 0.0;
    double xmax = 0.0;
    std::vector<Interval> intervals;

    friend bool operator==(const IntervalTier&, const IntervalTier&) = default;
};

struct Point {
    double time = 0.0;
    std::string mark;
    friend bool operator==(const Point&, const Point&) = default;
};

// Retained so files round-trip, but rejected by evaluation code.
struct PointTier {
    std::string name;
    double xmin = 0.0;
    double xmax = 0.0;
    std::vector<Point> points;

    friend bool operator==(const PointTier&, const PointTier&) = default;
};

using Tier = std::variant<IntervalTier, PointTier>;

const std::string& tier_name(const Tier& tier);

struct TextGrid {
    double xmin = 0.0;
    double xmax = 0.0;
    std::vector<Tier> tiers;

    friend bool operator==(const TextGrid&, const TextGrid&) = default;
};

// Converts raw file bytes to UTF-8: UTF-8 (BOM stripped), then UTF-16
// (BOM, or unmistakable NUL byte pattern), then Latin-1.
std::string decode_text(std::string_view bytes);

TextGrid parse_textgrid(std::string_view bytes);
TextGrid read_textgrid(const std::string& path);

std::string serialize_textgrid(const TextGrid& grid);
// Short text format; read-compatible with Praat. Used for fixtures.
std::string serialize_textgrid_short(const TextGrid& grid);

// First tier named `name`. When several tiers share the name an
// "AmbiguousTier" warning goes to `diag`. Throws UnsupportedTier when the
// first match is a point tier.
const IntervalTier* get_tier(const TextGrid& grid, std::string_view name, Diagnostics* diag = nullptr);

// Checks the tier invariants without snapping; throws NonContiguousTier or
// ParseError. Useful for grids built in code.
void validate_tier(const IntervalTier& tier);
void validate(const TextGrid& grid);

}  // namespace alignval
