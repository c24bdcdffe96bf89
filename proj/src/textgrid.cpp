#include "alignval/textgrid.hpp"

#include "alignval/text.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdint>

namespace alignval {

const std::string& tier_name(const Tier& tier) {
    return std::visit([](const auto& t) -> const std::string& { return t.name; }, tier);
}

// ---------------------------------------------------------------- decoding

namespace {

std::string decode_utf16(std::string_view bytes, bool big_endian) {
    if (bytes.size() % 2 != 0) throw EncodingError("UTF-16 input has an odd number of bytes");
    std::string out;
    out.reserve(bytes.size());
    auto unit = [&](std::size_t i) -> char32_t {
        const auto a = static_cast<unsigned char>(bytes[i]);
        const auto b = static_cast<unsigned char>(bytes[i + 1]);
        return big_endian ? static_cast<char32_t>((a << 8) | b) : static_cast<char32_t>((b << 8) | a);
    };
    for (std::size_t i = 0; i < bytes.size(); i += 2) {
        char32_t u = unit(i);
        if (u >= 0xD800 && u <= 0xDBFF) {
            if (i + 3 >= bytes.size()) throw EncodingError("UTF-16 input ends inside a surrogate pair");
            const char32_t lo = unit(i + 2);
            if (lo < 0xDC00 || lo > 0xDFFF) throw EncodingError("unpaired UTF-16 high surrogate");
            u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
            i += 2;
        } else if (u >= 0xDC00 && u <= 0xDFFF) {
            throw EncodingError("unpaired UTF-16 low surrogate");
        }
        text::append_utf8(out, u);
    }
    return out;
}

// Returns +1 for little-endian, -1 for big-endian, 0 when the bytes do not
// look like BOM-less UTF-16.
int sniff_utf16(std::string_view bytes) {
    if (bytes.size() < 4 || bytes.size() % 2 != 0) return 0;
    std::size_t even_nul = 0, odd_nul = 0;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] == '\0') (i % 2 == 0 ? even_nul : odd_nul)++;
    }
    const std::size_t half = bytes.size() / 2;
    if (odd_nul * 2 >= half && even_nul * 8 < half) return 1;
    if (even_nul * 2 >= half && odd_nul * 8 < half) return -1;
    return 0;
}

}  // namespace

std::string decode_text(std::string_view bytes) {
    if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xEF &&
        static_cast<unsigned char>(bytes[1]) == 0xBB && static_cast<unsigned char>(bytes[2]) == 0xBF) {
        bytes.remove_prefix(3);
        if (!text::is_valid_utf8(bytes)) throw EncodingError("UTF-8 byte order mark followed by invalid UTF-8");
        return std::string(bytes);
    }
    if (bytes.size() >= 2) {
        const auto b0 = static_cast<unsigned char>(bytes[0]);
        const auto b1 = static_cast<unsigned char>(bytes[1]);
        if (b0 == 0xFF && b1 == 0xFE) return decode_utf16(bytes.substr(2), false);
        if (b0 == 0xFE && b1 == 0xFF) return decode_utf16(bytes.substr(2), true);
    }
    const bool has_nul = bytes.find('\0') != std::string_view::npos;
    if (!has_nul && text::is_valid_utf8(bytes)) return std::string(bytes);
    if (has_nul) {
        if (const int endian = sniff_utf16(bytes); endian != 0) return decode_utf16(bytes, endian < 0);
        if (text::is_valid_utf8(bytes)) return std::string(bytes);
    }
    std::string out;
    out.reserve(bytes.size() * 2);
    for (char c : bytes) text::append_utf8(out, static_cast<unsigned char>(c));
    return out;
}

// ----------------------------------------------------------------- reading

namespace {

struct Token {
    enum class Type { number, string, flag, end } type = Type::end;
    double number = 0.0;
    std::string text;
    std::size_t line = 0;
};

// Praat's text-file reader only looks at numbers, quoted strings and <flags>;
// labels such as "xmin =" or "item [1]:" are decoration. Treating them that
// way lets one token stream serve both the long and the short format.
class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                ++pos_;
            } else if (c == '!') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '[') {
                while (pos_ < src_.size() && src_[pos_] != ']' && src_[pos_] != '\n') ++pos_;
                if (pos_ < src_.size() && src_[pos_] == ']') ++pos_;
            } else if (c == '"') {
                return read_string();
            } else if (c == '<') {
                return read_flag();
            } else if ((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.') {
                return read_number();
            } else if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_') {
                while (pos_ < src_.size() && is_ident(src_[pos_])) ++pos_;
            } else {
                ++pos_;
            }
        }
        Token t;
        t.line = line_;
        return t;
    }

    std::size_t line() const noexcept { return line_; }

private:
    static bool is_ident(char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    }

    Token read_string() {
        Token t;
        t.type = Token::Type::string;
        t.line = line_;
        ++pos_;
        while (true) {
            if (pos_ >= src_.size()) throw ParseError(fmt::format("line {}: unterminated string", t.line));
            const char c = src_[pos_];
            if (c == '"') {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '"') {
                    t.text.push_back('"');
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                return t;
            }
            if (c == '\n') ++line_;
            t.text.push_back(c);
            ++pos_;
        }
    }

    Token read_flag() {
        Token t;
        t.type = Token::Type::flag;
        t.line = line_;
        const auto close = src_.find('>', pos_);
        if (close == std::string_view::npos || close - pos_ > 32)
            throw ParseError(fmt::format("line {}: malformed <flag>", line_));
        t.text = std::string(src_.substr(pos_ + 1, close - pos_ - 1));
        pos_ = close + 1;
        return t;
    }

    Token read_number() {
        Token t;
        t.type = Token::Type::number;
        t.line = line_;
        const auto start = pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if ((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.' || c == 'e' || c == 'E') ++pos_;
            else break;
        }
        const auto raw = src_.substr(start, pos_ - start);
        const auto value = text::parse_real(raw);
        if (!value || !std::isfinite(*value))
            throw ParseError(fmt::format("line {}: invalid number '{}'", line_, raw));
        t.number = *value;
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

class Reader {
public:
    explicit Reader(std::string_view src) : lex_(src) {}

    TextGrid read() {
        Token file_type = lex_.next();
        if (file_type.type != Token::Type::string || file_type.text.rfind("ooTextFile", 0) != 0)
            throw MalformedHeader("missing \"ooTextFile\" file type line");
        Token object_class = lex_.next();
        if (object_class.type != Token::Type::string || object_class.text != "TextGrid")
            throw MalformedHeader("object class is not \"TextGrid\"");

        TextGrid grid;
        grid.xmin = number("TextGrid xmin");
        grid.xmax = number("TextGrid xmax");
        if (!(grid.xmin < grid.xmax))
            throw ParseError(fmt::format("TextGrid xmin {} is not below xmax {}", grid.xmin, grid.xmax));

        Token flag = lex_.next();
        if (flag.type != Token::Type::flag) throw ParseError(fmt::format("line {}: expected <exists> or <absent>", flag.line));
        if (flag.text == "absent") return grid;
        if (flag.text != "exists") throw ParseError(fmt::format("line {}: unknown flag <{}>", flag.line, flag.text));

        const auto tier_count = count("tier count");
        for (std::size_t i = 0; i < tier_count; ++i) {
            Token cls = lex_.next();
            if (cls.type != Token::Type::string) throw ParseError(fmt::format("line {}: expected tier class", cls.line));
            if (cls.text == "IntervalTier") {
                grid.tiers.emplace_back(read_interval_tier(grid));
            } else if (cls.text == "TextTier") {
                grid.tiers.emplace_back(read_point_tier(grid));
            } else {
                throw ParseError(fmt::format("line {}: unsupported tier class \"{}\"", cls.line, cls.text));
            }
        }
        return grid;
    }

private:
    double number(std::string_view what) {
        Token t = lex_.next();
        if (t.type != Token::Type::number)
            throw ParseError(fmt::format("line {}: expected number for {}", t.line, what));
        return t.number;
    }

    std::size_t count(std::string_view what) {
        const double v = number(what);
        if (v < 0 || v != std::floor(v) || v > 1e9)
            throw ParseError(fmt::format("line {}: invalid {} {}", lex_.line(), what, v));
        return static_cast<std::size_t>(v);
    }

    std::string string(std::string_view what) {
        Token t = lex_.next();
        if (t.type != Token::Type::string)
            throw ParseError(fmt::format("line {}: expected quoted string for {}", t.line, what));
        return std::move(t.text);
    }

    static void check_within(const TextGrid& grid, std::string_view name, double xmin, double xmax) {
        if (!(xmin < xmax))
            throw ParseError(fmt::format("tier '{}': xmin {} is not below xmax {}", name, xmin, xmax));
        if (xmin < grid.xmin - kContiguityTolerance || xmax > grid.xmax + kContiguityTolerance)
            throw ParseError(fmt::format("tier '{}' [{}, {}] lies outside the TextGrid range [{}, {}]", name, xmin,
                                         xmax, grid.xmin, grid.xmax));
    }

    IntervalTier read_interval_tier(const TextGrid& grid) {
        IntervalTier tier;
        tier.name = string("tier name");
        tier.xmin = number("tier xmin");
        tier.xmax = number("tier xmax");
        check_within(grid, tier.name, tier.xmin, tier.xmax);
        const auto n = count("interval count");
        if (n == 0) throw ParseError(fmt::format("tier '{}' has no intervals", tier.name));
        for (std::size_t i = 0; i < n; ++i) {
            Interval iv;
            iv.xmin = number("interval xmin");
            iv.xmax = number("interval xmax");
            iv.text = string("interval text");
            tier.intervals.push_back(std::move(iv));
        }
        snap_and_check(tier);
        return tier;
    }

    // Shared boundaries within tolerance are snapped to the left interval's
    // xmax; tier edges snap to the tier's own xmin/xmax.
    static void snap_and_check(IntervalTier& tier) {
        auto& ivs = tier.intervals;
        auto misfit = [&](std::string_view where, std::size_t index, double expected, double got) {
            const double d = got - expected;
            const bool gap = where == "end" ? d < 0 : d > 0;
            return NonContiguousTier(fmt::format("tier '{}': {} of {:.6g} s at {} of interval {} (expected {}, found {})",
                                                 tier.name, gap ? "gap" : "overlap", std::fabs(d),
                                                 where == "end" ? "end" : "start", index + 1, expected, got));
        };
        if (std::fabs(ivs.front().xmin - tier.xmin) > kContiguityTolerance)
            throw misfit("start", 0, tier.xmin, ivs.front().xmin);
        ivs.front().xmin = tier.xmin;
        for (std::size_t i = 0; i + 1 < ivs.size(); ++i) {
            if (std::fabs(ivs[i + 1].xmin - ivs[i].xmax) > kContiguityTolerance)
                throw misfit("boundary", i + 1, ivs[i].xmax, ivs[i + 1].xmin);
            ivs[i + 1].xmin = ivs[i].xmax;
        }
        if (std::fabs(ivs.back().xmax - tier.xmax) > kContiguityTolerance)
            throw misfit("end", ivs.size() - 1, tier.xmax, ivs.back().xmax);
        ivs.back().xmax = tier.xmax;
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            if (!(ivs[i].xmin < ivs[i].xmax))
                throw ParseError(fmt::format("tier '{}': interval {} [{}, {}] has non-positive duration", tier.name,
                                             i + 1, ivs[i].xmin, ivs[i].xmax));
        }
    }

    PointTier read_point_tier(const TextGrid& grid) {
        PointTier tier;
        tier.name = string("tier name");
        tier.xmin = number("tier xmin");
        tier.xmax = number("tier xmax");
        check_within(grid, tier.name, tier.xmin, tier.xmax);
        const auto n = count("point count");
        for (std::size_t i = 0; i < n; ++i) {
            Point p;
            p.time = number("point time");
            p.mark = string("point mark");
            if (p.time < tier.xmin - kContiguityTolerance || p.time > tier.xmax + kContiguityTolerance)
                throw ParseError(fmt::format("tier '{}': point {} at {} outside tier range", tier.name, i + 1, p.time));
            tier.points.push_back(std::move(p));
        }
        return tier;
    }

    Lexer lex_;
};

}  // namespace

TextGrid parse_textgrid(std::string_view bytes) {
    const std::string utf8 = decode_text(bytes);
    return Reader(utf8).read();
}

TextGrid read_textgrid(const std::string& path) {
    return parse_textgrid(text::read_file(path));
}

// ----------------------------------------------------------------- writing

namespace {

std::string quoted(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string serialize_textgrid(const TextGrid& grid) {
    using text::format_real;
    std::string out;
    out += "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
    out += fmt::format("xmin = {} \nxmax = {} \n", format_real(grid.xmin), format_real(grid.xmax));
    if (grid.tiers.empty()) {
        out += "tiers? <absent> \n";
        return out;
    }
    out += fmt::format("tiers? <exists> \nsize = {} \nitem []: \n", grid.tiers.size());
    for (std::size_t t = 0; t < grid.tiers.size(); ++t) {
        out += fmt::format("    item [{}]:\n", t + 1);
        if (const auto* it = std::get_if<IntervalTier>(&grid.tiers[t])) {
            out += fmt::format("        class = \"IntervalTier\" \n        name = {} \n", quoted(it->name));
            out += fmt::format("        xmin = {} \n        xmax = {} \n", format_real(it->xmin), format_real(it->xmax));
            out += fmt::format("        intervals: size = {} \n", it->intervals.size());
            for (std::size_t i = 0; i < it->intervals.size(); ++i) {
                const auto& iv = it->intervals[i];
                out += fmt::format("        intervals [{}]:\n            xmin = {} \n            xmax = {} \n"
                                   "            text = {} \n",
                                   i + 1, format_real(iv.xmin), format_real(iv.xmax), quoted(iv.text));
            }
        } else {
            const auto& pt = std::get<PointTier>(grid.tiers[t]);
            out += fmt::format("        class = \"TextTier\" \n        name = {} \n", quoted(pt.name));
            out += fmt::format("        xmin = {} \n        xmax = {} \n", format_real(pt.xmin), format_real(pt.xmax));
            out += fmt::format("        points: size = {} \n", pt.points.size());
            for (std::size_t i = 0; i < pt.points.size(); ++i) {
                out += fmt::format("        points [{}]:\n            number = {} \n            mark = {} \n", i + 1,
                                   format_real(pt.points[i].time), quoted(pt.points[i].mark));
            }
        }
    }
    return out;
}

std::string serialize_textgrid_short(const TextGrid& grid) {
    using text::format_real;
    std::string out = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
    out += format_real(grid.xmin) + "\n" + format_real(grid.xmax) + "\n";
    if (grid.tiers.empty()) return out + "<absent>\n";
    out += fmt::format("<exists>\n{}\n", grid.tiers.size());
    for (const auto& tier : grid.tiers) {
        if (const auto* it = std::get_if<IntervalTier>(&tier)) {
            out += fmt::format("\"IntervalTier\"\n{}\n{}\n{}\n{}\n", quoted(it->name), format_real(it->xmin),
                               format_real(it->xmax), it->intervals.size());
            for (const auto& iv : it->intervals)
                out += fmt::format("{}\n{}\n{}\n", format_real(iv.xmin), format_real(iv.xmax), quoted(iv.text));
        } else {
            const auto& pt = std::get<PointTier>(tier);
            out += fmt::format("\"TextTier\"\n{}\n{}\n{}\n{}\n", quoted(pt.name), format_real(pt.xmin),
                               format_real(pt.xmax), pt.points.size());
            for (const auto& p : pt.points) out += fmt::format("{}\n{}\n", format_real(p.time), quoted(p.mark));
        }
    }
    return out;
}

// ------------------------------------------------------------------ lookup

const IntervalTier* get_tier(const TextGrid& grid, std::string_view name, Diagnostics* diag) {
    const Tier* first = nullptr;
    std::size_t matches = 0;
    for (const auto& tier : grid.tiers) {
        if (tier_name(tier) != name) continue;
        if (!first) first = &tier;
        ++matches;
    }
    if (!first) return nullptr;
    if (matches > 1 && diag)
        diag->warn("AmbiguousTier", fmt::format("{} tiers are named '{}'; using the first", matches, name));
    if (std::holds_alternative<PointTier>(*first))
        throw UnsupportedTier(fmt::format("tier '{}' is a point tier; interval tier required", name));
    return &std::get<IntervalTier>(*first);
}

void validate_tier(const IntervalTier& tier) {
    if (tier.intervals.empty()) throw ParseError(fmt::format("tier '{}' has no intervals", tier.name));
    const auto& ivs = tier.intervals;
    if (std::fabs(ivs.front().xmin - tier.xmin) > kContiguityTolerance ||
        std::fabs(ivs.back().xmax - tier.xmax) > kContiguityTolerance)
        throw NonContiguousTier(fmt::format("tier '{}': intervals do not span the tier range", tier.name));
    for (std::size_t i = 0; i < ivs.size(); ++i) {
        if (!(ivs[i].xmin < ivs[i].xmax))
            throw ParseError(fmt::format("tier '{}': interval {} has non-positive duration", tier.name, i + 1));
        if (i + 1 < ivs.size() && std::fabs(ivs[i + 1].xmin - ivs[i].xmax) > kContiguityTolerance)
            throw NonContiguousTier(fmt::format("tier '{}': discontinuity at interval {}", tier.name, i + 2));
    }
}

void validate(const TextGrid& grid) {
    if (!(grid.xmin < grid.xmax)) throw ParseError("TextGrid xmin is not below xmax");
    for (const auto& tier : grid.tiers) {
        std::visit(
            [&](const auto& t) {
                if (t.xmin < grid.xmin - kContiguityTolerance || t.xmax > grid.xmax + kContiguityTolerance)
                    throw ParseError(fmt::format("tier '{}' lies outside the TextGrid range", t.name));
            },
            tier);
        if (const auto* it = std::get_if<IntervalTier>(&tier)) validate_tier(*it);
    }
}

}  // namespace alignval
