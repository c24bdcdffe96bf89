#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

// Base of every error the library throws. kind() is a stable identifier
// suitable for reports and CSV diagnostics.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual std::string_view kind() const noexcept { return "Error"; }
};

#define ALIGNVAL_DEFINE_ERROR(Name, Base)                                     \
    class Name : public Base {                                                \
    public:                                                                   \
        using Base::Base;                                                     \
        std::string_view kind() const noexcept override { return #Name; }     \
    }

// textgrid
ALIGNVAL_DEFINE_ERROR(ParseError, Error);
ALIGNVAL_DEFINE_ERROR(MalformedHeader, ParseError);
ALIGNVAL_DEFINE_ERROR(NonContiguousTier, ParseError);
ALIGNVAL_DEFINE_ERROR(EncodingError, ParseError);
ALIGNVAL_DEFINE_ERROR(UnsupportedTier, Error);

// audio
ALIGNVAL_DEFINE_ERROR(AudioError, Error);
ALIGNVAL_DEFINE_ERROR(NotRiff, AudioError);
ALIGNVAL_DEFINE_ERROR(TruncatedFile, AudioError);
ALIGNVAL_DEFINE_ERROR(UnsupportedCodec, AudioError);
ALIGNVAL_DEFINE_ERROR(OutOfRange, Error);

// configuration and lookup
ALIGNVAL_DEFINE_ERROR(ConfigError, Error);
ALIGNVAL_DEFINE_ERROR(InvalidPattern, ConfigError);
ALIGNVAL_DEFINE_ERROR(UnknownPhone, Error);
ALIGNVAL_DEFINE_ERROR(EmptyTier, Error);
ALIGNVAL_DEFINE_ERROR(ShapeMismatch, Error);

// formant analysis
ALIGNVAL_DEFINE_ERROR(AnalysisError, Error);
ALIGNVAL_DEFINE_ERROR(DegenerateFrame, AnalysisError);
ALIGNVAL_DEFINE_ERROR(RootFindingFailure, AnalysisError);
ALIGNVAL_DEFINE_ERROR(TooShort, AnalysisError);
ALIGNVAL_DEFINE_ERROR(NoVoicedFrames, AnalysisError);

#undef ALIGNVAL_DEFINE_ERROR

enum class Severity { info, warning, error };

std::string_view to_string(Severity s) noexcept;

struct Diagnostic {
    Severity severity = Severity::warning;
    std::string code;     // e.g. "AmbiguousTier", "UnmappedGrapheme"
    std::string message;
    std::string file;     // empty when not file-specific
};

// Append-only sink for non-fatal findings. Operations that can produce
// warnings take an optional pointer to one of these.
class Diagnostics {
public:
    void add(Severity severity, std::string code, std::string message, std::string file = {});
    void warn(std::string code, std::string message, std::string file = {}) {
        add(Severity::warning, std::move(code), std::move(message), std::move(file));
    }
    void error(std::string code, std::string message, std::string file = {}) {
        add(Severity::error, std::move(code), std::move(message), std::move(file));
    }
    void append(const Diagnostics& other);

    const std::vector<Diagnostic>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t count(Severity s) const noexcept;
    std::size_t count(std::string_view code) const noexcept;
    bool has_errors() const noexcept { return count(Severity::error) > 0; }

private:
    std::vector<Diagnostic> entries_;
};

}  // namespace alignval
