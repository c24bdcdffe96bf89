#include "alignval/error.hpp"

#include <algorithm>

namespace alignval {

std::string_view to_string(Severity s) noexcept {
    switch (s) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::error: return "error";
    }
    return "unknown";
}

void Diagnostics::add(Severity severity, std::string code, std::string message, std::string file) {
    entries_.push_back({severity, std::move(code), std::move(message), std::move(file)});
}

void Diagnostics::append(const Diagnostics& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

std::size_t Diagnostics::count(Severity s) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [s](const Diagnostic& d) { return d.severity == s; }));
}

std::size_t Diagnostics::count(std::string_view code) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [code](const Diagnostic& d) { return d.code == code; }));
}

}  // namespace alignval
