#pragma once

#include <cmath>
#include <cstddef>

namespace alignval {

// Mergeable summary of a sample: count, mean, sum of squared deviations
// (Welford / Chan et al.) and sum of absolute values. Population variance.
class RunningStats {
public:
    void add(double x) noexcept {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
        sum_abs_ += std::fabs(x);
    }

    void merge(const RunningStats& o) noexcept {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n_ + o.n_);
        const double delta = o.mean_ - mean_;
        mean_ += delta * static_cast<double>(o.n_) / total;
        m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / total;
        sum_abs_ += o.sum_abs_;
        n_ += o.n_;
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return n_ ? mean_ : 0.0; }
    double variance() const noexcept { return n_ ? std::fmax(m2_ / static_cast<double>(n_), 0.0) : 0.0; }
    double stddev() const noexcept { return std::sqrt(variance()); }
    double mean_abs() const noexcept { return n_ ? sum_abs_ / static_cast<double>(n_) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double sum_abs_ = 0.0;
};

}  // namespace alignval
