#pragma once

// LPC (Burg) formant measurement of vowel intervals and per-category
// dispersion ellipses in F2/F1 space.
//
// Analysis follows the usual Praat "To Formant (burg)" conventions: the
// signal is resampled to twice the formant ceiling, pre-emphasised, and cut
// into Gaussian-windowed frames whose physical length is twice the nominal
// (effective) window length.

#include "alignval/audio.hpp"
#include "alignval/error.hpp"
#include "alignval/textgrid.hpp"

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

struct FormantConfig {
    int max_formants = 5;
    double ceiling_hz = 5000.0;
    double window_length_s = 0.025;
    double time_step_s = 0.00625;
    double pre_emphasis_from_hz = 50.0;
    double max_bandwidth_hz = 400.0;
    double edge_margin_hz = 50.0;
    // Fraction of the interval, centred, over which frames are averaged.
    double central_fraction = 1.0;

    // Throws ConfigError.
    void validate() const;
    static FormantConfig from_json(std::string_view json);
    std::string to_json() const;
};

// Prediction-error filter coefficients a[1..order] of
// A(z) = 1 + a1 z^-1 + ... + ap z^-p minimising the summed forward and
// backward prediction error. Throws DegenerateFrame for an all-zero or
// constant frame; std::invalid_argument unless frame.size() > order.
std::vector<double> lpc_burg(std::span<const double> frame, std::size_t order);

struct Formant {
    double frequency_hz = 0.0;
    double bandwidth_hz = 0.0;
};

struct FormantFilter {
    double min_hz = 50.0;
    double edge_margin_hz = 50.0;  // upper limit is Nyquist minus this
    double max_bandwidth_hz = 400.0;
};

// Upper-half-plane roots of z^p + a1 z^(p-1) + ... + ap (companion-matrix
// eigenvalues; roots outside the unit circle are reflected inside), mapped
// to f = arg(z) * rate / 2pi and bw = -ln|z| * rate / pi, filtered and
// sorted by frequency. Throws RootFindingFailure.
std::vector<Formant> formants_from_lpc(std::span<const double> coeffs, double sample_rate,
                                       const FormantFilter& filter = {});

// All roots, unfiltered; for tests and diagnostics.
std::vector<std::complex<double>> lpc_roots(std::span<const double> coeffs);

struct VowelToken {
    std::string vowel;
    double f1_hz = 0.0;
    double f2_hz = 0.0;
    Interval interval;
    std::string file;
    std::string model;
    std::size_t frames = 0;  // frames that contributed to the average
};

// Throws OutOfRange, TooShort (interval, after the central fraction, shorter
// than one window) or NoVoicedFrames (no frame had two retained formants).
VowelToken measure_vowel(const AudioBuffer& audio, const Interval& interval, const FormantConfig& cfg = {});

struct VowelEllipse {
    std::string vowel;
    std::string model;
    double center_f2 = 0.0;
    double center_f1 = 0.0;
    double semi_f2 = 0.0;  // population standard deviation of F2
    double semi_f1 = 0.0;
    std::size_t n = 0;

    bool drawable() const noexcept { return n >= 2; }
};

// One entry per (model, vowel) in order of first appearance.
std::vector<VowelEllipse> build_ellipses(std::span<const VowelToken> tokens);

// file,model,vowel,f1_hz,f2_hz,t_start,t_end
std::string tokens_to_csv(std::span<const VowelToken> tokens);
std::vector<VowelToken> tokens_from_csv(std::string_view csv);

}  // namespace alignval
