#pragma once

// WAV input and the signal conditioning used before formant analysis.

#include "alignval/error.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alignval {

struct AudioBuffer {
    int sample_rate = 0;
    std::vector<double> samples;  // mono, nominally within [-1, 1]

    double duration() const noexcept {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

enum class WavEncoding { pcm16, float32 };

struct WavInfo {
    int sample_rate = 0;
    int channels = 0;
    WavEncoding encoding = WavEncoding::pcm16;
    std::uint64_t frames = 0;

    double duration() const noexcept { return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0; }
};

// Header-only inspection. `total_size` is the full file size when `bytes`
// holds only a prefix of the file.
WavInfo probe_wav(std::string_view bytes, std::uint64_t total_size);
WavInfo probe_wav_file(const std::string& path);

// Decodes PCM16 or float32, 1-2 channels, into a mono buffer (channel mean).
AudioBuffer read_wav(std::string_view bytes);
AudioBuffer read_wav_file(const std::string& path);

// One vector per channel, all the same length. Used for fixtures and tests.
std::string encode_wav(std::span<const std::vector<double>> channels, int sample_rate, WavEncoding encoding);
std::string encode_wav(const AudioBuffer& buf, WavEncoding encoding = WavEncoding::pcm16);

// Band-limited resampling with a Kaiser-windowed sinc kernel (80 dB design
// attenuation, passband edge at 90% of the lower Nyquist frequency).
// Output length is round(n * target / source).
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

// y[n] = x[n] - a*x[n-1], a = exp(-2*pi*from_hz/rate), y[0] = x[0].
AudioBuffer pre_emphasis(const AudioBuffer& buf, double from_hz);
double pre_emphasis_coefficient(double from_hz, int sample_rate);

// Round-half-up sample index of time t.
std::int64_t sample_index(double t, int sample_rate);

// Samples [round(t0*rate), round(t1*rate)). Throws OutOfRange unless
// 0 <= t0 < t1 <= duration (a 1e-9 s overshoot of the end is tolerated).
AudioBuffer extract_segment(const AudioBuffer& buf, double t0, double t1);

// Like extract_segment but never throws for out-of-file spans: samples
// outside the buffer read as zero.
std::vector<double> padded_span(const AudioBuffer& buf, std::int64_t first, std::int64_t count);

// Praat's Gaussian analysis window of n samples (edges at exp(-12)).
std::vector<double> gaussian_window(std::size_t n);

}  // namespace alignval
