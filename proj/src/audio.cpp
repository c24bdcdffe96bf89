#include "alignval/audio.hpp"

#include "alignval/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace alignval {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(std::string_view b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t le32(std::string_view b, std::size_t at) {
    return static_cast<std::uint32_t>(le16(b, at)) | (static_cast<std::uint32_t>(le16(b, at + 2)) << 16);
}

struct Layout {
    WavInfo info;
    std::uint16_t block_align = 0;
    std::uint64_t data_offset = 0;
    std::uint64_t data_size = 0;
};

Layout parse_layout(std::string_view bytes, std::uint64_t total_size) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw NotRiff("not a RIFF/WAVE file");

    Layout layout;
    bool have_fmt = false;
    std::uint16_t format = 0, bits = 0;
    std::size_t pos = 12;
    while (true) {
        if (pos + 8 > bytes.size()) {
            if (!have_fmt) throw TruncatedFile("file ends before the fmt chunk");
            throw TruncatedFile("file ends before the data chunk");
        }
        const std::string_view id = bytes.substr(pos, 4);
        const std::uint64_t size = le32(bytes, pos + 4);
        const std::uint64_t body = pos + 8;
        if (id == "fmt ") {
            if (size < 16 || body + size > bytes.size()) throw TruncatedFile("fmt chunk is truncated");
            format = le16(bytes, body);
            layout.info.channels = le16(bytes, body + 2);
            layout.info.sample_rate = static_cast<int>(le32(bytes, body + 4));
            layout.block_align = le16(bytes, body + 12);
            bits = le16(bytes, body + 14);
            if (format == kFormatExtensible) {
                if (size < 40) throw UnsupportedCodec("WAVE_FORMAT_EXTENSIBLE without a sub-format");
                format = le16(bytes, body + 24);
            }
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw UnsupportedCodec("data chunk precedes fmt chunk");
            if (body + size > total_size)
                throw TruncatedFile(fmt::format("data chunk declares {} bytes but only {} remain", size,
                                                total_size > body ? total_size - body : 0));
            layout.data_offset = body;
            layout.data_size = size;
            break;
        }
        pos = static_cast<std::size_t>(body + size + (size & 1));
        if (pos > total_size) throw TruncatedFile("chunk extends past end of file");
    }

    if (format == kFormatPcm && bits == 16) layout.info.encoding = WavEncoding::pcm16;
    else if (format == kFormatFloat && bits == 32) layout.info.encoding = WavEncoding::float32;
    else throw UnsupportedCodec(fmt::format("unsupported WAV codec (format tag {}, {} bits)", format, bits));

    if (layout.info.channels < 1 || layout.info.channels > 2)
        throw UnsupportedCodec(fmt::format("{} channels; only mono and stereo are supported", layout.info.channels));
    if (layout.info.sample_rate <= 0) throw UnsupportedCodec("sample rate must be positive");
    const std::uint16_t expected_align = static_cast<std::uint16_t>(layout.info.channels * bits / 8);
    if (layout.block_align != expected_align) layout.block_align = expected_align;
    layout.info.frames = layout.data_size / layout.block_align;
    return layout;
}

}  // namespace

WavInfo probe_wav(std::string_view bytes, std::uint64_t total_size) {
    return parse_layout(bytes, total_size).info;
}

WavInfo probe_wav_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    const auto total = static_cast<std::uint64_t>(std::filesystem::file_size(path));
    std::string head(static_cast<std::size_t>(std::min<std::uint64_t>(total, 1 << 20)), '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    return probe_wav(head, total);
}

AudioBuffer read_wav(std::string_view bytes) {
    const Layout layout = parse_layout(bytes, bytes.size());
    const auto channels = static_cast<std::size_t>(layout.info.channels);
    const auto frames = static_cast<std::size_t>(layout.info.frames);
    AudioBuffer buf;
    buf.sample_rate = layout.info.sample_rate;
    buf.samples.resize(frames);
    const char* data = bytes.data() + layout.data_offset;
    for (std::size_t f = 0; f < frames; ++f) {
        double sum = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = f * layout.block_align;
            if (layout.info.encoding == WavEncoding::pcm16) {
                std::int16_t v;
                std::memcpy(&v, data + at + c * 2, 2);
                sum += v / 32768.0;
            } else {
                float v;
                std::memcpy(&v, data + at + c * 4, 4);
                if (!std::isfinite(v)) throw AudioError(fmt::format("non-finite sample at frame {}", f));
                sum += v;
            }
        }
        buf.samples[f] = sum / static_cast<double>(channels);
    }
    return buf;
}

AudioBuffer read_wav_file(const std::string& path) {
    return read_wav(text::read_file(path));
}

std::string encode_wav(std::span<const std::vector<double>> channels, int sample_rate, WavEncoding encoding) {
    if (channels.empty()) throw std::invalid_argument("encode_wav: no channels");
    const std::size_t frames = channels.front().size();
    for (const auto& ch : channels)
        if (ch.size() != frames) throw std::invalid_argument("encode_wav: channel lengths differ");
    const std::uint16_t bytes_per_sample = encoding == WavEncoding::pcm16 ? 2 : 4;
    const auto nch = static_cast<std::uint16_t>(channels.size());
    const std::uint32_t data_size = static_cast<std::uint32_t>(frames * nch * bytes_per_sample);

    std::string out;
    out.reserve(44 + data_size);
    auto put16 = [&](std::uint16_t v) { out.push_back(static_cast<char>(v & 0xFF)); out.push_back(static_cast<char>(v >> 8)); };
    auto put32 = [&](std::uint32_t v) { put16(static_cast<std::uint16_t>(v & 0xFFFF)); put16(static_cast<std::uint16_t>(v >> 16)); };
    out += "RIFF";
    put32(36 + data_size);
    out += "WAVEfmt ";
    put32(16);
    put16(encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat);
    put16(nch);
    put32(static_cast<std::uint32_t>(sample_rate));
    put32(static_cast<std::uint32_t>(sample_rate) * nch * bytes_per_sample);
    put16(static_cast<std::uint16_t>(nch * bytes_per_sample));
    put16(static_cast<std::uint16_t>(bytes_per_sample * 8));
    out += "data";
    put32(data_size);
    for (std::size_t f = 0; f < frames; ++f) {
        for (const auto& ch : channels) {
            if (encoding == WavEncoding::pcm16) {
                const double scaled = std::round(std::clamp(ch[f], -1.0, 1.0) * 32768.0);
                const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
                put16(static_cast<std::uint16_t>(v));
            } else {
                const auto v = static_cast<float>(ch[f]);
                std::uint32_t bits;
                std::memcpy(&bits, &v, 4);
                put32(bits);
            }
        }
    }
    return out;
}

std::string encode_wav(const AudioBuffer& buf, WavEncoding encoding) {
    return encode_wav(std::span<const std::vector<double>>(&buf.samples, 1), buf.sample_rate, encoding);
}

// --------------------------------------------------------------- resampling

namespace {

constexpr int kZeroCrossings = 32;
constexpr int kTableResolution = 1024;  // entries per zero crossing
constexpr double kPassFraction = 0.9;
constexpr double kKaiserBeta = 7.857;  // 0.1102 * (80 - 8.7)

// sinc(v) * kaiser(v / kZeroCrossings) for v in [0, kZeroCrossings].
const std::vector<double>& kernel_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kZeroCrossings * kTableResolution + 2, 0.0);
        const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double v = static_cast<double>(i) / kTableResolution;
            if (v >= kZeroCrossings) break;
            const double r = v / kZeroCrossings;
            const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
            const double s = v == 0.0 ? 1.0 : std::sin(std::numbers::pi * v) / (std::numbers::pi * v);
            t[i] = s * w;
        }
        return t;
    }();
    return table;
}

double kernel(double v) {
    const auto& t = kernel_table();
    v = std::fabs(v);
    if (v >= kZeroCrossings) return 0.0;
    const double pos = v * kTableResolution;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return t[i] + frac * (t[i + 1] - t[i]);
}

}  // namespace

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
    if (target_rate <= 0) throw std::invalid_argument("resample: target rate must be positive");
    if (buf.sample_rate <= 0) throw std::invalid_argument("resample: source rate must be positive");
    if (target_rate == buf.sample_rate) return buf;

    const double src = buf.sample_rate;
    const double dst = target_rate;
    // cutoff in cycles per source sample
    const double fc = kPassFraction * 0.5 * std::min(src, dst) / src;
    const double scale = 2.0 * fc;  // kernel argument per source sample, also DC gain normaliser
    const double half_width = kZeroCrossings / scale;

    const auto n_in = static_cast<std::int64_t>(buf.samples.size());
    const auto n_out = static_cast<std::int64_t>(std::llround(static_cast<double>(n_in) * dst / src));
    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(n_out, 0)));
    for (std::int64_t n = 0; n < n_out; ++n) {
        const double center = static_cast<double>(n) * src / dst;
        const auto k0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(center - half_width)));
        const auto k1 = std::min<std::int64_t>(n_in - 1, static_cast<std::int64_t>(std::floor(center + half_width)));
        double acc = 0.0;
        for (std::int64_t k = k0; k <= k1; ++k)
            acc += buf.samples[static_cast<std::size_t>(k)] * kernel((center - static_cast<double>(k)) * scale);
        out.samples[static_cast<std::size_t>(n)] = acc * scale;
    }
    return out;
}

// ------------------------------------------------------------ conditioning

double pre_emphasis_coefficient(double from_hz, int sample_rate) {
    return std::exp(-2.0 * std::numbers::pi * from_hz / sample_rate);
}

AudioBuffer pre_emphasis(const AudioBuffer& buf, double from_hz) {
    if (!(from_hz > 0.0) || !(from_hz < 0.5 * buf.sample_rate))
        throw std::invalid_argument("pre_emphasis: from_hz must lie in (0, Nyquist)");
    const double a = pre_emphasis_coefficient(from_hz, buf.sample_rate);
    AudioBuffer out;
    out.sample_rate = buf.sample_rate;
    out.samples.resize(buf.samples.size());
    for (std::size_t n = 0; n < buf.samples.size(); ++n)
        out.samples[n] = n == 0 ? buf.samples[0] : buf.samples[n] - a * buf.samples[n - 1];
    return out;
}

std::int64_t sample_index(double t, int sample_rate) {
    return static_cast<std::int64_t>(std::floor(t * sample_rate + 0.5));
}

AudioBuffer extract_segment(const AudioBuffer& buf, double t0, double t1) {
    constexpr double tol = 1e-9;
    const double dur = buf.duration();
    if (!(t0 >= 0.0) || !(t0 < t1) || t1 > dur + tol)
        throw OutOfRange(fmt::format("segment [{}, {}] outside audio of {} s", t0, t1, dur));
    const auto n = static_cast<std::int64_t>(buf.samples.size());
    const auto i0 = std::clamp<std::int64_t>(sample_index(t0, buf.sample_rate), 0, n);
    const auto i1 = std::clamp<std::int64_t>(sample_index(t1, buf.sample_rate), i0, n);
    AudioBuffer out;
    out.sample_rate = buf.sample_rate;
    out.samples.assign(buf.samples.begin() + i0, buf.samples.begin() + i1);
    return out;
}

std::vector<double> padded_span(const AudioBuffer& buf, std::int64_t first, std::int64_t count) {
    std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)), 0.0);
    const auto n = static_cast<std::int64_t>(buf.samples.size());
    for (std::int64_t i = 0; i < count; ++i) {
        const auto k = first + i;
        if (k >= 0 && k < n) out[static_cast<std::size_t>(i)] = buf.samples[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<double> gaussian_window(std::size_t n) {
    std::vector<double> w(n);
    const double mid = 0.5 * static_cast<double>(n + 1);
    const double denom = static_cast<double>(n + 1) * static_cast<double>(n + 1);
    const double edge = std::exp(-12.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double d = static_cast<double>(i) - mid;
        w[i - 1] = (std::exp(-48.0 * d * d / denom) - edge) / (1.0 - edge);
    }
    return w;
}

}  // namespace alignval
