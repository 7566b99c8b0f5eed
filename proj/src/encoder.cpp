#include "oscres/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "oscres/errors.hpp"

namespace oscres {

void EncodeParams::validate() const {
    if (n_in < 1) throw ConfigError("n_in must be >= 1");
    if (n_ts < 1) throw ConfigError("n_ts must be >= 1");
    if (stride < 1) throw ConfigError("window stride must be >= 1");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
}

ImageGrid image_from_bytes(std::span<const std::uint8_t> bytes, int height, int width) {
    if (bytes.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
        throw DimensionError("image byte count does not match the requested shape");
    ImageGrid img = ImageGrid::zeros(height, width);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.pixels[i] = static_cast<double>(bytes[i]) / 255.0;
    return img;
}

ImageGrid resize_bilinear(const ImageGrid& img) {
    if (img.height != 28 || img.width != 28)
        throw DimensionError("resize_bilinear expects a 28x28 source image");
    constexpr int kOut = 32;
    const double scale = 28.0 / static_cast<double>(kOut);
    ImageGrid out = ImageGrid::zeros(kOut, kOut);
    for (int dy = 0; dy < kOut; ++dy) {
        const double sy = std::clamp((dy + 0.5) * scale - 0.5, 0.0, 27.0);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, 27);
        const double wy = sy - y0;
        for (int dx = 0; dx < kOut; ++dx) {
            const double sx = std::clamp((dx + 0.5) * scale - 0.5, 0.0, 27.0);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, 27);
            const double wx = sx - x0;
            out.at(dy, dx) = (1.0 - wy) * ((1.0 - wx) * img.at(y0, x0) + wx * img.at(y0, x1)) +
                             wy * ((1.0 - wx) * img.at(y1, x0) + wx * img.at(y1, x1));
        }
    }
    return out;
}

ImageGrid add_gaussian_noise(const ImageGrid& img, double sigma, Rng& rng) {
    if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    ImageGrid out = img;
    if (sigma == 0.0) return out;
    for (auto& px : out.pixels) px = std::clamp(px + rng.normal(0.0, sigma), 0.0, 1.0);
    return out;
}

std::pair<int, int> hilbert_index_to_xy(int order, long d) {
    if (order < 1) throw ConfigError("Hilbert order must be >= 1");
    const long cells = 1L << (2 * order);
    if (d < 0 || d >= cells) throw DimensionError("Hilbert index out of range");
    const int n = 1 << order;
    int x = 0;
    int y = 0;
    long t = d;
    for (int s = 1; s < n; s *= 2) {
        const int rx = static_cast<int>(1 & (t / 2));
        const int ry = static_cast<int>(1 & (t ^ rx));
        if (ry == 0) {  // rotate quadrant
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
    return {x, y};
}

std::vector<double> hilbert_traverse(const ImageGrid& img) {
    if (img.height != 32 || img.width != 32)
        throw DimensionError("hilbert_traverse expects a 32x32 image");
    std::vector<double> seq(1024);
    for (long d = 0; d < 1024; ++d) {
        const auto [x, y] = hilbert_index_to_xy(5, d);
        seq[static_cast<std::size_t>(d)] = img.at(y, x);
    }
    return seq;
}

TimeSeriesInput window_embed(std::span<const double> seq, int n_in, int n_ts, int stride) {
    if (n_in < 1 || stride < 1 || n_ts < 1) throw ConfigError("window parameters must be positive");
    const long l = static_cast<long>(seq.size());
    if (n_in > l) throw EmbeddingError("window wider than the sequence");
    const long m = (l - n_in) / stride + 1;  // window count
    if (m > n_ts)
        throw EmbeddingError("embedding would drop windows: " + std::to_string(m) +
                             " windows exceed n_ts = " + std::to_string(n_ts));
    const long reps = n_ts / m;
    const long remainder = n_ts % m;

    TimeSeriesInput out;
    out.n_ts = n_ts;
    out.n_in = n_in;
    out.frames.resize(static_cast<std::size_t>(n_ts) * static_cast<std::size_t>(n_in));
    auto emit = [&](long frame_idx, long window_idx) {
        const double* src = seq.data() + window_idx * stride;
        std::copy(src, src + n_in,
                  out.frames.data() + frame_idx * n_in);
    };
    // Expanded sequence: every window `reps` times, then the remainder
    // duplicates the expanded sequence from its start.
    for (long t = 0; t < m * reps; ++t) emit(t, t / reps);
    for (long s = 0; s < remainder; ++s) emit(m * reps + s, s / reps);
    return out;
}

TimeSeriesInput encode_image(const ImageGrid& raw, const EncodeParams& params, Rng& rng) {
    params.validate();
    const auto seq = encode_hilbert_sequence(raw, params, rng);
    return window_embed(seq, params.n_in, params.n_ts, params.stride);
}

std::vector<double> encode_hilbert_sequence(const ImageGrid& raw, const EncodeParams& params,
                                            Rng& rng) {
    params.validate();
    ImageGrid resized = resize_bilinear(raw);
    if (params.augment && params.noise_sigma > 0.0)
        resized = add_gaussian_noise(resized, params.noise_sigma, rng);
    return hilbert_traverse(resized);
}

namespace {
constexpr char kCacheMagic[8] = {'O', 'S', 'R', 'S', 'E', 'N', 'C', '1'};
}

void write_encoded_cache(const std::filesystem::path& path,
                         const std::vector<TimeSeriesInput>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open cache file for writing: " + path.string());
    const std::uint64_t count = tensors.size();
    const std::uint64_t n_ts = count ? static_cast<std::uint64_t>(tensors[0].n_ts) : 0;
    const std::uint64_t n_in = count ? static_cast<std::uint64_t>(tensors[0].n_in) : 0;
    out.write(kCacheMagic, sizeof(kCacheMagic));
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(&n_ts), 8);
    out.write(reinterpret_cast<const char*>(&n_in), 8);
    for (const auto& t : tensors) {
        if (static_cast<std::uint64_t>(t.n_ts) != n_ts ||
            static_cast<std::uint64_t>(t.n_in) != n_in)
            throw DimensionError("cache tensors must share one shape");
        out.write(reinterpret_cast<const char*>(t.frames.data()),
                  static_cast<std::streamsize>(t.frames.size() * sizeof(double)));
    }
    if (!out) throw DataError("write failure on cache file: " + path.string());
}

std::vector<TimeSeriesInput> read_encoded_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open cache file: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw DataError("bad cache magic in " + path.string());
    std::uint64_t count = 0, n_ts = 0, n_in = 0;
    in.read(reinterpret_cast<char*>(&count), 8);
    in.read(reinterpret_cast<char*>(&n_ts), 8);
    in.read(reinterpret_cast<char*>(&n_in), 8);
    if (!in) throw DataError("truncated cache header in " + path.string());
    std::vector<TimeSeriesInput> tensors(count);
    for (auto& t : tensors) {
        t.n_ts = static_cast<int>(n_ts);
        t.n_in = static_cast<int>(n_in);
        t.frames.resize(n_ts * n_in);
        in.read(reinterpret_cast<char*>(t.frames.data()),
                static_cast<std::streamsize>(t.frames.size() * sizeof(double)));
        if (!in) throw DataError("truncated cache body in " + path.string());
    }
    return tensors;
}

std::uint64_t encode_params_hash(const EncodeParams& params) {
    std::uint64_t h = 0x9ae16a3b2f90404full;
    auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
    mix(static_cast<std::uint64_t>(params.n_in));
    mix(static_cast<std::uint64_t>(params.n_ts));
    mix(static_cast<std::uint64_t>(params.stride));
    std::uint64_t sigma_bits;
    static_assert(sizeof(sigma_bits) == sizeof(params.noise_sigma));
    std::memcpy(&sigma_bits, &params.noise_sigma, sizeof(sigma_bits));
    mix(sigma_bits);
    mix(params.augment ? 1u : 0u);
    return h;
}

}  // namespace oscres
