#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "oscres/rng.hpp"

namespace oscres {

// Grayscale image with values in [0,1], row-major.
struct ImageGrid {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    double at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
    double& at(int row, int col) {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
    static ImageGrid zeros(int height, int width) {
        return ImageGrid{height, width,
                         std::vector<double>(static_cast<std::size_t>(height) *
                                             static_cast<std::size_t>(width))};
    }
};

// Drive matrix produced by the encoder: n_ts frames of n_in values each,
// row-major, values in [0,1].
struct TimeSeriesInput {
    int n_ts = 0;
    int n_in = 0;
    std::vector<double> frames;

    std::span<const double> frame(int t) const {
        return std::span<const double>(frames)
            .subspan(static_cast<std::size_t>(t) * static_cast<std::size_t>(n_in),
                     static_cast<std::size_t>(n_in));
    }
};

struct EncodeParams {
    int n_in = 16;
    int n_ts = 2018;      // with stride 1 on a 1024-long traversal: 1009 windows, each twice
    int stride = 1;
    double noise_sigma = 0.05;
    bool augment = false;  // Gaussian-noise augmentation, train-time preprocessing only

    void validate() const;
};

// Bytes-to-grid conversion: raw bytes divided by 255.
ImageGrid image_from_bytes(std::span<const std::uint8_t> bytes, int height, int width);

// 28x28 -> 32x32 separable bilinear interpolation with the half-pixel-center
// convention: source coordinate = (dest + 0.5) * scale - 0.5, clamped.
ImageGrid resize_bilinear(const ImageGrid& img);

// pixel' = clamp(pixel + n, 0, 1), n ~ Normal(0, sigma^2) i.i.d.
ImageGrid add_gaussian_noise(const ImageGrid& img, double sigma, Rng& rng);

// The d-th cell of the order-`order` Hilbert curve on the 2^order x 2^order
// grid; the curve starts at (0,0). Returns (x, y) with x the column index.
std::pair<int, int> hilbert_index_to_xy(int order, long d);

// sequence[d] = img[hilbert_index_to_xy(5, d)] over the 32x32 grid.
std::vector<double> hilbert_traverse(const ImageGrid& img);

// Sliding windows w_j = seq[j*stride .. j*stride + n_in), each repeated
// floor(n_ts/m) consecutive times; the remaining n_ts mod m frames duplicate
// entries from the start of the expanded sequence.
TimeSeriesInput window_embed(std::span<const double> seq, int n_in, int n_ts, int stride = 1);

// Full pipeline: resize -> (optional noise) -> Hilbert traversal -> window
// embedding. rng is only consumed when params.augment is set.
TimeSeriesInput encode_image(const ImageGrid& raw, const EncodeParams& params, Rng& rng);

// Hilbert sequence of the resized (optionally noised) image; the encoder
// output before window embedding. This is also the feature vector of the
// linear baseline.
std::vector<double> encode_hilbert_sequence(const ImageGrid& raw, const EncodeParams& params,
                                            Rng& rng);

// Disk cache of encoded tensors (fixed-shape f64 records, see README).
void write_encoded_cache(const std::filesystem::path& path,
                         const std::vector<TimeSeriesInput>& tensors);
std::vector<TimeSeriesInput> read_encoded_cache(const std::filesystem::path& path);

// Stable hash of the encode parameters, used to key cache files.
std::uint64_t encode_params_hash(const EncodeParams& params);

}  // namespace oscres
