#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace oscres {

// Raw byte images with labels, as parsed from the IDX pair. Pixels are
// row-major 28x28 bytes per image, in file order.
struct LabeledImageSet {
    std::size_t count = 0;
    int height = 28;
    int width = 28;
    std::vector<std::uint8_t> pixels;  // count * height * width
    std::vector<std::uint8_t> labels;  // count entries, each in [0,9]

    std::span<const std::uint8_t> image(std::size_t i) const {
        const std::size_t sz = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
        return std::span<const std::uint8_t>(pixels).subspan(i * sz, sz);
    }
};

// Big-endian IDX parse. Image magic 0x00000803 with 28x28 dims, label magic
// 0x00000801; item counts must match across the two files.
LabeledImageSet load_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path);

// Inverse of load_idx; used for fixtures and round-trip checks.
void write_idx(const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, const LabeledImageSet& set);

struct SplitSpec {
    std::size_t train = 50000;
    std::size_t validation = 10000;
    std::uint64_t shuffle_seed = 0;
};

struct DatasetSplits {
    LabeledImageSet train;
    LabeledImageSet validation;
};

// Deterministic Fisher-Yates shuffle by spec.shuffle_seed, then partition.
// spec.train + spec.validation must equal set.count.
DatasetSplits split(const LabeledImageSet& set, const SplitSpec& spec);

// Prefix subset (count = 0 means the whole set).
LabeledImageSet subset(const LabeledImageSet& set, std::size_t count);

struct MnistData {
    LabeledImageSet train_full;  // official training file contents
    LabeledImageSet test;        // official test file contents
};

// Loads the four standard files (train-images-idx3-ubyte, ...) from dir.
MnistData load_mnist(const std::filesystem::path& dir);

// Data directory resolution: explicit flag value if nonempty, else the
// OSCRES_DATA_DIR environment variable, else "data/mnist".
std::filesystem::path resolve_data_dir(const std::string& flag_value);

}  // namespace oscres
