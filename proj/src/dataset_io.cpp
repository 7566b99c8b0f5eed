#include "oscres/dataset_io.hpp"

#include <cstdlib>
#include <fstream>
#include <numeric>

#include "oscres/errors.hpp"
#include "oscres/rng.hpp"

namespace oscres {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& in, const std::filesystem::path& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("I/O error: truncated header in " + path.string());
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

LabeledImageSet load_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw DataError("I/O error: cannot open " + images_path.string());
    if (read_u32_be(img, images_path) != kImageMagic)
        throw DataError("format error: bad image magic in " + images_path.string());
    const std::uint32_t n_images = read_u32_be(img, images_path);
    const std::uint32_t rows = read_u32_be(img, images_path);
    const std::uint32_t cols = read_u32_be(img, images_path);
    if (rows != 28 || cols != 28)
        throw DataError("format error: expected 28x28 images in " + images_path.string());

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataError("I/O error: cannot open " + labels_path.string());
    if (read_u32_be(lab, labels_path) != kLabelMagic)
        throw DataError("format error: bad label magic in " + labels_path.string());
    const std::uint32_t n_labels = read_u32_be(lab, labels_path);
    if (n_images != n_labels)
        throw DataError("consistency error: image/label counts differ (" +
                        std::to_string(n_images) + " vs " + std::to_string(n_labels) + ")");

    LabeledImageSet set;
    set.count = n_images;
    set.pixels.resize(static_cast<std::size_t>(n_images) * 28 * 28);
    img.read(reinterpret_cast<char*>(set.pixels.data()),
             static_cast<std::streamsize>(set.pixels.size()));
    if (img.gcount() != static_cast<std::streamsize>(set.pixels.size()))
        throw DataError("I/O error: truncated image payload in " + images_path.string());
    set.labels.resize(n_labels);
    lab.read(reinterpret_cast<char*>(set.labels.data()),
             static_cast<std::streamsize>(set.labels.size()));
    if (lab.gcount() != static_cast<std::streamsize>(set.labels.size()))
        throw DataError("I/O error: truncated label payload in " + labels_path.string());
    for (std::uint8_t l : set.labels)
        if (l > 9) throw DataError("format error: label outside [0,9]");
    return set;
}

void write_idx(const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, const LabeledImageSet& set) {
    if (set.labels.size() != set.count ||
        set.pixels.size() != set.count * static_cast<std::size_t>(set.height) *
                                 static_cast<std::size_t>(set.width))
        throw DimensionError("image set fields are inconsistent");
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw DataError("I/O error: cannot open " + images_path.string());
    write_u32_be(img, kImageMagic);
    write_u32_be(img, static_cast<std::uint32_t>(set.count));
    write_u32_be(img, static_cast<std::uint32_t>(set.height));
    write_u32_be(img, static_cast<std::uint32_t>(set.width));
    img.write(reinterpret_cast<const char*>(set.pixels.data()),
              static_cast<std::streamsize>(set.pixels.size()));
    if (!img) throw DataError("I/O error: write failure on " + images_path.string());

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataError("I/O error: cannot open " + labels_path.string());
    write_u32_be(lab, kLabelMagic);
    write_u32_be(lab, static_cast<std::uint32_t>(set.count));
    lab.write(reinterpret_cast<const char*>(set.labels.data()),
              static_cast<std::streamsize>(set.labels.size()));
    if (!lab) throw DataError("I/O error: write failure on " + labels_path.string());
}

namespace {

LabeledImageSet gather(const LabeledImageSet& set, std::span<const std::size_t> indices) {
    LabeledImageSet out;
    out.count = indices.size();
    out.height = set.height;
    out.width = set.width;
    const std::size_t sz = static_cast<std::size_t>(set.height) * static_cast<std::size_t>(set.width);
    out.pixels.resize(out.count * sz);
    out.labels.resize(out.count);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto img = set.image(indices[i]);
        std::copy(img.begin(), img.end(), out.pixels.begin() + static_cast<std::ptrdiff_t>(i * sz));
        out.labels[i] = set.labels[indices[i]];
    }
    return out;
}

}  // namespace

DatasetSplits split(const LabeledImageSet& set, const SplitSpec& spec) {
    if (spec.train + spec.validation != set.count)
        throw ConfigError("split sizes must sum to the set size (" + std::to_string(set.count) +
                          "), got " + std::to_string(spec.train + spec.validation));
    std::vector<std::size_t> order(set.count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(spec.shuffle_seed);
    for (std::size_t i = set.count; i > 1; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    DatasetSplits splits;
    splits.train = gather(set, std::span<const std::size_t>(order).first(spec.train));
    splits.validation =
        gather(set, std::span<const std::size_t>(order).subspan(spec.train, spec.validation));
    return splits;
}

LabeledImageSet subset(const LabeledImageSet& set, std::size_t count) {
    if (count == 0 || count >= set.count) return set;
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return gather(set, idx);
}

MnistData load_mnist(const std::filesystem::path& dir) {
    MnistData data;
    data.train_full = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    data.test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
    return data;
}

std::filesystem::path resolve_data_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("OSCRES_DATA_DIR"); env && *env) return env;
    return "data/mnist";
}

}  // namespace oscres
