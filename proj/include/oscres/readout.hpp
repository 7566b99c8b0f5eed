#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oscres/simulator.hpp"

namespace oscres {

// Sample-major feature storage. Reservoir snapshots are binary and kept as
// bytes; baseline features (pixel intensities) are kept as floats. Both are
// widened to double per batch for training.
class FeatureSet {
public:
    static FeatureSet binary(std::size_t n_samples, std::size_t n_features);
    static FeatureSet real(std::size_t n_samples, std::size_t n_features);

    std::size_t samples() const { return n_; }
    std::size_t features() const { return f_; }
    bool is_binary() const { return binary_storage_; }

    double at(std::size_t i, std::size_t j) const;
    void set_row(std::size_t i, std::span<const std::uint8_t> row);
    void set_row(std::size_t i, std::span<const double> row);

    // dst (f x batch) column b = sample indices[b], widened to double.
    void gather_columns(std::span<const int> indices, Eigen::Ref<Eigen::MatrixXd> dst) const;
    Eigen::VectorXd row_as_vector(std::size_t i) const;

private:
    std::size_t n_ = 0;
    std::size_t f_ = 0;
    bool binary_storage_ = true;
    std::vector<std::uint8_t> bytes_;
    std::vector<float> reals_;
};

// Linear + softmax readout over 10 classes.
struct ReadoutModel {
    Eigen::MatrixXd weights;  // 10 x F
    Eigen::VectorXd bias;     // 10
    bool trained = false;

    static ReadoutModel zeros(Eigen::Index n_features);
    Eigen::Index n_features() const { return weights.cols(); }
};

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 30;
    int batch_size = 128;
    double l2 = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

// Row-major flatten of the snapshot matrix; binary values preserved.
std::vector<std::uint8_t> featurize(const SnapshotMatrix& snap);

// softmax(weights * features + bias) with max-subtraction; entries positive
// and summing to 1.
Eigen::VectorXd predict(const ReadoutModel& model, const Eigen::VectorXd& features);
Eigen::VectorXd predict(const ReadoutModel& model, std::span<const std::uint8_t> features);

// Mini-batch gradient descent on mean cross-entropy + (l2/2)*||weights||^2.
// Deterministic given config.seed: fixed shuffle order, sequential batches,
// fixed accumulation order inside each batch.
ReadoutModel train(const FeatureSet& x, std::span<const int> labels, const TrainConfig& config);

// Fraction of argmax predictions equal to the labels; argmax ties break
// toward the lowest class index.
double evaluate(const ReadoutModel& model, const FeatureSet& x, std::span<const int> labels);

int predict_class(const ReadoutModel& model, const Eigen::VectorXd& features);

// Model persistence: JSON metadata next to a raw little-endian f64 blob
// (weights row-major, then bias).
void save_model(const std::filesystem::path& json_path, const ReadoutModel& model);
ReadoutModel load_model(const std::filesystem::path& json_path);

}  // namespace oscres
