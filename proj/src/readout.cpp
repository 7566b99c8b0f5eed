#include "oscres/readout.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "oscres/errors.hpp"
#include "oscres/rng.hpp"

namespace oscres {

FeatureSet FeatureSet::binary(std::size_t n_samples, std::size_t n_features) {
    FeatureSet fs;
    fs.n_ = n_samples;
    fs.f_ = n_features;
    fs.binary_storage_ = true;
    fs.bytes_.assign(n_samples * n_features, 0);
    return fs;
}

FeatureSet FeatureSet::real(std::size_t n_samples, std::size_t n_features) {
    FeatureSet fs;
    fs.n_ = n_samples;
    fs.f_ = n_features;
    fs.binary_storage_ = false;
    fs.reals_.assign(n_samples * n_features, 0.0f);
    return fs;
}

double FeatureSet::at(std::size_t i, std::size_t j) const {
    return binary_storage_ ? static_cast<double>(bytes_[i * f_ + j])
                           : static_cast<double>(reals_[i * f_ + j]);
}

void FeatureSet::set_row(std::size_t i, std::span<const std::uint8_t> row) {
    if (!binary_storage_) throw DimensionError("byte row assigned to real feature set");
    if (row.size() != f_) throw DimensionError("feature row length mismatch");
    std::copy(row.begin(), row.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(i * f_));
}

void FeatureSet::set_row(std::size_t i, std::span<const double> row) {
    if (binary_storage_) throw DimensionError("real row assigned to binary feature set");
    if (row.size() != f_) throw DimensionError("feature row length mismatch");
    for (std::size_t j = 0; j < f_; ++j) reals_[i * f_ + j] = static_cast<float>(row[j]);
}

void FeatureSet::gather_columns(std::span<const int> indices,
                                Eigen::Ref<Eigen::MatrixXd> dst) const {
    if (dst.rows() != static_cast<Eigen::Index>(f_) ||
        dst.cols() != static_cast<Eigen::Index>(indices.size()))
        throw DimensionError("gather destination shape mismatch");
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const std::size_t i = static_cast<std::size_t>(indices[b]);
        if (binary_storage_) {
            const std::uint8_t* src = bytes_.data() + i * f_;
            for (std::size_t j = 0; j < f_; ++j)
                dst(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) =
                    static_cast<double>(src[j]);
        } else {
            const float* src = reals_.data() + i * f_;
            for (std::size_t j = 0; j < f_; ++j)
                dst(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) =
                    static_cast<double>(src[j]);
        }
    }
}

Eigen::VectorXd FeatureSet::row_as_vector(std::size_t i) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(f_));
    for (std::size_t j = 0; j < f_; ++j) v[static_cast<Eigen::Index>(j)] = at(i, j);
    return v;
}

ReadoutModel ReadoutModel::zeros(Eigen::Index n_features) {
    return ReadoutModel{Eigen::MatrixXd::Zero(10, n_features), Eigen::VectorXd::Zero(10), false};
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
}

std::vector<std::uint8_t> featurize(const SnapshotMatrix& snap) {
    if (snap.data.size() != static_cast<std::size_t>(snap.n_neurons) *
                                static_cast<std::size_t>(snap.n_snap))
        throw DimensionError("snapshot payload does not match its dimensions");
    return snap.data;  // already row-major n_neurons x n_snap
}

namespace {

// Column-wise softmax with max-subtraction; logits overwritten in place.
void softmax_columns(Eigen::MatrixXd& z) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double mx = z.col(c).maxCoeff();
        z.col(c) = (z.col(c).array() - mx).exp();
        z.col(c) /= z.col(c).sum();
    }
}

}  // namespace

Eigen::VectorXd predict(const ReadoutModel& model, const Eigen::VectorXd& features) {
    if (features.size() != model.weights.cols())
        throw DimensionError("feature length does not match the model");
    Eigen::VectorXd z = model.weights * features + model.bias;
    const double mx = z.maxCoeff();
    z = (z.array() - mx).exp();
    z /= z.sum();
    return z;
}

Eigen::VectorXd predict(const ReadoutModel& model, std::span<const std::uint8_t> features) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j)
        v[static_cast<Eigen::Index>(j)] = static_cast<double>(features[j]);
    return predict(model, v);
}

int predict_class(const ReadoutModel& model, const Eigen::VectorXd& features) {
    if (features.size() != model.weights.cols())
        throw DimensionError("feature length does not match the model");
    const Eigen::VectorXd z = model.weights * features + model.bias;
    int best = 0;
    for (int k = 1; k < 10; ++k)
        if (z[k] > z[best]) best = k;  // strict: ties keep the lowest index
    return best;
}

ReadoutModel train(const FeatureSet& x, std::span<const int> labels, const TrainConfig& config) {
    config.validate();
    if (x.samples() == 0) throw TrainingError("training set is empty");
    if (labels.size() != x.samples())
        throw DimensionError("label count does not match the feature rows");
    for (int l : labels)
        if (l < 0 || l > 9) throw TrainingError("label outside [0,9]");

    const Eigen::Index f = static_cast<Eigen::Index>(x.features());
    const std::size_t n = x.samples();
    ReadoutModel model = ReadoutModel::zeros(f);
    Rng rng(config.seed);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t max_batch = std::min<std::size_t>(n, static_cast<std::size_t>(config.batch_size));
    Eigen::MatrixXd xb(f, static_cast<Eigen::Index>(max_batch));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j =
                static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        double ce_sum = 0.0;
        for (std::size_t start = 0; start < n; start += max_batch) {
            const std::size_t bsz = std::min(max_batch, n - start);
            const auto idx = std::span<const int>(order).subspan(start, bsz);
            auto xview = xb.leftCols(static_cast<Eigen::Index>(bsz));
            x.gather_columns(idx, xview);

            Eigen::MatrixXd z = model.weights * xview;  // 10 x bsz
            z.colwise() += model.bias;
            softmax_columns(z);
            for (std::size_t b = 0; b < bsz; ++b) {
                const double p = z(labels[static_cast<std::size_t>(idx[b])],
                                   static_cast<Eigen::Index>(b));
                ce_sum += -std::log(std::max(p, 1e-300));
                z(labels[static_cast<std::size_t>(idx[b])], static_cast<Eigen::Index>(b)) -= 1.0;
            }
            const double inv_b = 1.0 / static_cast<double>(bsz);
            const Eigen::MatrixXd grad_w =
                (z * xview.transpose()) * inv_b + config.l2 * model.weights;
            const Eigen::VectorXd grad_b = z.rowwise().sum() * inv_b;
            model.weights -= config.learning_rate * grad_w;
            model.bias -= config.learning_rate * grad_b;
        }
        const double loss = ce_sum / static_cast<double>(n) +
                            0.5 * config.l2 * model.weights.squaredNorm();
        if (!std::isfinite(loss))
            throw TrainingError("divergence: non-finite loss at epoch " + std::to_string(epoch));
    }
    model.trained = true;
    return model;
}

double evaluate(const ReadoutModel& model, const FeatureSet& x, std::span<const int> labels) {
    if (x.samples() == 0) throw TrainingError("evaluation set is empty");
    if (labels.size() != x.samples())
        throw DimensionError("label count does not match the feature rows");
    if (static_cast<Eigen::Index>(x.features()) != model.weights.cols())
        throw DimensionError("feature width does not match the model");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.samples(); ++i) {
        if (predict_class(model, x.row_as_vector(i)) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(x.samples());
}

void save_model(const std::filesystem::path& json_path, const ReadoutModel& model) {
    std::filesystem::path blob_path = json_path;
    blob_path.replace_extension(".weights.bin");

    nlohmann::json meta;
    meta["format"] = "oscres-readout-v1";
    meta["classes"] = 10;
    meta["features"] = model.weights.cols();
    meta["trained"] = model.trained;
    meta["blob"] = blob_path.filename().string();
    meta["layout"] = "f64le: weights row-major 10xF, then bias[10]";

    std::ofstream js(json_path);
    if (!js) throw DataError("cannot open model file for writing: " + json_path.string());
    js << meta.dump(2) << '\n';
    if (!js) throw DataError("write failure on model file: " + json_path.string());

    std::ofstream blob(blob_path, std::ios::binary);
    if (!blob) throw DataError("cannot open weights blob for writing: " + blob_path.string());
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
            const double v = model.weights(r, c);
            blob.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    for (Eigen::Index r = 0; r < model.bias.size(); ++r) {
        const double v = model.bias[r];
        blob.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    if (!blob) throw DataError("write failure on weights blob: " + blob_path.string());
}

ReadoutModel load_model(const std::filesystem::path& json_path) {
    std::ifstream js(json_path);
    if (!js) throw DataError("cannot open model file: " + json_path.string());
    nlohmann::json meta;
    try {
        js >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model JSON parse failure: ") + e.what());
    }
    if (meta.value("format", "") != "oscres-readout-v1")
        throw DataError("unrecognized model format tag");
    const Eigen::Index f = meta.at("features").get<Eigen::Index>();

    std::filesystem::path blob_path = json_path;
    blob_path = blob_path.parent_path() / meta.at("blob").get<std::string>();
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) throw DataError("cannot open weights blob: " + blob_path.string());

    ReadoutModel model = ReadoutModel::zeros(f);
    for (Eigen::Index r = 0; r < 10; ++r)
        for (Eigen::Index c = 0; c < f; ++c) {
            double v;
            blob.read(reinterpret_cast<char*>(&v), sizeof(v));
            model.weights(r, c) = v;
        }
    for (Eigen::Index r = 0; r < 10; ++r) {
        double v;
        blob.read(reinterpret_cast<char*>(&v), sizeof(v));
        model.bias[r] = v;
    }
    if (!blob) throw DataError("truncated weights blob: " + blob_path.string());
    model.trained = meta.value("trained", true);
    return model;
}

}  // namespace oscres
