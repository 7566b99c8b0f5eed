#include "oscres/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oscres/errors.hpp"
#include "oscres/parallel.hpp"
#include "oscres/rng.hpp"

namespace oscres {

namespace {

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    topology_params(0).validate();
    encode_params(false).validate();
    sim_config(0).validate(n_ts);
    train.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (n_threads < 0) throw ConfigError("n_threads must be >= 0");
}

EncodeParams ExperimentConfig::encode_params(bool augment) const {
    EncodeParams ep;
    ep.n_in = n_in;
    ep.n_ts = n_ts;
    ep.stride = stride;
    ep.noise_sigma = noise_sigma;
    ep.augment = augment;
    return ep;
}

SimulationConfig ExperimentConfig::sim_config(std::uint64_t seed) const {
    SimulationConfig sc;
    sc.dt = dt;
    sc.T = T > 0.0 ? T : dt * static_cast<double>(n_ts);
    sc.thresholds = thresholds;
    sc.warmup_max_steps = warmup_max_steps;
    sc.snapshot_stride = snapshot_stride;
    sc.seed = seed;
    return sc;
}

TopologyParams ExperimentConfig::topology_params(std::uint64_t seed) const {
    TopologyParams tp;
    tp.n_rings = n_rings;
    tp.ring_size_lower = ring_size_lower;
    tp.ring_size_upper = ring_size_upper;
    tp.k = k;
    tp.p = p;
    tp.epsilon = epsilon;
    tp.n_in = n_in;
    tp.input_ring_fraction = input_ring_fraction;
    tp.seed = seed;
    return tp;
}

std::string ExperimentConfig::axis_tag() const {
    return "eps=" + fmt_double(epsilon) + "/p=" + fmt_double(p) +
           "/rings=" + std::to_string(n_rings);
}

std::uint64_t ExperimentConfig::trial_seed(int trial_index) const {
    return derive_seed(master_seed, axis_tag() + "/trial=" + std::to_string(trial_index));
}

std::uint64_t ExperimentConfig::config_hash() const {
    std::uint64_t h = 0x51ab3f1c90d5e4b7ull;
    for (unsigned char c : config_to_json(*this)) h = splitmix64(h ^ c);
    return h;
}

namespace {

constexpr const char* kConfigKeys[] = {
    "n_rings", "ring_size_lower", "ring_size_upper", "k", "epsilon", "p",
    "input_ring_fraction", "n_in", "n_ts", "stride", "noise_sigma", "augment_train",
    "dt", "T", "v_thl", "v_thh", "warmup_max_steps", "snapshot_stride",
    "learning_rate", "epochs", "batch_size", "l2",
    "trials", "master_seed", "data_dir", "subset_train", "subset_validation",
    "subset_test", "split_validation", "split_seed", "n_threads"};

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON parse failure: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : kConfigKeys) known = known || key == k;
        if (!known) throw ConfigError("unknown config key: " + key);
    }

    ExperimentConfig c;
    try {
        c.n_rings = j.value("n_rings", c.n_rings);
        c.ring_size_lower = j.value("ring_size_lower", c.ring_size_lower);
        c.ring_size_upper = j.value("ring_size_upper", c.ring_size_upper);
        c.k = j.value("k", c.k);
        c.epsilon = j.value("epsilon", c.epsilon);
        c.p = j.value("p", c.p);
        c.input_ring_fraction = j.value("input_ring_fraction", c.input_ring_fraction);
        c.n_in = j.value("n_in", c.n_in);
        c.n_ts = j.value("n_ts", c.n_ts);
        c.stride = j.value("stride", c.stride);
        c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
        c.augment_train = j.value("augment_train", c.augment_train);
        c.dt = j.value("dt", c.dt);
        c.T = j.value("T", c.T);
        c.thresholds.v_thl = j.value("v_thl", c.thresholds.v_thl);
        c.thresholds.v_thh = j.value("v_thh", c.thresholds.v_thh);
        c.warmup_max_steps = j.value("warmup_max_steps", c.warmup_max_steps);
        c.snapshot_stride = j.value("snapshot_stride", c.snapshot_stride);
        c.train.learning_rate = j.value("learning_rate", c.train.learning_rate);
        c.train.epochs = j.value("epochs", c.train.epochs);
        c.train.batch_size = j.value("batch_size", c.train.batch_size);
        c.train.l2 = j.value("l2", c.train.l2);
        c.trials = j.value("trials", c.trials);
        c.master_seed = j.value("master_seed", c.master_seed);
        c.data_dir = j.value("data_dir", c.data_dir);
        c.subset_train = j.value("subset_train", c.subset_train);
        c.subset_validation = j.value("subset_validation", c.subset_validation);
        c.subset_test = j.value("subset_test", c.subset_test);
        c.split_validation = j.value("split_validation", c.split_validation);
        c.split_seed = j.value("split_seed", c.split_seed);
        c.n_threads = j.value("n_threads", c.n_threads);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON type error: ") + e.what());
    }
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["n_rings"] = c.n_rings;
    j["ring_size_lower"] = c.ring_size_lower;
    j["ring_size_upper"] = c.ring_size_upper;
    j["k"] = c.k;
    j["epsilon"] = c.epsilon;
    j["p"] = c.p;
    j["input_ring_fraction"] = c.input_ring_fraction;
    j["n_in"] = c.n_in;
    j["n_ts"] = c.n_ts;
    j["stride"] = c.stride;
    j["noise_sigma"] = c.noise_sigma;
    j["augment_train"] = c.augment_train;
    j["dt"] = c.dt;
    j["T"] = c.T;
    j["v_thl"] = c.thresholds.v_thl;
    j["v_thh"] = c.thresholds.v_thh;
    j["warmup_max_steps"] = c.warmup_max_steps;
    j["snapshot_stride"] = c.snapshot_stride;
    j["learning_rate"] = c.train.learning_rate;
    j["epochs"] = c.train.epochs;
    j["batch_size"] = c.train.batch_size;
    j["l2"] = c.train.l2;
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["data_dir"] = c.data_dir;
    j["subset_train"] = c.subset_train;
    j["subset_validation"] = c.subset_validation;
    j["subset_test"] = c.subset_test;
    j["split_validation"] = c.split_validation;
    j["split_seed"] = c.split_seed;
    j["n_threads"] = c.n_threads;
    return j.dump(2);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

Dataset prepare_dataset(const ExperimentConfig& config) {
    const auto dir = resolve_data_dir(config.data_dir);
    MnistData data = load_mnist(dir);

    SplitSpec ss;
    ss.validation = config.split_validation > 0 ? config.split_validation
                                                : data.train_full.count / 6;
    if (ss.validation >= data.train_full.count)
        throw ConfigError("validation split exceeds the training file size");
    ss.train = data.train_full.count - ss.validation;
    ss.shuffle_seed = config.split_seed;
    DatasetSplits splits = split(data.train_full, ss);

    Dataset out;
    out.train = subset(splits.train, config.subset_train);
    out.validation = subset(splits.validation, config.subset_validation);
    out.test = subset(data.test, config.subset_test);
    return out;
}

namespace {

std::vector<int> labels_of(const LabeledImageSet& set) {
    std::vector<int> labels(set.count);
    for (std::size_t i = 0; i < set.count; ++i) labels[i] = set.labels[i];
    return labels;
}

// Reservoir features for one split: encode -> simulate -> flatten, one row
// per image, parallel over images. Noise seeds derive from (trial seed,
// split name, image index) so worker scheduling cannot change any result.
FeatureSet reservoir_features(const LabeledImageSet& set, const ReservoirTopology& topo,
                              const NeuronArrayState& warm, const ExperimentConfig& config,
                              const SimulationConfig& sim, std::uint64_t trial_seed,
                              const std::string& split_name, bool augment) {
    const EncodeParams ep = config.encode_params(augment);
    const long n_snap = sim.n_steps() / sim.effective_stride();
    const std::size_t f =
        static_cast<std::size_t>(topo.n_neurons()) * static_cast<std::size_t>(n_snap);
    FeatureSet features = FeatureSet::binary(set.count, f);
    parallel_for(set.count, config.n_threads, [&](std::size_t i) {
        Rng noise(derive_seed(trial_seed, "noise/" + split_name + "/" + std::to_string(i)));
        const ImageGrid img = image_from_bytes(set.image(i), set.height, set.width);
        const TimeSeriesInput drive = encode_image(img, ep, noise);
        RunResult result = run_from(warm, topo, drive, sim);
        features.set_row(i, featurize(result.snapshots));
    });
    return features;
}

// Baseline features: the raw Hilbert sequence of each (optionally noised)
// image, no reservoir in the loop.
FeatureSet baseline_features(const LabeledImageSet& set, const ExperimentConfig& config,
                             std::uint64_t trial_seed, const std::string& split_name,
                             bool augment) {
    const EncodeParams ep = config.encode_params(augment);
    FeatureSet features = FeatureSet::real(set.count, 1024);
    parallel_for(set.count, config.n_threads, [&](std::size_t i) {
        Rng noise(derive_seed(trial_seed, "noise/" + split_name + "/" + std::to_string(i)));
        const ImageGrid img = image_from_bytes(set.image(i), set.height, set.width);
        features.set_row(i, encode_hilbert_sequence(img, ep, noise));
    });
    return features;
}

}  // namespace

TrialResult run_trial(const Dataset& data, const ExperimentConfig& config, int trial_index) {
    config.validate();
    if (data.train.count == 0 || data.test.count == 0)
        throw DataError("trial requires non-empty train and test sets");
    const auto start = std::chrono::steady_clock::now();

    const std::uint64_t seed = config.trial_seed(trial_index);
    const ReservoirTopology topo =
        build_topology(config.topology_params(derive_seed(seed, "topology")));
    const SimulationConfig sim = config.sim_config(derive_seed(seed, "init"));
    const NeuronArrayState warm = warm_state(topo, sim);

    const FeatureSet train_x = reservoir_features(data.train, topo, warm, config, sim, seed,
                                                  "train", config.augment_train);
    TrainConfig tc = config.train;
    tc.seed = derive_seed(seed, "readout");
    const ReadoutModel model = train(train_x, labels_of(data.train), tc);

    TrialResult result;
    result.config_hash = config.config_hash();
    result.trial_index = trial_index;
    result.seed = seed;
    result.n_rings = config.n_rings;
    result.epsilon = config.epsilon;
    result.p = config.p;
    result.train_accuracy = evaluate(model, train_x, labels_of(data.train));
    if (data.validation.count > 0) {
        const FeatureSet val_x = reservoir_features(data.validation, topo, warm, config, sim,
                                                    seed, "validation", false);
        result.validation_accuracy = evaluate(model, val_x, labels_of(data.validation));
    }
    const FeatureSet test_x =
        reservoir_features(data.test, topo, warm, config, sim, seed, "test", false);
    result.test_accuracy = evaluate(model, test_x, labels_of(data.test));
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

TrialResult run_trial(const ExperimentConfig& config, int trial_index) {
    return run_trial(prepare_dataset(config), config, trial_index);
}

TrialResult run_baseline_trial(const Dataset& data, const ExperimentConfig& config,
                               int trial_index) {
    config.validate();
    if (data.train.count == 0 || data.test.count == 0)
        throw DataError("trial requires non-empty train and test sets");
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = config.trial_seed(trial_index);

    const FeatureSet train_x =
        baseline_features(data.train, config, seed, "train", config.augment_train);
    TrainConfig tc = config.train;
    tc.seed = derive_seed(seed, "readout");
    const ReadoutModel model = train(train_x, labels_of(data.train), tc);

    TrialResult result;
    result.config_hash = config.config_hash();
    result.trial_index = trial_index;
    result.seed = seed;
    result.n_rings = 0;
    result.epsilon = config.epsilon;
    result.p = config.p;
    result.baseline = true;
    result.train_accuracy = evaluate(model, train_x, labels_of(data.train));
    if (data.validation.count > 0) {
        const FeatureSet val_x = baseline_features(data.validation, config, seed, "validation", false);
        result.validation_accuracy = evaluate(model, val_x, labels_of(data.validation));
    }
    const FeatureSet test_x = baseline_features(data.test, config, seed, "test", false);
    result.test_accuracy = evaluate(model, test_x, labels_of(data.test));
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

double SweepCell::mean_test() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.test_accuracy;
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

double SweepCell::std_test() const {
    if (rows.size() < 2) return 0.0;
    const double m = mean_test();
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.test_accuracy - m) * (r.test_accuracy - m);
    return std::sqrt(ss / static_cast<double>(rows.size() - 1));
}

double SweepCell::mean_train() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.train_accuracy;
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

double SweepCell::mean_validation() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.validation_accuracy;
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

namespace {

SweepCell sweep_cell(const Dataset& data, const ExperimentConfig& cell_config, int trials,
                     std::vector<SweepFailure>& failures) {
    SweepCell cell;
    cell.n_rings = cell_config.n_rings;
    cell.epsilon = cell_config.epsilon;
    cell.p = cell_config.p;
    for (int t = 0; t < trials; ++t) {
        try {
            cell.rows.push_back(run_trial(data, cell_config, t));
        } catch (const Error& e) {
            failures.push_back(SweepFailure{cell_config.axis_tag(), t, e.what()});
        }
    }
    return cell;
}

}  // namespace

SweepResult grid_sweep(const Dataset& data, const ExperimentConfig& config) {
    config.validate();
    SweepResult sweep;
    sweep.kind = "grid";
    for (int ei = 1; ei <= 9; ++ei) {
        for (int pi = 1; pi <= 9; ++pi) {
            ExperimentConfig cell = config;
            cell.epsilon = static_cast<double>(ei) / 10.0;
            cell.p = static_cast<double>(pi) / 10.0;
            sweep.cells.push_back(sweep_cell(data, cell, config.trials, sweep.failures));
        }
    }
    return sweep;
}

std::vector<int> default_size_axis() {
    std::vector<int> sizes;
    for (int s = 50; s <= 500; s += 50) sizes.push_back(s);
    return sizes;
}

SweepResult size_sweep(const Dataset& data, const ExperimentConfig& config,
                       const std::vector<int>& sizes, int trials) {
    config.validate();
    if (sizes.empty()) throw ConfigError("size sweep needs at least one size");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    SweepResult sweep;
    sweep.kind = "size";
    for (int s : sizes) {
        ExperimentConfig cell = config;
        cell.n_rings = s;
        sweep.cells.push_back(sweep_cell(data, cell, trials, sweep.failures));
    }
    return sweep;
}

namespace {

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void report(const SweepResult& sweep, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    {
        std::ofstream csv(out_dir / "trials.csv");
        if (!csv) throw DataError("cannot open trials.csv for writing in " + out_dir.string());
        csv << "kind,n_rings,epsilon,p,trial,seed,train_accuracy,validation_accuracy,"
               "test_accuracy,wall_seconds\n";
        for (const auto& cell : sweep.cells) {
            for (const auto& r : cell.rows) {
                csv << sweep.kind << ',' << r.n_rings << ',' << csv_double(r.epsilon) << ','
                    << csv_double(r.p) << ',' << r.trial_index << ',' << r.seed << ','
                    << csv_double(r.train_accuracy) << ',' << csv_double(r.validation_accuracy)
                    << ',' << csv_double(r.test_accuracy) << ',' << csv_double(r.wall_seconds)
                    << '\n';
            }
        }
        if (!csv) throw DataError("write failure on trials.csv");
    }

    {
        nlohmann::json j;
        j["kind"] = sweep.kind;
        auto& cells = j["cells"] = nlohmann::json::array();
        for (const auto& cell : sweep.cells) {
            cells.push_back({{"n_rings", cell.n_rings},
                             {"epsilon", cell.epsilon},
                             {"p", cell.p},
                             {"n_trials", cell.rows.size()},
                             {"mean_test_accuracy", cell.mean_test()},
                             {"std_test_accuracy", cell.std_test()},
                             {"mean_train_accuracy", cell.mean_train()},
                             {"mean_validation_accuracy", cell.mean_validation()}});
        }
        auto& fails = j["failures"] = nlohmann::json::array();
        for (const auto& f : sweep.failures)
            fails.push_back({{"axis", f.axis_tag}, {"trial", f.trial_index}, {"message", f.message}});
        std::ofstream js(out_dir / "summary.json");
        if (!js) throw DataError("cannot open summary.json for writing in " + out_dir.string());
        js << j.dump(2) << '\n';
        if (!js) throw DataError("write failure on summary.json");
    }

    {
        std::ofstream agg(out_dir / "aggregate.csv");
        if (!agg) throw DataError("cannot open aggregate.csv for writing in " + out_dir.string());
        if (sweep.kind == "size") {
            agg << "n_rings,mean_test_accuracy,std_test_accuracy\n";
            for (const auto& cell : sweep.cells)
                agg << cell.n_rings << ',' << csv_double(cell.mean_test()) << ','
                    << csv_double(cell.std_test()) << '\n';
        } else {
            agg << "epsilon,p,mean_test_accuracy,std_test_accuracy\n";
            for (const auto& cell : sweep.cells)
                agg << csv_double(cell.epsilon) << ',' << csv_double(cell.p) << ','
                    << csv_double(cell.mean_test()) << ',' << csv_double(cell.std_test()) << '\n';
        }
        if (!agg) throw DataError("write failure on aggregate.csv");
    }
}

SweepResult sweep_from_trials_csv(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open trials CSV: " + csv_path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty trials CSV: " + csv_path.string());
    if (line != "kind,n_rings,epsilon,p,trial,seed,train_accuracy,validation_accuracy,"
                "test_accuracy,wall_seconds")
        throw DataError("unrecognized trials CSV header");

    SweepResult sweep;
    auto cell_for = [&sweep](int n_rings, double epsilon, double p) -> SweepCell& {
        for (auto& c : sweep.cells)
            if (c.n_rings == n_rings && c.epsilon == epsilon && c.p == p) return c;
        sweep.cells.push_back(SweepCell{n_rings, epsilon, p, {}});
        return sweep.cells.back();
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 10) throw DataError("malformed trials CSV row: " + line);
        TrialResult r;
        sweep.kind = fields[0];
        r.n_rings = std::stoi(fields[1]);
        r.epsilon = std::stod(fields[2]);
        r.p = std::stod(fields[3]);
        r.trial_index = std::stoi(fields[4]);
        r.seed = std::stoull(fields[5]);
        r.train_accuracy = std::stod(fields[6]);
        r.validation_accuracy = std::stod(fields[7]);
        r.test_accuracy = std::stod(fields[8]);
        r.wall_seconds = std::stod(fields[9]);
        cell_for(r.n_rings, r.epsilon, r.p).rows.push_back(r);
    }
    return sweep;
}

}  // namespace oscres
