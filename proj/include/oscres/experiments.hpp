#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oscres/dataset_io.hpp"
#include "oscres/encoder.hpp"
#include "oscres/readout.hpp"
#include "oscres/simulator.hpp"
#include "oscres/topology.hpp"

namespace oscres {

// Everything a trial needs: topology and encoding axes, simulation and
// training settings, trial protocol, dataset location and desk-scale subset
// sizes. JSON round-trips through load/save; the CLI overlays flags on top.
struct ExperimentConfig {
    // topology
    int n_rings = 100;
    int ring_size_lower = 3;
    int ring_size_upper = 10;
    int k = 4;
    double epsilon = 0.2;
    double p = 0.4;
    double input_ring_fraction = 1.0;
    // encoder
    int n_in = 16;
    int n_ts = 2018;
    int stride = 1;
    double noise_sigma = 0.05;
    bool augment_train = true;  // Gaussian-noise augmentation of training images
    // simulation
    double dt = 0.1;
    double T = 0.0;  // 0 = auto: n_ts * dt
    TriggerThresholds thresholds{};
    int warmup_max_steps = 200;
    int snapshot_stride = 0;  // 0 = auto: 16 snapshots per run
    // readout
    TrainConfig train{};
    // protocol
    int trials = 1;
    std::uint64_t master_seed = 1;
    std::string data_dir;             // empty = $OSCRES_DATA_DIR or data/mnist
    std::size_t subset_train = 5000;  // 0 = the full split
    std::size_t subset_validation = 1000;
    std::size_t subset_test = 1000;
    std::size_t split_validation = 0;  // 0 = auto: one sixth of the training file
    std::uint64_t split_seed = 7;
    int n_threads = 0;  // 0 = hardware concurrency

    void validate() const;
    EncodeParams encode_params(bool augment) const;
    SimulationConfig sim_config(std::uint64_t seed) const;
    TopologyParams topology_params(std::uint64_t seed) const;

    // Canonical axis tag ("eps=0.2/p=0.4/rings=100"); trial seeds derive from
    // (master seed, this tag, trial index) so adding sweep cells never
    // perturbs existing ones.
    std::string axis_tag() const;
    std::uint64_t trial_seed(int trial_index) const;
    std::uint64_t config_hash() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// Train/validation/test materialized per the config's split and subset
// settings. Loaded once, shared by every trial.
struct Dataset {
    LabeledImageSet train;
    LabeledImageSet validation;
    LabeledImageSet test;
};

Dataset prepare_dataset(const ExperimentConfig& config);

struct TrialResult {
    std::uint64_t config_hash = 0;
    int trial_index = 0;
    std::uint64_t seed = 0;
    int n_rings = 0;
    double epsilon = 0.0;
    double p = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    double wall_seconds = 0.0;
    bool baseline = false;
};

// One full pipeline pass: topology (seeded from the trial seed) -> encode ->
// simulate every image -> featurize -> train readout -> evaluate.
TrialResult run_trial(const Dataset& data, const ExperimentConfig& config, int trial_index);
TrialResult run_trial(const ExperimentConfig& config, int trial_index);

// Control experiment: the same readout trained on the raw Hilbert sequence
// (the encoder output before window embedding), no reservoir.
TrialResult run_baseline_trial(const Dataset& data, const ExperimentConfig& config,
                               int trial_index);

struct SweepFailure {
    std::string axis_tag;
    int trial_index = 0;
    std::string message;
};

struct SweepCell {
    int n_rings = 0;
    double epsilon = 0.0;
    double p = 0.0;
    std::vector<TrialResult> rows;

    double mean_test() const;
    double std_test() const;  // sample standard deviation, ddof = 1
    double mean_train() const;
    double mean_validation() const;
};

struct SweepResult {
    std::string kind;  // "grid" or "size"
    std::vector<SweepCell> cells;
    std::vector<SweepFailure> failures;
};

// 9x9 grid over (epsilon, p) in {0.1, ..., 0.9}^2, config.trials trials per
// cell. Failed trials are recorded and skipped by the cell statistics.
SweepResult grid_sweep(const Dataset& data, const ExperimentConfig& config);

// Network-size sweep at the template's (epsilon, p); the reported protocol
// uses epsilon = p = 0.5, sizes 50..500, 10 trials.
SweepResult size_sweep(const Dataset& data, const ExperimentConfig& config,
                       const std::vector<int>& sizes, int trials);
std::vector<int> default_size_axis();  // {50, 100, ..., 500}

// trials.csv (one row per trial), summary.json (per-cell means/stds), and a
// plot-ready aggregate.csv in the mean/std-per-axis-value shape.
void report(const SweepResult& sweep, const std::filesystem::path& out_dir);

// Re-aggregates a trials.csv written by report(); used by the report CLI
// subcommand.
SweepResult sweep_from_trials_csv(const std::filesystem::path& csv_path);

}  // namespace oscres
