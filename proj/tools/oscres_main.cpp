#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oscres/dataset_io.hpp"
#include "oscres/encoder.hpp"
#include "oscres/errors.hpp"
#include "oscres/experiments.hpp"
#include "oscres/rng.hpp"

namespace {

// Pre-scan for --config so file values become the defaults the flags
// override.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc - 1; ++i) {
        if (std::string(argv[i]) == "--config") return argv[i + 1];
    }
    for (int i = 1; i < argc; ++i) {
        const std::string a(argv[i]);
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

void add_config_flags(CLI::App& app, oscres::ExperimentConfig& c) {
    app.add_option("--n-rings", c.n_rings, "Number of ring oscillators");
    app.add_option("--ring-size-lower", c.ring_size_lower, "Smallest ring size (>= 3)");
    app.add_option("--ring-size-upper", c.ring_size_upper, "Largest ring size");
    app.add_option("--k", c.k, "Watts-Strogatz base degree (even)");
    app.add_option("--epsilon", c.epsilon, "Coupling constant");
    app.add_option("--p", c.p, "Rewiring/adjacency probability");
    app.add_option("--input-ring-fraction", c.input_ring_fraction,
                   "Fraction of rings eligible for input rows");
    app.add_option("--n-in", c.n_in, "Input channels");
    app.add_option("--n-ts", c.n_ts, "Frames per image");
    app.add_option("--window-stride", c.stride, "Sliding-window stride");
    app.add_option("--noise-sigma", c.noise_sigma, "Gaussian augmentation sigma");
    app.add_flag("--no-augment", [&c](std::int64_t) { c.augment_train = false; },
                 "Disable train-time noise augmentation");
    app.add_option("--dt", c.dt, "Time step");
    app.add_option("--T", c.T, "Simulation time (0 = n_ts * dt)");
    app.add_option("--v-thl", c.thresholds.v_thl, "Lower trigger threshold");
    app.add_option("--v-thh", c.thresholds.v_thh, "Upper trigger threshold");
    app.add_option("--warmup-max-steps", c.warmup_max_steps, "Warmup duration upper bound");
    app.add_option("--snapshot-stride", c.snapshot_stride, "Steps between snapshots (0 = auto)");
    app.add_option("--lr", c.train.learning_rate, "Readout learning rate");
    app.add_option("--epochs", c.train.epochs, "Readout epochs");
    app.add_option("--batch-size", c.train.batch_size, "Readout batch size");
    app.add_option("--l2", c.train.l2, "Readout L2 penalty");
    app.add_option("--trials", c.trials, "Trials per configuration");
    app.add_option("--master-seed", c.master_seed, "Master seed");
    app.add_option("--data-dir", c.data_dir, "MNIST directory (default $OSCRES_DATA_DIR)");
    app.add_option("--subset-train", c.subset_train, "Training subset size (0 = full)");
    app.add_option("--subset-validation", c.subset_validation,
                   "Validation subset size (0 = full)");
    app.add_option("--subset-test", c.subset_test, "Test subset size (0 = full)");
    app.add_option("--split-validation", c.split_validation,
                   "Validation rows held out of the training file (0 = one sixth)");
    app.add_option("--split-seed", c.split_seed, "Split shuffle seed");
    app.add_option("--threads", c.n_threads, "Worker threads (0 = hardware)");
}

void print_trial(const oscres::TrialResult& r) {
    std::printf("%s trial %d  seed=%llu  train=%.4f  validation=%.4f  test=%.4f  (%.1fs)\n",
                r.baseline ? "baseline" : "reservoir", r.trial_index,
                static_cast<unsigned long long>(r.seed), r.train_accuracy,
                r.validation_accuracy, r.test_accuracy, r.wall_seconds);
    std::fflush(stdout);
}

int run_cli(int argc, char** argv) {
    oscres::ExperimentConfig config;
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) config = oscres::load_config(config_path);

    CLI::App app{"Reservoir computing with differentiating-neuron ring oscillators"};
    app.require_subcommand(1);
    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON config file (flags override its values)");
    add_config_flags(app, config);

    // encode
    auto* encode = app.add_subcommand("encode", "Encode an IDX image file to a tensor cache");
    std::string enc_images, enc_labels, enc_out, enc_split = "train";
    std::size_t enc_count = 0;
    bool enc_augment = false;
    encode->add_option("--images", enc_images, "IDX image file")->required();
    encode->add_option("--labels", enc_labels, "IDX label file")->required();
    encode->add_option("--out", enc_out, "Output file or directory")->required();
    encode->add_option("--split-name", enc_split, "Split name used for cache keying");
    encode->add_option("--count", enc_count, "Encode only the first N images (0 = all)");
    encode->add_flag("--augment", enc_augment, "Apply train-time noise augmentation");

    // run
    auto* run_cmd = app.add_subcommand("run", "Run one or more trials of one configuration");
    std::string run_out;
    bool run_baseline = false;
    run_cmd->add_option("--out", run_out, "Directory for trials.csv/summary.json");
    run_cmd->add_flag("--baseline", run_baseline,
                      "Train the readout on raw Hilbert sequences instead of the reservoir");

    // grid-sweep
    auto* grid_cmd = app.add_subcommand("grid-sweep", "9x9 sweep over (epsilon, p) in {0.1..0.9}^2");
    std::string grid_out = "grid-results";
    grid_cmd->add_option("--out", grid_out, "Output directory");

    // size-sweep
    auto* size_cmd = app.add_subcommand("size-sweep", "Network-size sweep (epsilon = p = 0.5)");
    std::string size_out = "size-results";
    std::vector<int> size_axis;
    double size_eps = 0.5, size_p = 0.5;
    size_cmd->add_option("--out", size_out, "Output directory");
    size_cmd->add_option("--sizes", size_axis, "Ring counts (default 50..500 step 50)");
    size_cmd->add_option("--epsilon", size_eps, "Coupling constant for all sizes");
    size_cmd->add_option("--p", size_p, "Rewiring probability for all sizes");

    // report
    auto* report_cmd = app.add_subcommand("report", "Re-aggregate a trials.csv into summary files");
    std::string rep_in, rep_out = ".";
    report_cmd->add_option("--in", rep_in, "trials.csv produced by a sweep")->required();
    report_cmd->add_option("--out", rep_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (encode->parsed()) {
        const auto set_full = oscres::load_idx(enc_images, enc_labels);
        const auto set = oscres::subset(set_full, enc_count);
        const auto params = config.encode_params(enc_augment);
        std::vector<oscres::TimeSeriesInput> tensors(set.count);
        for (std::size_t i = 0; i < set.count; ++i) {
            oscres::Rng rng(oscres::derive_seed(config.master_seed,
                                                "noise/" + enc_split + "/" + std::to_string(i)));
            tensors[i] = oscres::encode_image(
                oscres::image_from_bytes(set.image(i), set.height, set.width), params, rng);
        }
        std::filesystem::path out = enc_out;
        char hash_hex[24];
        std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                      static_cast<unsigned long long>(oscres::encode_params_hash(params)));
        if (std::filesystem::is_directory(out))
            out /= enc_split + "-" + hash_hex + ".enc";
        oscres::write_encoded_cache(out, tensors);
        std::printf("encoded %zu images -> %s (params hash %s)\n", set.count,
                    out.string().c_str(), hash_hex);
        return 0;
    }

    if (run_cmd->parsed()) {
        const oscres::Dataset data = oscres::prepare_dataset(config);
        oscres::SweepResult sweep;
        sweep.kind = "run";
        oscres::SweepCell cell;
        cell.n_rings = run_baseline ? 0 : config.n_rings;
        cell.epsilon = config.epsilon;
        cell.p = config.p;
        for (int t = 0; t < config.trials; ++t) {
            const auto r = run_baseline ? oscres::run_baseline_trial(data, config, t)
                                        : oscres::run_trial(data, config, t);
            print_trial(r);
            cell.rows.push_back(r);
        }
        sweep.cells.push_back(cell);
        std::printf("mean test accuracy over %d trial(s): %.4f (std %.4f)\n", config.trials,
                    cell.mean_test(), cell.std_test());
        if (!run_out.empty()) oscres::report(sweep, run_out);
        return 0;
    }

    // The reported protocols default to 5 grid trials and 10 size trials;
    // an explicit --trials wins.
    const bool trials_given = app.count("--trials") > 0;

    if (grid_cmd->parsed()) {
        if (!trials_given && config.trials == 1) config.trials = 5;
        const oscres::Dataset data = oscres::prepare_dataset(config);
        const auto sweep = oscres::grid_sweep(data, config);
        oscres::report(sweep, grid_out);
        std::printf("grid sweep complete: %zu cells, %zu failures -> %s\n", sweep.cells.size(),
                    sweep.failures.size(), grid_out.c_str());
        return 0;
    }

    if (size_cmd->parsed()) {
        config.epsilon = size_eps;
        config.p = size_p;
        const int trials = (!trials_given && config.trials == 1) ? 10 : config.trials;
        const oscres::Dataset data = oscres::prepare_dataset(config);
        const auto sizes = size_axis.empty() ? oscres::default_size_axis() : size_axis;
        const auto sweep = oscres::size_sweep(data, config, sizes, trials);
        oscres::report(sweep, size_out);
        std::printf("size sweep complete: %zu cells, %zu failures -> %s\n", sweep.cells.size(),
                    sweep.failures.size(), size_out.c_str());
        return 0;
    }

    if (report_cmd->parsed()) {
        const auto sweep = oscres::sweep_from_trials_csv(rep_in);
        oscres::report(sweep, rep_out);
        std::printf("reaggregated %zu cells -> %s\n", sweep.cells.size(), rep_out.c_str());
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const oscres::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const oscres::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
