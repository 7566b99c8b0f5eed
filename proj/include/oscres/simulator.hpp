#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "oscres/dynamics.hpp"
#include "oscres/encoder.hpp"
#include "oscres/rng.hpp"
#include "oscres/topology.hpp"

namespace oscres {

struct SimulationConfig {
    double dt = 0.1;
    double T = 201.8;  // simulated time; step count = T/dt
    TriggerThresholds thresholds{};
    int warmup_max_steps = 200;
    // Snapshots are recorded after every snapshot_stride-th step, counting
    // driven steps from 1. 0 means auto: n_steps/16, giving 16 snapshots.
    int snapshot_stride = 0;
    std::uint64_t seed = 0;
    bool record_history = false;  // full output/capacitor histories are opt-in

    long n_steps() const;
    int effective_stride() const;
    void validate(long n_drive_frames) const;
};

// Binary reservoir outputs sampled at the recorded steps. data is row-major
// n_neurons x n_snap; column j is an exact copy of y_out after step times[j].
struct SnapshotMatrix {
    int n_neurons = 0;
    int n_snap = 0;
    std::vector<std::uint8_t> data;
    std::vector<long> times;  // 1-based step indices

    std::uint8_t at(int neuron, int snap) const {
        return data[static_cast<std::size_t>(neuron) * static_cast<std::size_t>(n_snap) +
                    static_cast<std::size_t>(snap)];
    }
};

struct RunResult {
    SnapshotMatrix snapshots;
    // Filled only when record_history is set: entry t is the state after
    // step t+1 (the initial state is not included).
    std::vector<std::vector<std::uint8_t>> y_history;
    std::vector<std::vector<double>> v_history;
};

// v_cap = 0.9 everywhere; y_out = 1 everywhere except one uniformly chosen
// firing neuron per ring.
NeuronArrayState initialize(const ReservoirTopology& topo, Rng& rng);

// Each ring evolved in isolation (inter-ring weights and input zeroed) for
// its own uniform duration in [0, warmup_max_steps] steps. Durations are
// drawn for all rings first, in ring order, from the one seed stream.
NeuronArrayState warmup(NeuronArrayState state, const ReservoirTopology& topo,
                        const SimulationConfig& config, Rng& rng);

// One synchronous update: u = W*y_out + W_in*frame (pre-update outputs),
// then the capacitor relaxation, then the trigger on the post-update
// capacitor. Pass an empty frame for an undriven step.
NeuronArrayState step(const NeuronArrayState& state, const ReservoirTopology& topo,
                      std::span<const double> input_frame, const StepParams& params,
                      const TriggerThresholds& th);

// initialize + warmup under config.seed; the state every driven run of this
// (topology, config) pair starts from.
NeuronArrayState warm_state(const ReservoirTopology& topo, const SimulationConfig& config);

// Full Algorithm: initialize -> warmup -> driven step loop with snapshot
// recording. Frames past the drive's n_ts are held at zero.
RunResult run(const ReservoirTopology& topo, const TimeSeriesInput& drive,
              const SimulationConfig& config);

// The driven loop alone, starting from a previously computed warm state.
// run(topo, drive, cfg) == run_from(warm_state(topo, cfg), topo, drive, cfg).
RunResult run_from(NeuronArrayState state, const ReservoirTopology& topo,
                   const TimeSeriesInput& drive, const SimulationConfig& config);

// Flat binary snapshot layout (documented in the README): header with
// N, n_snap and the step indices, body row-major bits packed 8 per byte.
void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& snap);
SnapshotMatrix read_snapshots(const std::filesystem::path& path);
void write_snapshots_csv(const std::filesystem::path& path, const SnapshotMatrix& snap);

}  // namespace oscres
