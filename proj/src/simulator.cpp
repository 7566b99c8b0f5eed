#include "oscres/simulator.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "oscres/errors.hpp"

namespace oscres {

long SimulationConfig::n_steps() const {
    return std::lround(T / dt);
}

int SimulationConfig::effective_stride() const {
    if (snapshot_stride > 0) return snapshot_stride;
    const long steps = n_steps();
    return static_cast<int>(std::max(1L, steps / 16));
}

void SimulationConfig::validate(long n_drive_frames) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive and finite");
    thresholds.validate();
    if (warmup_max_steps < 0) throw ConfigError("warmup_max_steps must be >= 0");
    const long steps = n_steps();
    if (steps < 1) throw ConfigError("T/dt must give at least one step");
    if (n_drive_frames > steps)
        throw ConfigError("drive has more frames than simulation steps (T/dt >= n_ts required)");
    if (snapshot_stride < 0) throw ConfigError("snapshot_stride must be >= 0");
    if (static_cast<long>(effective_stride()) > steps)
        throw ConfigError("snapshot_stride exceeds the step count");
}

NeuronArrayState initialize(const ReservoirTopology& topo, Rng& rng) {
    const int n = topo.n_neurons();
    NeuronArrayState state;
    state.v_cap.assign(static_cast<std::size_t>(n), 0.9);
    state.y_out.assign(static_cast<std::size_t>(n), 1);
    for (const auto& ring : topo.rings) {
        const int local = static_cast<int>(rng.uniform_int(0, ring.size - 1));
        state.y_out[static_cast<std::size_t>(ring.start + local)] = 0;
    }
    return state;
}

namespace {

// Isolated-ring inner loop shared by warmup and (via tests) the ring studies:
// u_i = y_pred only, no inter-ring coupling, no input.
void simulate_ring_isolated(std::span<double> v, std::span<std::uint8_t> y, int steps,
                            double alpha, const TriggerThresholds& th) {
    const int n = static_cast<int>(v.size());
    std::vector<std::uint8_t> y_prev(y.begin(), y.end());
    const double beta = 1.0 - alpha;
    for (int t = 0; t < steps; ++t) {
        std::copy(y.begin(), y.end(), y_prev.begin());
        for (int i = 0; i < n; ++i) {
            const double u = static_cast<double>(y_prev[static_cast<std::size_t>((i - 1 + n) % n)]);
            v[static_cast<std::size_t>(i)] = alpha * v[static_cast<std::size_t>(i)] + beta * u;
            y[static_cast<std::size_t>(i)] =
                schmitt_trigger(y_prev[static_cast<std::size_t>(i)], u - v[static_cast<std::size_t>(i)], th);
        }
    }
}

}  // namespace

NeuronArrayState warmup(NeuronArrayState state, const ReservoirTopology& topo,
                        const SimulationConfig& config, Rng& rng) {
    if (state.size() != static_cast<std::size_t>(topo.n_neurons()))
        throw DimensionError("warmup: state size does not match topology");
    const double alpha = std::exp(-config.dt);
    std::vector<int> durations(topo.rings.size());
    for (auto& d : durations)
        d = static_cast<int>(rng.uniform_int(0, config.warmup_max_steps));
    for (std::size_t j = 0; j < topo.rings.size(); ++j) {
        const auto& ring = topo.rings[j];
        simulate_ring_isolated(
            std::span<double>(state.v_cap).subspan(static_cast<std::size_t>(ring.start),
                                                   static_cast<std::size_t>(ring.size)),
            std::span<std::uint8_t>(state.y_out).subspan(static_cast<std::size_t>(ring.start),
                                                         static_cast<std::size_t>(ring.size)),
            durations[j], alpha, config.thresholds);
    }
    return state;
}

namespace {

void compute_drive(const ReservoirTopology& topo, std::span<const std::uint8_t> y,
                   std::span<const double> frame, std::span<double> drive) {
    topo.W.multiply(y, drive, /*accumulate=*/false);
    if (!frame.empty()) topo.W_in.multiply(frame, drive, /*accumulate=*/true);
}

void check_frame(std::span<const double> frame, int n_in) {
    if (frame.empty()) return;
    if (frame.size() != static_cast<std::size_t>(n_in))
        throw DimensionError("input frame length does not match n_in");
    for (double v : frame)
        if (!std::isfinite(v)) throw InputError("non-finite input frame");
}

}  // namespace

NeuronArrayState step(const NeuronArrayState& state, const ReservoirTopology& topo,
                      std::span<const double> input_frame, const StepParams& params,
                      const TriggerThresholds& th) {
    const std::size_t n = static_cast<std::size_t>(topo.n_neurons());
    if (state.size() != n) throw DimensionError("step: state size does not match topology");
    check_frame(input_frame, topo.params.n_in);

    NeuronArrayState next = state;
    std::vector<double> drive(n);
    compute_drive(topo, state.y_out, input_frame, drive);
    relax_capacitors(next.v_cap, drive, params.alpha);
    trigger_outputs(next.y_out, drive, next.v_cap, th);
    return next;
}

NeuronArrayState warm_state(const ReservoirTopology& topo, const SimulationConfig& config) {
    Rng rng(config.seed);
    NeuronArrayState state = initialize(topo, rng);
    return warmup(std::move(state), topo, config, rng);
}

RunResult run_from(NeuronArrayState state, const ReservoirTopology& topo,
                   const TimeSeriesInput& drive, const SimulationConfig& config) {
    config.validate(drive.n_ts);
    if (state.size() != static_cast<std::size_t>(topo.n_neurons()))
        throw DimensionError("run: state size does not match topology");
    if (drive.n_ts > 0 && drive.n_in != topo.params.n_in)
        throw DimensionError("drive width does not match the topology's n_in");
    for (double v : drive.frames)
        if (!std::isfinite(v)) throw InputError("non-finite value in drive");

    const long steps = config.n_steps();
    const int stride = config.effective_stride();
    const long n_snap = steps / stride;
    const std::size_t n = state.size();
    const StepParams params = StepParams::from_dt(config.dt);

    RunResult result;
    result.snapshots.n_neurons = static_cast<int>(n);
    result.snapshots.n_snap = static_cast<int>(n_snap);
    result.snapshots.data.assign(n * static_cast<std::size_t>(n_snap), 0);
    result.snapshots.times.reserve(static_cast<std::size_t>(n_snap));
    if (config.record_history) {
        result.y_history.reserve(static_cast<std::size_t>(steps));
        result.v_history.reserve(static_cast<std::size_t>(steps));
    }

    std::vector<double> u(n);
    int snap_col = 0;
    for (long t = 0; t < steps; ++t) {
        const auto frame = t < drive.n_ts ? drive.frame(static_cast<int>(t))
                                          : std::span<const double>{};
        compute_drive(topo, state.y_out, frame, u);
        relax_capacitors(state.v_cap, u, params.alpha);
        trigger_outputs(state.y_out, u, state.v_cap, config.thresholds);

        if ((t + 1) % stride == 0 && snap_col < n_snap) {
            for (std::size_t i = 0; i < n; ++i)
                result.snapshots.data[i * static_cast<std::size_t>(n_snap) +
                                      static_cast<std::size_t>(snap_col)] = state.y_out[i];
            result.snapshots.times.push_back(t + 1);
            ++snap_col;
        }
        if (config.record_history) {
            result.y_history.push_back(state.y_out);
            result.v_history.push_back(state.v_cap);
        }
    }
    return result;
}

RunResult run(const ReservoirTopology& topo, const TimeSeriesInput& drive,
              const SimulationConfig& config) {
    config.validate(drive.n_ts);
    return run_from(warm_state(topo, config), topo, drive, config);
}

namespace {
constexpr char kSnapshotMagic[8] = {'O', 'S', 'R', 'S', 'S', 'N', 'P', '1'};
}

void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& snap) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open snapshot file for writing: " + path.string());
    out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
    const std::uint32_t n = static_cast<std::uint32_t>(snap.n_neurons);
    const std::uint32_t s = static_cast<std::uint32_t>(snap.n_snap);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&s), 4);
    for (long t : snap.times) {
        const std::int64_t v = t;
        out.write(reinterpret_cast<const char*>(&v), 8);
    }
    // Row-major bit stream, 8 bits per byte, LSB first.
    const std::size_t total = snap.data.size();
    std::vector<std::uint8_t> packed((total + 7) / 8, 0);
    for (std::size_t b = 0; b < total; ++b)
        if (snap.data[b]) packed[b / 8] |= static_cast<std::uint8_t>(1u << (b % 8));
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
    if (!out) throw DataError("write failure on snapshot file: " + path.string());
}

SnapshotMatrix read_snapshots(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open snapshot file: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0)
        throw DataError("bad snapshot magic in " + path.string());
    std::uint32_t n = 0, s = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&s), 4);
    if (!in) throw DataError("truncated snapshot header in " + path.string());
    SnapshotMatrix snap;
    snap.n_neurons = static_cast<int>(n);
    snap.n_snap = static_cast<int>(s);
    snap.times.resize(s);
    for (auto& t : snap.times) {
        std::int64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        t = static_cast<long>(v);
    }
    const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(s);
    std::vector<std::uint8_t> packed((total + 7) / 8);
    in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (!in) throw DataError("truncated snapshot body in " + path.string());
    snap.data.resize(total);
    for (std::size_t b = 0; b < total; ++b)
        snap.data[b] = (packed[b / 8] >> (b % 8)) & 1u;
    return snap;
}

void write_snapshots_csv(const std::filesystem::path& path, const SnapshotMatrix& snap) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open CSV file for writing: " + path.string());
    out << "neuron";
    for (long t : snap.times) out << ",step_" << t;
    out << '\n';
    for (int i = 0; i < snap.n_neurons; ++i) {
        out << i;
        for (int j = 0; j < snap.n_snap; ++j) out << ',' << static_cast<int>(snap.at(i, j));
        out << '\n';
    }
    if (!out) throw DataError("write failure on CSV file: " + path.string());
}

}  // namespace oscres
