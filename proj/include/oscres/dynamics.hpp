#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace oscres {

// Hysteresis thresholds of the Schmitt-trigger output stage. Signals at or
// below v_thl force the output to 0 (firing), at or above v_thh to 1
// (dormant); signals inside the open band hold the previous output.
//
// Note on the defaults: the trigger signal is u - v_cap' and the capacitor
// relaxes by a factor e^(-dt) per step, so from the standard initial state
// (v_cap = 0.9, unit drive) the largest dormancy signal a freshly-fired
// neuron can produce is 0.1 * e^(-dt) ~= 0.0905 at dt = 0.1. Thresholds
// wider than that freeze every ring; +-0.05 keeps a single pulse
// circulating for all ring sizes 3-10 with comfortable margins.
struct TriggerThresholds {
    double v_thl = -0.05;
    double v_thh = 0.05;

    void validate() const;
};

// Discrete-step parameters of the capacitor relaxation. alpha is the exact
// one-step decay factor e^(-dt/tau); tau defaults to 1 and every experiment
// here uses that value.
struct StepParams {
    double dt = 0.1;
    double tau = 1.0;
    double alpha = 0.0;

    static StepParams from_dt(double dt, double tau = 1.0);
    void validate() const;
};

// Capacitor voltages and binary outputs for all N neurons at one time step.
// y_out semantics: 0 = firing, 1 = dormant (the neuron model inverts).
struct NeuronArrayState {
    std::vector<double> v_cap;
    std::vector<std::uint8_t> y_out;

    std::size_t size() const { return v_cap.size(); }
    static NeuronArrayState zeros(std::size_t n) {
        return NeuronArrayState{std::vector<double>(n, 0.0),
                                std::vector<std::uint8_t>(n, 0)};
    }
};

// Hysteretic threshold function. Total in `signal`; non-finite signals are a
// contract violation rejected at the simulation boundary, not here.
inline std::uint8_t schmitt_trigger(std::uint8_t prev_out, double signal,
                                    const TriggerThresholds& th) {
    if (signal <= th.v_thl) return 0;
    if (signal >= th.v_thh) return 1;
    return prev_out;
}

// In-place kernels. The simulator hot loop runs on these; the value-returning
// operations below wrap them.
void relax_capacitors(std::span<double> v_cap, std::span<const double> drive,
                      double alpha);
void trigger_outputs(std::span<std::uint8_t> y_out, std::span<const double> drive,
                     std::span<const double> new_v_cap, const TriggerThresholds& th);

// v_cap' = alpha * v_cap + (1 - alpha) * drive, elementwise; outputs copied
// through untouched.
NeuronArrayState update_capacitors(const NeuronArrayState& state,
                                   std::span<const double> drive,
                                   const StepParams& params);

// y_out'[i] = schmitt_trigger(y_out[i], drive[i] - new_v_cap[i], th). The
// signal uses the post-update capacitor value.
std::vector<std::uint8_t> update_outputs(const NeuronArrayState& state,
                                         std::span<const double> drive,
                                         std::span<const double> new_v_cap,
                                         const TriggerThresholds& th);

}  // namespace oscres
