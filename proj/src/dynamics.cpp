#include "oscres/dynamics.hpp"

#include <cmath>

#include "oscres/errors.hpp"

namespace oscres {

void TriggerThresholds::validate() const {
    if (!std::isfinite(v_thl) || !std::isfinite(v_thh))
        throw ConfigError("trigger thresholds must be finite");
    if (!(v_thl < v_thh))
        throw ConfigError("trigger thresholds require v_thl < v_thh");
}

StepParams StepParams::from_dt(double dt, double tau) {
    StepParams p;
    p.dt = dt;
    p.tau = tau;
    p.alpha = std::exp(-dt / tau);
    p.validate();
    return p;
}

void StepParams::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError("step dt must be positive and finite");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ConfigError("time constant tau must be positive and finite");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw ConfigError("alpha must lie in (0,1)");
    if (alpha != std::exp(-dt / tau))
        throw ConfigError("alpha is not e^(-dt/tau)");
}

void relax_capacitors(std::span<double> v_cap, std::span<const double> drive,
                      double alpha) {
    if (v_cap.size() != drive.size())
        throw DimensionError("capacitor update: drive length mismatch");
    const double beta = 1.0 - alpha;
    for (std::size_t i = 0; i < v_cap.size(); ++i)
        v_cap[i] = alpha * v_cap[i] + beta * drive[i];
}

void trigger_outputs(std::span<std::uint8_t> y_out, std::span<const double> drive,
                     std::span<const double> new_v_cap, const TriggerThresholds& th) {
    if (y_out.size() != drive.size() || y_out.size() != new_v_cap.size())
        throw DimensionError("output update: vector length mismatch");
    for (std::size_t i = 0; i < y_out.size(); ++i)
        y_out[i] = schmitt_trigger(y_out[i], drive[i] - new_v_cap[i], th);
}

NeuronArrayState update_capacitors(const NeuronArrayState& state,
                                   std::span<const double> drive,
                                   const StepParams& params) {
    NeuronArrayState next = state;
    relax_capacitors(next.v_cap, drive, params.alpha);
    return next;
}

std::vector<std::uint8_t> update_outputs(const NeuronArrayState& state,
                                         std::span<const double> drive,
                                         std::span<const double> new_v_cap,
                                         const TriggerThresholds& th) {
    std::vector<std::uint8_t> next = state.y_out;
    trigger_outputs(next, drive, new_v_cap, th);
    return next;
}

}  // namespace oscres
