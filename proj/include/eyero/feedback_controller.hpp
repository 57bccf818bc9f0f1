#pragma once

#include "eyero/gaze_map.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace eyero {

enum class FeedbackMode { Silence, Stationary, Filter };

inline constexpr std::array<FeedbackMode, 3> kAllFeedbackModes = {
    FeedbackMode::Silence, FeedbackMode::Stationary, FeedbackMode::Filter};

std::string_view to_string(FeedbackMode mode);
FeedbackMode feedback_mode_from_string(std::string_view name);

// Hysteresis pair for the filter mode, in normalized distance from center.
// The filter engages when distance exceeds r_on and releases once it drops
// below r_off.
struct FilterParams {
    double r_on = 0.20;
    double r_off = 0.15;

    // 0 < r_off <= r_on < sqrt(0.5). controller_step itself only needs
    // r_off <= r_on, so the degenerate (0, 0) pair stays usable.
    bool is_valid() const;
};

struct ControllerState {
    FeedbackMode mode = FeedbackMode::Silence;
    std::optional<BodySite> active_site;
    bool filter_engaged = false;
    Millis last_update_ms = 0;

    friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

// Edge-triggered request to switch one body site on or off.
struct ActuatorIntent {
    BodySite site = BodySite::LeftWrist;
    bool active = false;
    Millis ts_ms = 0;

    friend bool operator==(const ActuatorIntent&, const ActuatorIntent&) = default;
};

ControllerState initial_controller_state(FeedbackMode mode, Millis now_ms = 0);

struct StepResult {
    ControllerState state;
    std::vector<ActuatorIntent> intents;
};

// Advances the controller by one gaze sample. Throws TimingError when the
// sample is older than the last update; the caller drops the sample.
StepResult controller_step(const ControllerState& state, const GazeSample& s,
                           const FilterParams& params);

// Allocation-free variant used on the hot path: appends to `intents` and
// updates `state` in place. Same semantics and errors as controller_step.
void controller_step_into(ControllerState& state, const GazeSample& s,
                          const FilterParams& params, std::vector<ActuatorIntent>& intents);

// Switches off the active site (if any) and disengages the filter. Used when
// a session leaves the task phases so nothing vibrates during rest.
void controller_release(ControllerState& state, Millis now_ms,
                        std::vector<ActuatorIntent>& intents);

enum class MotorLevel { Off, On };

// 1 Hz, 50% duty pulse train anchored at the activation instant of the
// current site.
MotorLevel pulse_schedule(std::optional<BodySite> active_site, Millis now_ms, Millis epoch_ms);

} // namespace eyero
