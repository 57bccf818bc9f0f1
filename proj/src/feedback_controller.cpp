#include "eyero/feedback_controller.hpp"

#include "eyero/errors.hpp"

#include <cmath>
#include <string>

namespace eyero {

std::string_view to_string(FeedbackMode mode) {
    switch (mode) {
        case FeedbackMode::Silence:    return "silence";
        case FeedbackMode::Stationary: return "stationary";
        case FeedbackMode::Filter:     return "filter";
    }
    return "?";
}

FeedbackMode feedback_mode_from_string(std::string_view name) {
    for (FeedbackMode mode : kAllFeedbackModes) {
        if (to_string(mode) == name) return mode;
    }
    throw ValidationError("unknown feedback mode '" + std::string(name) + "'");
}

bool FilterParams::is_valid() const {
    return r_off > 0.0 && r_off <= r_on && r_on < std::sqrt(0.5);
}

ControllerState initial_controller_state(FeedbackMode mode, Millis now_ms) {
    ControllerState state;
    state.mode = mode;
    state.last_update_ms = now_ms;
    return state;
}

namespace {

void switch_to(ControllerState& state, BodySite target, Millis ts,
               std::vector<ActuatorIntent>& intents) {
    if (state.active_site == target) return;
    if (state.active_site) {
        intents.push_back({*state.active_site, false, ts});
    }
    intents.push_back({target, true, ts});
    state.active_site = target;
}

void switch_off(ControllerState& state, Millis ts, std::vector<ActuatorIntent>& intents) {
    if (!state.active_site) return;
    intents.push_back({*state.active_site, false, ts});
    state.active_site.reset();
}

} // namespace

void controller_step_into(ControllerState& state, const GazeSample& s,
                          const FilterParams& params, std::vector<ActuatorIntent>& intents) {
    if (s.ts_ms < state.last_update_ms) {
        throw TimingError("gaze sample at " + std::to_string(s.ts_ms) +
                          " ms precedes controller time " +
                          std::to_string(state.last_update_ms) + " ms");
    }
    if (!s.valid) return;

    state.last_update_ms = s.ts_ms;
    switch (state.mode) {
        case FeedbackMode::Silence:
            return;
        case FeedbackMode::Stationary:
            switch_to(state, quadrant_to_body_site(classify_quadrant(s)), s.ts_ms, intents);
            return;
        case FeedbackMode::Filter: {
            const double d = distance_from_center(s);
            state.filter_engaged = state.filter_engaged ? (d >= params.r_off) : (d > params.r_on);
            if (state.filter_engaged) {
                switch_to(state, quadrant_to_body_site(classify_quadrant(s)), s.ts_ms, intents);
            } else {
                switch_off(state, s.ts_ms, intents);
            }
            return;
        }
    }
}

StepResult controller_step(const ControllerState& state, const GazeSample& s,
                           const FilterParams& params) {
    StepResult result{state, {}};
    controller_step_into(result.state, s, params, result.intents);
    return result;
}

void controller_release(ControllerState& state, Millis now_ms,
                        std::vector<ActuatorIntent>& intents) {
    switch_off(state, now_ms, intents);
    state.filter_engaged = false;
    if (now_ms > state.last_update_ms) state.last_update_ms = now_ms;
}

MotorLevel pulse_schedule(std::optional<BodySite> active_site, Millis now_ms, Millis epoch_ms) {
    if (!active_site || now_ms < epoch_ms) return MotorLevel::Off;
    return ((now_ms - epoch_ms) % 1000) < 500 ? MotorLevel::On : MotorLevel::Off;
}

} // namespace eyero
