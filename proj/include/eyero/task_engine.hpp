#pragma once

#include "eyero/gaze_map.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace eyero {

// Three-choice vigilance task with centered stimuli.
enum class StimulusShape { Target, NonTarget, Distractor };
enum class DurationClass { Short, Long };
enum class ResponseKey { Left, Right };

std::string_view to_string(StimulusShape shape);
std::string_view to_string(DurationClass d);
std::string_view to_string(ResponseKey key);
StimulusShape stimulus_shape_from_string(std::string_view name);
DurationClass duration_class_from_string(std::string_view name);
ResponseKey response_key_from_string(std::string_view name);

inline constexpr int kTrialsPerSession = 10;
inline constexpr Millis kDefaultDisplayMs = 200;
inline constexpr Millis kMaxResponseWindowMs = 2000;

struct IntervalBounds {
    Millis min_ms;
    Millis max_ms;
};

// Inclusive bounds of the inter-stimulus interval: 2-5 s short, 25-35 s long.
constexpr IntervalBounds interval_bounds(DurationClass d) {
    return d == DurationClass::Short ? IntervalBounds{2000, 5000} : IntervalBounds{25000, 35000};
}

struct TrialSpec {
    int index = 0;
    StimulusShape shape = StimulusShape::Target;
    Millis pre_interval_ms = 0;
    Millis display_ms = kDefaultDisplayMs;

    friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

// Ten trials in a 4:3:3 target/non-target/distractor mix, order shuffled,
// intervals drawn uniformly from the duration class. Deterministic per seed.
std::vector<TrialSpec> generate_trial_plan(DurationClass d, std::uint64_t seed,
                                           Millis display_ms = kDefaultDisplayMs);

struct KeyEvent {
    ResponseKey key = ResponseKey::Left;
    Millis ts_ms = 0;
};

struct TrialOutcome {
    bool responded = false;
    std::optional<ResponseKey> key;
    std::optional<Millis> rt_ms;
    bool correct = false;
    bool missed = false;

    friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

// Scores the first key press in (onset, onset + window]. Earlier and later
// presses are ignored. Target+Left and NonTarget+Right are correct; a silent
// distractor is a correct non-response; a silent target/non-target is missed;
// anything else is a responded, incorrect trial.
TrialOutcome score_response(const TrialSpec& spec, std::span<const KeyEvent> keys,
                            Millis onset_ms, Millis window_ms);
TrialOutcome score_response(const TrialSpec& spec, std::optional<KeyEvent> key,
                            Millis onset_ms, Millis window_ms);

struct SessionMetrics {
    std::optional<double> mean_rt_ms; // over correct responses only
    int missed_count = 0;
    double accuracy = 0.0;
};

// Requires exactly ten outcomes (ContractError otherwise).
SessionMetrics session_metrics(std::span<const TrialOutcome> outcomes);

struct TrialTiming {
    Millis onset_ms;
    Millis window_end_ms;
};

// Onsets are spaced by each trial's interval starting from start_ms; each
// response window closes at min(onset + max_window, next onset).
std::vector<TrialTiming> schedule_trials(std::span<const TrialSpec> plan, Millis start_ms,
                                         Millis max_window_ms = kMaxResponseWindowMs);

} // namespace eyero
