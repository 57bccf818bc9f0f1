#include "eyero/task_engine.hpp"

#include "eyero/errors.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace eyero {

std::string_view to_string(StimulusShape shape) {
    switch (shape) {
        case StimulusShape::Target:     return "target";
        case StimulusShape::NonTarget:  return "nontarget";
        case StimulusShape::Distractor: return "distractor";
    }
    return "?";
}

std::string_view to_string(DurationClass d) {
    return d == DurationClass::Short ? "short" : "long";
}

std::string_view to_string(ResponseKey key) {
    return key == ResponseKey::Left ? "Left" : "Right";
}

StimulusShape stimulus_shape_from_string(std::string_view name) {
    for (auto s : {StimulusShape::Target, StimulusShape::NonTarget, StimulusShape::Distractor}) {
        if (to_string(s) == name) return s;
    }
    throw ValidationError("unknown stimulus shape '" + std::string(name) + "'");
}

DurationClass duration_class_from_string(std::string_view name) {
    if (name == "short") return DurationClass::Short;
    if (name == "long") return DurationClass::Long;
    throw ValidationError("unknown duration class '" + std::string(name) + "'");
}

ResponseKey response_key_from_string(std::string_view name) {
    if (name == "Left") return ResponseKey::Left;
    if (name == "Right") return ResponseKey::Right;
    throw ValidationError("unknown response key '" + std::string(name) + "'");
}

std::vector<TrialSpec> generate_trial_plan(DurationClass d, std::uint64_t seed,
                                           Millis display_ms) {
    std::vector<StimulusShape> shapes;
    shapes.insert(shapes.end(), 4, StimulusShape::Target);
    shapes.insert(shapes.end(), 3, StimulusShape::NonTarget);
    shapes.insert(shapes.end(), 3, StimulusShape::Distractor);

    std::mt19937_64 rng(seed);
    std::shuffle(shapes.begin(), shapes.end(), rng);

    const auto bounds = interval_bounds(d);
    std::uniform_int_distribution<Millis> interval(bounds.min_ms, bounds.max_ms);

    std::vector<TrialSpec> plan;
    plan.reserve(shapes.size());
    for (int i = 0; i < kTrialsPerSession; ++i) {
        plan.push_back(TrialSpec{i, shapes[static_cast<std::size_t>(i)], interval(rng), display_ms});
    }
    return plan;
}

TrialOutcome score_response(const TrialSpec& spec, std::span<const KeyEvent> keys,
                            Millis onset_ms, Millis window_ms) {
    const KeyEvent* first = nullptr;
    for (const auto& k : keys) {
        if (k.ts_ms <= onset_ms || k.ts_ms > onset_ms + window_ms) continue;
        if (!first || k.ts_ms < first->ts_ms) first = &k;
    }

    TrialOutcome out;
    if (!first) {
        out.missed = spec.shape != StimulusShape::Distractor;
        out.correct = !out.missed;
        return out;
    }
    out.responded = true;
    out.key = first->key;
    out.rt_ms = first->ts_ms - onset_ms;
    out.correct = (spec.shape == StimulusShape::Target && first->key == ResponseKey::Left) ||
                  (spec.shape == StimulusShape::NonTarget && first->key == ResponseKey::Right);
    return out;
}

TrialOutcome score_response(const TrialSpec& spec, std::optional<KeyEvent> key,
                            Millis onset_ms, Millis window_ms) {
    if (!key) return score_response(spec, std::span<const KeyEvent>{}, onset_ms, window_ms);
    return score_response(spec, std::span<const KeyEvent>(&*key, 1), onset_ms, window_ms);
}

SessionMetrics session_metrics(std::span<const TrialOutcome> outcomes) {
    if (outcomes.size() != static_cast<std::size_t>(kTrialsPerSession)) {
        throw ContractError("session metrics need exactly 10 outcomes, got " +
                            std::to_string(outcomes.size()));
    }
    SessionMetrics m;
    double rt_sum = 0.0;
    int rt_count = 0;
    int correct = 0;
    for (const auto& o : outcomes) {
        if (o.missed) ++m.missed_count;
        if (o.correct) {
            ++correct;
            if (o.responded && o.rt_ms) {
                rt_sum += static_cast<double>(*o.rt_ms);
                ++rt_count;
            }
        }
    }
    if (rt_count > 0) m.mean_rt_ms = rt_sum / rt_count;
    m.accuracy = static_cast<double>(correct) / kTrialsPerSession;
    return m;
}

std::vector<TrialTiming> schedule_trials(std::span<const TrialSpec> plan, Millis start_ms,
                                         Millis max_window_ms) {
    std::vector<TrialTiming> timing;
    timing.reserve(plan.size());
    Millis onset = start_ms;
    for (const auto& t : plan) {
        onset += t.pre_interval_ms;
        timing.push_back({onset, onset + max_window_ms});
    }
    for (std::size_t i = 0; i + 1 < timing.size(); ++i) {
        timing[i].window_end_ms = std::min(timing[i].window_end_ms, timing[i + 1].onset_ms);
    }
    return timing;
}

} // namespace eyero
