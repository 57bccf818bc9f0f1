#pragma once

#include "eyero/feedback_controller.hpp"
#include "eyero/task_engine.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace eyero {

// One cell of the 3 (feedback) x 2 (duration) x 2 (distraction) design.
struct SessionConfig {
    FeedbackMode feedback = FeedbackMode::Silence;
    DurationClass duration = DurationClass::Short;
    bool distraction = false;

    friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

inline constexpr int kSessionsPerStudy = 12;

// Canonical order: feedback, then duration, then distraction (false first).
std::array<SessionConfig, kSessionsPerStudy> all_session_configs();
int config_index(const SessionConfig& c);
// e.g. "filter_long_distraction", "silence_short_nodistraction"
std::string config_label(const SessionConfig& c);

struct StudyPlan {
    std::string participant_id;
    std::vector<SessionConfig> sessions;
    std::uint64_t seed = 0;
};

// Participant ids end up in file names and CSV cells: [A-Za-z0-9_-], 1-64
// characters. Throws ValidationError.
void validate_participant_id(const std::string& id);

// Uniformly shuffled permutation of the 12 configs, deterministic per seed.
StudyPlan generate_study_plan(const std::string& participant_id, std::uint64_t seed);
bool is_complete_design(const std::vector<SessionConfig>& sessions);

// Seed for the trial plan of the session at position `session_index`.
std::uint64_t trial_seed_for(std::uint64_t study_seed, int session_index);

// Likert 1-7 answers to the six post-session items.
struct QuestionnaireResponse {
    std::array<int, 6> q{};

    friend bool operator==(const QuestionnaireResponse&, const QuestionnaireResponse&) = default;
};

inline constexpr std::array<const char*, 6> kQuestionnaireItems = {
    "can focus on the task",
    "can focus on the screen center",
    "feel distracted due to the feedback",
    "think the feedback could improve your attention",
    "feel your performance is affected by the feedback",
    "hope the feedback could be used in your daily life",
};

// Throws ValidationError naming the first out-of-range item.
void validate(const QuestionnaireResponse& r);

// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace eyero
