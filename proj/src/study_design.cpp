#include "eyero/study_design.hpp"

#include "eyero/errors.hpp"

#include <algorithm>
#include <random>

namespace eyero {

std::array<SessionConfig, kSessionsPerStudy> all_session_configs() {
    std::array<SessionConfig, kSessionsPerStudy> out{};
    std::size_t i = 0;
    for (FeedbackMode f : kAllFeedbackModes) {
        for (DurationClass d : {DurationClass::Short, DurationClass::Long}) {
            for (bool distraction : {false, true}) {
                out[i++] = SessionConfig{f, d, distraction};
            }
        }
    }
    return out;
}

int config_index(const SessionConfig& c) {
    return static_cast<int>(c.feedback) * 4 + static_cast<int>(c.duration) * 2 +
           (c.distraction ? 1 : 0);
}

std::string config_label(const SessionConfig& c) {
    std::string s(to_string(c.feedback));
    s += '_';
    s += to_string(c.duration);
    s += c.distraction ? "_distraction" : "_nodistraction";
    return s;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void validate_participant_id(const std::string& id) {
    const bool ok = !id.empty() && id.size() <= 64 &&
                    std::all_of(id.begin(), id.end(), [](char c) {
                        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                               (c >= '0' && c <= '9') || c == '_' || c == '-';
                    });
    if (!ok) throw ValidationError("invalid participant id '" + id + "'");
}

StudyPlan generate_study_plan(const std::string& participant_id, std::uint64_t seed) {
    validate_participant_id(participant_id);
    const auto configs = all_session_configs();
    StudyPlan plan{participant_id, {configs.begin(), configs.end()}, seed};
    std::mt19937_64 rng(seed);
    std::shuffle(plan.sessions.begin(), plan.sessions.end(), rng);
    return plan;
}

bool is_complete_design(const std::vector<SessionConfig>& sessions) {
    if (sessions.size() != kSessionsPerStudy) return false;
    std::array<bool, kSessionsPerStudy> seen{};
    for (const auto& c : sessions) {
        auto& slot = seen[static_cast<std::size_t>(config_index(c))];
        if (slot) return false;
        slot = true;
    }
    return true;
}

std::uint64_t trial_seed_for(std::uint64_t study_seed, int session_index) {
    return mix_seed(study_seed, 0x7472000ULL + static_cast<std::uint64_t>(session_index));
}

void validate(const QuestionnaireResponse& r) {
    for (std::size_t i = 0; i < r.q.size(); ++i) {
        if (r.q[i] < 1 || r.q[i] > 7) {
            throw ValidationError("q" + std::to_string(i + 1) + " = " + std::to_string(r.q[i]) +
                                  " is outside the 1-7 scale");
        }
    }
}

} // namespace eyero
