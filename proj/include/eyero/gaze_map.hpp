#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace eyero {

using Millis = std::int64_t;

// Normalized on-screen gaze point. Origin is the top-left corner, y grows
// downward. A sample with valid == false carries tracker dropout and is never
// classified or actuated on.
struct GazeSample {
    Millis ts_ms = 0;
    double x = 0.5;
    double y = 0.5;
    bool valid = true;

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

enum class Quadrant { UpperLeft, UpperRight, LowerLeft, LowerRight };
enum class BodySite { LeftWrist, RightWrist, LeftAnkle, RightAnkle };

inline constexpr std::array<Quadrant, 4> kAllQuadrants = {
    Quadrant::UpperLeft, Quadrant::UpperRight, Quadrant::LowerLeft, Quadrant::LowerRight};
inline constexpr std::array<BodySite, 4> kAllBodySites = {
    BodySite::LeftWrist, BodySite::RightWrist, BodySite::LeftAnkle, BodySite::RightAnkle};

// Throws ClassificationError for invalid or out-of-range samples.
Quadrant classify_quadrant(const GazeSample& s);

constexpr BodySite quadrant_to_body_site(Quadrant q) {
    switch (q) {
        case Quadrant::UpperLeft:  return BodySite::LeftWrist;
        case Quadrant::UpperRight: return BodySite::RightWrist;
        case Quadrant::LowerLeft:  return BodySite::LeftAnkle;
        case Quadrant::LowerRight: return BodySite::RightAnkle;
    }
    return BodySite::RightAnkle;
}

// Euclidean distance from the screen center, in [0, sqrt(0.5)].
double distance_from_center(const GazeSample& s);

std::string_view to_string(Quadrant q);
std::string_view to_string(BodySite site);
// Long form used on the wire and in logs ("LeftWrist").
BodySite body_site_from_string(std::string_view name);

} // namespace eyero
