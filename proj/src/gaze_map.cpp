#include "eyero/gaze_map.hpp"

#include "eyero/errors.hpp"

#include <cmath>
#include <string>

namespace eyero {

namespace {

void require_classifiable(const GazeSample& s) {
    if (!s.valid) {
        throw ClassificationError("gaze sample is flagged invalid");
    }
    if (!(s.x >= 0.0 && s.x <= 1.0 && s.y >= 0.0 && s.y <= 1.0)) {
        throw ClassificationError("gaze sample outside the unit square");
    }
}

} // namespace

Quadrant classify_quadrant(const GazeSample& s) {
    require_classifiable(s);
    const bool right = s.x >= 0.5;
    const bool lower = s.y >= 0.5;
    if (lower) return right ? Quadrant::LowerRight : Quadrant::LowerLeft;
    return right ? Quadrant::UpperRight : Quadrant::UpperLeft;
}

double distance_from_center(const GazeSample& s) {
    require_classifiable(s);
    return std::hypot(s.x - 0.5, s.y - 0.5);
}

std::string_view to_string(Quadrant q) {
    switch (q) {
        case Quadrant::UpperLeft:  return "UpperLeft";
        case Quadrant::UpperRight: return "UpperRight";
        case Quadrant::LowerLeft:  return "LowerLeft";
        case Quadrant::LowerRight: return "LowerRight";
    }
    return "?";
}

std::string_view to_string(BodySite site) {
    switch (site) {
        case BodySite::LeftWrist:  return "LeftWrist";
        case BodySite::RightWrist: return "RightWrist";
        case BodySite::LeftAnkle:  return "LeftAnkle";
        case BodySite::RightAnkle: return "RightAnkle";
    }
    return "?";
}

BodySite body_site_from_string(std::string_view name) {
    for (BodySite site : kAllBodySites) {
        if (to_string(site) == name) return site;
    }
    throw ValidationError("unknown body site '" + std::string(name) + "'");
}

} // namespace eyero
