#pragma once

#include <optional>
#include <string>
#include <vector>

namespace twinpass {

enum class ZoneName { HallucinationRisk, LowConfidence, Moderate, Platinum, Flagged };
enum class RouteAction { discard_flag, route_to_rag, consider_rag, auto_accept, escalate };

std::string to_string(ZoneName z);
std::string to_string(RouteAction a);
ZoneName zone_from_string(const std::string& s);
RouteAction action_from_string(const std::string& s);

// One operational band of the threshold map. Intervals are half-open
// lower-inclusive [lower, upper); the topmost zone is closed at its
// upper bound, so a boundary value takes the more confident zone.
struct Zone {
    ZoneName name;
    double lower = 0.0;
    double upper = 0.0;
    RouteAction action;
    // Advisory per-model accuracies for operator context; never used
    // for routing.
    std::optional<double> ref_acc_12b;
    std::optional<double> ref_acc_27b;
};

// Zones ordered ascending by lower bound, jointly partitioning [1,5].
struct ThresholdMap {
    std::vector<Zone> zones;

    static ThresholdMap default_map();
    static ThresholdMap from_file(const std::string& path);
};

struct RouteDecision {
    ZoneName zone = ZoneName::Flagged;
    RouteAction action = RouteAction::escalate;
    std::optional<double> ensemble_mean;
    std::optional<double> reference_accuracy_12b;
    std::optional<double> reference_accuracy_27b;
};

// Empty list means the map is valid; otherwise one message per gap,
// overlap, or ordering violation.
std::vector<std::string> validate_threshold_map(const ThresholdMap& map);

// nullopt (no signal / quorum failure) routes to Flagged/escalate.
RouteDecision route(std::optional<double> ensemble_mean, const ThresholdMap& map);

}  // namespace twinpass
