#include "twinpass/router.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twinpass/errors.hpp"

namespace twinpass {

using nlohmann::json;

std::string to_string(ZoneName z) {
    switch (z) {
        case ZoneName::Platinum: return "Platinum";
        case ZoneName::Moderate: return "Moderate";
        case ZoneName::LowConfidence: return "LowConfidence";
        case ZoneName::HallucinationRisk: return "HallucinationRisk";
        case ZoneName::Flagged: return "Flagged";
    }
    return "?";
}

std::string to_string(RouteAction a) {
    switch (a) {
        case RouteAction::auto_accept: return "auto_accept";
        case RouteAction::consider_rag: return "consider_rag";
        case RouteAction::route_to_rag: return "route_to_rag";
        case RouteAction::discard_flag: return "discard_flag";
        case RouteAction::escalate: return "escalate";
    }
    return "?";
}

ZoneName zone_from_string(const std::string& s) {
    if (s == "Platinum") return ZoneName::Platinum;
    if (s == "Moderate") return ZoneName::Moderate;
    if (s == "LowConfidence") return ZoneName::LowConfidence;
    if (s == "HallucinationRisk") return ZoneName::HallucinationRisk;
    if (s == "Flagged") return ZoneName::Flagged;
    throw ConfigError("unknown zone name: " + s);
}

RouteAction action_from_string(const std::string& s) {
    if (s == "auto_accept") return RouteAction::auto_accept;
    if (s == "consider_rag") return RouteAction::consider_rag;
    if (s == "route_to_rag") return RouteAction::route_to_rag;
    if (s == "discard_flag") return RouteAction::discard_flag;
    if (s == "escalate") return RouteAction::escalate;
    throw ConfigError("unknown route action: " + s);
}

ThresholdMap ThresholdMap::default_map() {
    ThresholdMap m;
    m.zones = {
        {ZoneName::HallucinationRisk, 1.0, 3.0, RouteAction::discard_flag,
         0.44, 0.60},
        {ZoneName::LowConfidence, 3.0, 4.0, RouteAction::route_to_rag, 0.59, 0.66},
        {ZoneName::Moderate, 4.0, 4.5, RouteAction::consider_rag, 0.65, 0.71},
        {ZoneName::Platinum, 4.5, 5.0, RouteAction::auto_accept, 0.73, 0.78},
    };
    return m;
}

ThresholdMap ThresholdMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open threshold map file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed threshold map " + path + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError("threshold map must be a JSON array of zones");
    ThresholdMap m;
    for (const auto& z : j) {
        Zone zone;
        zone.name = zone_from_string(z.at("name").get<std::string>());
        zone.lower = z.at("lower").get<double>();
        zone.upper = z.at("upper").get<double>();
        zone.action = action_from_string(z.at("action").get<std::string>());
        if (z.contains("ref_acc_12b")) zone.ref_acc_12b = z["ref_acc_12b"].get<double>();
        if (z.contains("ref_acc_27b")) zone.ref_acc_27b = z["ref_acc_27b"].get<double>();
        m.zones.push_back(zone);
    }
    auto violations = validate_threshold_map(m);
    if (!violations.empty()) {
        std::ostringstream os;
        os << "invalid threshold map " << path << ":";
        for (const auto& v : violations) os << " [" << v << "]";
        throw ConfigError(os.str());
    }
    return m;
}

std::vector<std::string> validate_threshold_map(const ThresholdMap& map) {
    std::vector<std::string> out;
    if (map.zones.empty()) {
        out.push_back("threshold map has no zones");
        return out;
    }
    const double eps = 1e-9;
    for (const auto& z : map.zones) {
        if (z.lower >= z.upper)
            out.push_back("zone " + to_string(z.name) + " has non-positive width");
    }
    for (size_t i = 0; i + 1 < map.zones.size(); ++i) {
        const Zone& a = map.zones[i];
        const Zone& b = map.zones[i + 1];
        if (b.lower < a.lower + eps && !(std::abs(b.lower - a.lower) < eps))
            out.push_back("zones " + to_string(a.name) + " and " + to_string(b.name) +
                          " are not in increasing order");
        if (b.lower > a.upper + eps)
            out.push_back("gap between " + to_string(a.name) + " and " +
                          to_string(b.name) + " over [" + std::to_string(a.upper) +
                          ", " + std::to_string(b.lower) + ")");
        if (b.lower < a.upper - eps)
            out.push_back("overlap between " + to_string(a.name) + " and " +
                          to_string(b.name));
    }
    if (std::abs(map.zones.front().lower - 1.0) > eps)
        out.push_back("first zone " + to_string(map.zones.front().name) +
                      " does not start at 1.0");
    if (std::abs(map.zones.back().upper - 5.0) > eps)
        out.push_back("last zone " + to_string(map.zones.back().name) +
                      " does not end at 5.0");
    return out;
}

RouteDecision route(std::optional<double> ensemble_mean, const ThresholdMap& map) {
    RouteDecision d;
    if (!ensemble_mean) {
        d.zone = ZoneName::Flagged;
        d.action = RouteAction::escalate;
        return d;
    }
    double e = *ensemble_mean;
    if (e < 1.0 || e > 5.0)
        throw DomainError("ensemble mean " + std::to_string(e) + " outside [1,5]");
    for (size_t i = 0; i < map.zones.size(); ++i) {
        const Zone& z = map.zones[i];
        bool last = i + 1 == map.zones.size();
        if (e >= z.lower && (e < z.upper || (last && e <= z.upper))) {
            d.zone = z.name;
            d.action = z.action;
            d.ensemble_mean = e;
            d.reference_accuracy_12b = z.ref_acc_12b;
            d.reference_accuracy_27b = z.ref_acc_27b;
            return d;
        }
    }
    throw DomainError("validated map does not cover value " + std::to_string(e));
}

}  // namespace twinpass
