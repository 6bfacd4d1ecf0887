#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "phmkit/decision.hpp"
#include "phmkit/evidence.hpp"
#include "phmkit/model.hpp"
#include "phmkit/pareto.hpp"
#include "phmkit/performance.hpp"
#include "phmkit/sampler.hpp"

namespace phmkit {

// Canonical decimal form used in model files: 12 significant digits, so a
// serialize/parse/serialize round trip is byte-stable across platforms.
std::string format_rate(double v);
double parse_rate(const nlohmann::json& v);

nlohmann::json model_to_json(const CtbnModel& model);
std::string model_to_string(const CtbnModel& model);  // dump(2) + newline
CtbnModel model_from_json(const nlohmann::json& doc);
CtbnModel model_from_string(const std::string& text);

Evidence evidence_from_string(const std::string& text);
nlohmann::json evidence_to_json(const Evidence& evidence);

std::vector<PerformanceFunction> performance_functions_from_string(const std::string& text);

// Accepts either a bare array of objective specs or an object
// {"objectives":[...], "pfs":[...]} carrying both.
struct ObjectivesFile {
    std::vector<ObjectiveSpec> objectives;
    std::vector<PerformanceFunction> pfs;  // optional inline definitions
};
ObjectivesFile objectives_from_string(const std::string& text);

std::vector<DecisionSpec> decision_specs_from_string(const std::string& text);

nlohmann::json trajectory_to_json(const Trajectory& traj);

}  // namespace phmkit
