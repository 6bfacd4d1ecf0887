#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phmkit/decision.hpp"
#include "phmkit/model.hpp"

namespace phmkit {

enum class Direction { maximize, minimize };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

struct ObjectiveSpec {
    std::string id;
    std::string pf;  // performance function id
    Direction direction = Direction::maximize;
    std::optional<double> threshold;  // feasibility bound in the objective's direction
};

struct ObjectiveValue {
    double value = 0.0;
    double std_error = 0.0;
};

struct ScenarioResult {
    ScenarioAssignment assignment;
    std::map<std::string, ObjectiveValue> values;  // objective id -> value
    bool feasible = true;
    bool on_front = false;
};

// Cartesian product of decision states; decisions iterate in sorted-id order
// with the first one varying slowest, states in declared order.
std::vector<ScenarioAssignment> enumerate_scenarios(const CtbnModel& model, std::size_t cap = 1024);

// Non-dominated subset on point estimates; equal objective vectors are all
// kept. Returns membership flags aligned with `results`.
std::vector<bool> pareto_front(const std::vector<ScenarioResult>& results,
                               const std::vector<ObjectiveSpec>& objectives);

struct ScenarioReport {
    std::vector<ScenarioResult> rows;  // feasible-first, ordered by the first objective
    std::vector<ObjectiveSpec> objectives;
    std::size_t n_feasible = 0;
};

// Applies thresholds, computes the front over the feasible rows and orders
// the report by the first objective (best first).
ScenarioReport scenario_report(std::vector<ScenarioResult> results,
                               const std::vector<ObjectiveSpec>& objectives);

std::string report_table(const ScenarioReport& report);

}  // namespace phmkit
