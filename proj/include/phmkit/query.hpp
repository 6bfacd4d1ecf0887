#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phmkit/evidence.hpp"
#include "phmkit/joint.hpp"
#include "phmkit/model.hpp"

namespace phmkit {

enum class Engine { exact, mc, auto_select };

std::string to_string(Engine e);
Engine engine_from_string(const std::string& s);

struct QueryOptions {
    Engine engine = Engine::auto_select;
    std::uint64_t mc_samples = 100000;
    std::uint64_t seed = 42;
    double tol = 1e-9;
    std::size_t state_cap = default_state_cap;
};

struct QueryResult {
    double value = 0.0;
    double std_error = 0.0;  // 0 for the exact engine
    std::uint64_t n_samples = 0;
    std::string engine;
};

// Conjunction of (variable, state-name) literals.
using StateCondition = std::vector<std::pair<std::string, std::string>>;

// P(var = state at time t | evidence restricted to [0, t]). Queries only see
// the ancestors of the query and evidence variables; everything else is
// dropped before amalgamation or simulation.
QueryResult query_state_probability(const CtbnModel& model,
                                    const std::map<std::string, std::string>& decisions,
                                    const Evidence& evidence, const std::string& var,
                                    const std::string& state, double t,
                                    const QueryOptions& opts = {});

// Expected time in [0, horizon] during which the condition holds. The exact
// engine integrates the filtered distribution; the MC engine averages
// per-trajectory occupancy over accepted trajectories.
QueryResult expected_occupancy(const CtbnModel& model,
                               const std::map<std::string, std::string>& decisions,
                               const Evidence& evidence, const StateCondition& condition,
                               double horizon, const QueryOptions& opts = {});

// True when the exact engine can amalgamate the relevant sub-model under cap.
bool exact_engine_feasible(const CtbnModel& model, const std::vector<std::string>& targets,
                           std::size_t cap = default_state_cap);

}  // namespace phmkit
