#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phmkit/evidence.hpp"
#include "phmkit/model.hpp"

namespace phmkit {

struct TransitionRecord {
    double t;
    std::uint32_t var;  // position in Trajectory::var_ids
    std::uint32_t new_state;

    bool operator==(const TransitionRecord&) const = default;
};

// Piecewise-constant sample path of all non-decision variables; paths are
// right-continuous (the state at a transition time is the new state).
struct Trajectory {
    std::vector<std::string> var_ids;  // sorted
    std::vector<std::uint32_t> initial_states;
    std::vector<TransitionRecord> transitions;  // chronological
    double horizon = 0.0;

    std::uint32_t state_at(std::size_t var_pos, double t) const;
    bool operator==(const Trajectory&) const = default;
};

// Forward simulation with one exponential clock per variable; a parent change
// re-draws the clocks of the affected children. Deterministic for a fixed
// (model, assignment, seed).
Trajectory sample_trajectory(const CtbnModel& model,
                             const std::map<std::string, std::string>& decision_assignment,
                             double horizon, std::uint64_t seed);

// Counter-style per-trajectory seed derivation used by the MC estimators.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_accepted = 0;
    std::uint64_t n_sampled = 0;
};

// Rejection estimators: trajectories violating any evidence item (within the
// simulated window) are discarded. Throw evidence_error when everything is
// rejected.
McEstimate mc_state_probability(const CtbnModel& model,
                                const std::map<std::string, std::string>& decisions,
                                const Evidence& evidence, const std::string& var,
                                const std::string& state, double t, std::uint64_t samples,
                                std::uint64_t master_seed);

McEstimate mc_occupancy(const CtbnModel& model,
                        const std::map<std::string, std::string>& decisions,
                        const Evidence& evidence,
                        const std::vector<std::pair<std::string, std::string>>& condition,
                        double horizon, std::uint64_t samples, std::uint64_t master_seed);

// Accrual spec with decision literals already resolved away.
struct McPerformanceSpec {
    struct Clause {
        std::vector<std::pair<std::string, std::string>> literals;
        double rate = 0.0;
    };
    struct Impulse {
        std::string var;
        std::string state;
        double value = 0.0;
        std::vector<std::pair<std::string, std::string>> conditions;
    };
    std::vector<Clause> clauses;  // first match wins
    std::vector<Impulse> impulses;
};

McEstimate mc_performance(const CtbnModel& model,
                          const std::map<std::string, std::string>& decisions,
                          const Evidence& evidence, const McPerformanceSpec& spec, double horizon,
                          std::uint64_t samples, std::uint64_t master_seed);

// P(var = state at t_i) for each grid time, one trajectory sweep.
std::vector<McEstimate> mc_state_probability_grid(
    const CtbnModel& model, const std::map<std::string, std::string>& decisions,
    const std::string& var, const std::string& state, const std::vector<double>& grid,
    std::uint64_t samples, std::uint64_t master_seed);

}  // namespace phmkit
