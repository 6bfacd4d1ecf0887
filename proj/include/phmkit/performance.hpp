#pragma once

#include <map>
#include <string>
#include <vector>

#include "phmkit/decision.hpp"
#include "phmkit/evidence.hpp"
#include "phmkit/model.hpp"
#include "phmkit/query.hpp"

namespace phmkit {

struct PfLiteral {
    std::string var;
    std::string state;
};

struct PfClause {
    std::vector<PfLiteral> literals;  // conjunction; empty matches everything
    double rate = 0.0;                // value per hour while matched
};

// Lump value collected whenever `enter.var` transitions into `enter.state`
// while the extra conditions hold in the resulting joint state.
struct PfImpulse {
    PfLiteral enter;
    double value = 0.0;
    std::vector<PfLiteral> conditions;
};

// First matching clause wins; no match accrues nothing.
struct PerformanceFunction {
    std::string id;
    std::vector<PfClause> clauses;
    std::vector<PfImpulse> impulses;
};

// Accrual rate of the first clause matched by the joint state (variable id ->
// state name). Referenced variables must all be assigned.
double performance_rate(const PerformanceFunction& pf,
                        const std::map<std::string, std::string>& joint_state);

// E[ integral of rate(state(t)) dt + sum of impulses ] over [0, horizon]
// under the bound scenario. Clause and impulse literals on decision variables
// resolve against the assignment before inference.
QueryResult expected_performance(const CtbnModel& model, const ScenarioAssignment& scenario,
                                 const Evidence& evidence, const PerformanceFunction& pf,
                                 double horizon, const QueryOptions& opts = {});

}  // namespace phmkit
