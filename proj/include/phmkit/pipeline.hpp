#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phmkit/evidence.hpp"
#include "phmkit/model.hpp"
#include "phmkit/pareto.hpp"
#include "phmkit/performance.hpp"
#include "phmkit/query.hpp"

namespace phmkit {

struct EvaluateOptions {
    double horizon = 500.0;
    Engine engine = Engine::auto_select;
    std::uint64_t samples = 20000;
    std::uint64_t seed = 42;
    double tol = 1e-9;
    std::size_t state_cap = default_state_cap;
    Evidence evidence;
    std::string risk_var;       // emit P(risk_var = 1, t) curves when set
    std::size_t risk_grid = 50;
};

struct EvaluateOutput {
    ScenarioReport report;
    std::string report_json;  // scenario values, feasibility and front flags
    std::string table;        // fixed-width text rendering
    std::string risk_csv;     // empty unless risk_var was set
};

// Sweeps every scenario, scores each objective through its performance
// function and assembles the ranked report. Each objective reuses one seed
// stream across scenarios so Monte Carlo comparisons share their noise.
EvaluateOutput run_evaluate(const CtbnModel& model, const std::vector<PerformanceFunction>& pfs,
                            const std::vector<ObjectiveSpec>& objectives,
                            const EvaluateOptions& opts);

// P(var = state, t) for each scenario on a uniform grid; CSV with one column
// per scenario in enumeration order.
std::string risk_curve_csv(const CtbnModel& model, const std::string& var,
                           const std::string& state, const EvaluateOptions& opts);

}  // namespace phmkit
