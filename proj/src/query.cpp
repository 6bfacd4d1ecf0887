#include "phmkit/query.hpp"

#include <algorithm>
#include <cmath>

#include "phmkit/errors.hpp"
#include "phmkit/exact.hpp"
#include "phmkit/sampler.hpp"

namespace phmkit {

std::string to_string(Engine e) {
    switch (e) {
        case Engine::exact: return "exact";
        case Engine::mc: return "mc";
        case Engine::auto_select: return "auto";
    }
    return "auto";
}

Engine engine_from_string(const std::string& s) {
    if (s == "exact") return Engine::exact;
    if (s == "mc") return Engine::mc;
    if (s == "auto") return Engine::auto_select;
    throw parse_error("unknown engine: " + s);
}

namespace {

std::vector<std::string> evidence_vars(const Evidence& ev) {
    std::vector<std::string> out;
    for (const auto& p : ev.points) out.push_back(p.var);
    for (const auto& iv : ev.intervals) out.push_back(iv.var);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Engine pick_engine(const CtbnModel& restricted, const QueryOptions& opts) {
    if (opts.engine != Engine::auto_select) return opts.engine;
    return joint_state_count(restricted) <= opts.state_cap ? Engine::exact : Engine::mc;
}

}  // namespace

bool exact_engine_feasible(const CtbnModel& model, const std::vector<std::string>& targets,
                           std::size_t cap) {
    return joint_state_count(restrict_to_ancestors(model, targets)) <= cap;
}

QueryResult query_state_probability(const CtbnModel& model,
                                    const std::map<std::string, std::string>& decisions,
                                    const Evidence& evidence, const std::string& var,
                                    const std::string& state, double t,
                                    const QueryOptions& opts) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw parameter_error("query time must be >= 0");
    evidence.validate(model);
    const Evidence clipped = evidence.clipped(t);

    auto targets = evidence_vars(clipped);
    targets.push_back(var);
    const CtbnModel restricted = restrict_to_ancestors(model, targets);
    const std::size_t target_state = restricted.state_index(var, state);

    QueryResult out;
    if (pick_engine(restricted, opts) == Engine::exact) {
        const JointGenerator gen = amalgamate(restricted, decisions, opts.state_cap);
        ExactOptions eopts;
        eopts.tol = opts.tol;
        auto run = exact_filtered_run(gen, restricted, joint_initial_distribution(restricted, gen),
                                      clipped, t, {}, true, eopts);
        const std::size_t pos = gen.var_position(var);
        double p = 0.0;
        for (std::size_t s = 0; s < gen.n_states; ++s)
            if (gen.digit(s, pos) == target_state) p += run.final_distribution[s];
        out.value = std::clamp(p, 0.0, 1.0);
        out.engine = "exact";
    } else {
        const McEstimate est = mc_state_probability(restricted, decisions, clipped, var, state, t,
                                                    opts.mc_samples, opts.seed);
        out.value = est.value;
        out.std_error = est.std_error;
        out.n_samples = est.n_accepted;
        out.engine = "mc";
    }
    return out;
}

QueryResult expected_occupancy(const CtbnModel& model,
                               const std::map<std::string, std::string>& decisions,
                               const Evidence& evidence, const StateCondition& condition,
                               double horizon, const QueryOptions& opts) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw parameter_error("horizon must be positive");
    evidence.validate(model);
    const Evidence clipped = evidence.clipped(horizon);

    // Literals on decision variables resolve against the assignment.
    StateCondition live;
    for (const auto& [v, s] : condition) {
        const Variable& vv = model.variable(v);
        model.state_index(v, s);
        if (vv.kind == VariableKind::decision) {
            auto it = decisions.find(v);
            if (it == decisions.end()) throw binding_error("decision variable " + v + " is not assigned");
            if (it->second != s) {
                QueryResult zero;
                zero.engine = "exact";
                return zero;  // condition can never hold
            }
        } else {
            live.emplace_back(v, s);
        }
    }

    auto targets = evidence_vars(clipped);
    for (const auto& [v, s] : live) targets.push_back(v);
    if (targets.empty()) {
        // Condition held by decisions alone (or empty): occupancy is the horizon.
        QueryResult all;
        all.value = horizon;
        all.engine = "exact";
        return all;
    }
    const CtbnModel restricted = restrict_to_ancestors(model, targets);

    QueryResult out;
    if (pick_engine(restricted, opts) == Engine::exact) {
        const JointGenerator gen = amalgamate(restricted, decisions, opts.state_cap);
        ExactFunctional fn;
        fn.weights.assign(gen.n_states, 1.0);
        for (const auto& [v, s] : live) {
            const std::size_t pos = gen.var_position(v);
            const std::uint32_t st = static_cast<std::uint32_t>(restricted.state_index(v, s));
            for (std::size_t i = 0; i < gen.n_states; ++i)
                if (gen.digit(i, pos) != st) fn.weights[i] = 0.0;
        }
        ExactOptions eopts;
        eopts.tol = opts.tol;
        auto run = exact_filtered_run(gen, restricted, joint_initial_distribution(restricted, gen),
                                      clipped, horizon, {fn}, false, eopts);
        out.value = run.integrals[0];
        out.engine = "exact";
    } else {
        const McEstimate est =
            mc_occupancy(restricted, decisions, clipped, live, horizon, opts.mc_samples, opts.seed);
        out.value = est.value;
        out.std_error = est.std_error;
        out.n_samples = est.n_accepted;
        out.engine = "mc";
    }
    return out;
}

}  // namespace phmkit
