#include "phmkit/performance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "phmkit/errors.hpp"
#include "phmkit/exact.hpp"
#include "phmkit/sampler.hpp"

namespace phmkit {

double performance_rate(const PerformanceFunction& pf,
                        const std::map<std::string, std::string>& joint_state) {
    for (const auto& clause : pf.clauses) {
        bool match = true;
        for (const auto& lit : clause.literals) {
            auto it = joint_state.find(lit.var);
            if (it == joint_state.end())
                throw data_error("joint state does not assign " + lit.var);
            if (it->second != lit.state) {
                match = false;
                break;
            }
        }
        if (match) return clause.rate;
    }
    return 0.0;
}

namespace {

struct ResolvedPf {
    std::vector<PfClause> clauses;    // decision literals removed
    std::vector<PfImpulse> impulses;  // decision conditions removed
};

// Evaluates decision literals against the scenario: clauses/impulses whose
// decision literals contradict it are dropped, matching literals removed.
ResolvedPf resolve_decisions(const CtbnModel& model, const PerformanceFunction& pf,
                             const ScenarioAssignment& scenario) {
    ResolvedPf out;
    auto decision_state = [&](const std::string& id) -> const std::string* {
        const Variable& v = model.variable(id);
        if (v.kind != VariableKind::decision) return nullptr;
        auto it = scenario.find(id);
        if (it == scenario.end()) throw binding_error("decision variable " + id + " is not assigned");
        return &it->second;
    };

    for (const auto& clause : pf.clauses) {
        PfClause rc;
        rc.rate = clause.rate;
        bool alive = true;
        for (const auto& lit : clause.literals) {
            model.state_index(lit.var, lit.state);
            if (const std::string* s = decision_state(lit.var)) {
                if (*s != lit.state) {
                    alive = false;
                    break;
                }
            } else {
                rc.literals.push_back(lit);
            }
        }
        if (alive) out.clauses.push_back(std::move(rc));
    }
    for (const auto& im : pf.impulses) {
        model.state_index(im.enter.var, im.enter.state);
        if (model.variable(im.enter.var).kind == VariableKind::decision)
            throw data_error("impulse on decision variable " + im.enter.var);
        PfImpulse ri;
        ri.enter = im.enter;
        ri.value = im.value;
        bool alive = true;
        for (const auto& lit : im.conditions) {
            model.state_index(lit.var, lit.state);
            if (const std::string* s = decision_state(lit.var)) {
                if (*s != lit.state) {
                    alive = false;
                    break;
                }
            } else {
                ri.conditions.push_back(lit);
            }
        }
        if (alive) out.impulses.push_back(std::move(ri));
    }
    return out;
}

}  // namespace

QueryResult expected_performance(const CtbnModel& model, const ScenarioAssignment& scenario,
                                 const Evidence& evidence, const PerformanceFunction& pf,
                                 double horizon, const QueryOptions& opts) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw parameter_error("horizon must be positive");
    evidence.validate(model);
    const Evidence clipped = evidence.clipped(horizon);
    const ResolvedPf resolved = resolve_decisions(model, pf, scenario);

    std::set<std::string> target_set;
    for (const auto& c : resolved.clauses)
        for (const auto& lit : c.literals) target_set.insert(lit.var);
    for (const auto& im : resolved.impulses) {
        target_set.insert(im.enter.var);
        for (const auto& lit : im.conditions) target_set.insert(lit.var);
    }
    for (const auto& p : clipped.points) target_set.insert(p.var);
    for (const auto& iv : clipped.intervals) target_set.insert(iv.var);

    if (target_set.empty()) {
        // Constant rate over the horizon; the first clause matches everywhere.
        QueryResult out;
        out.engine = "exact";
        out.value = resolved.clauses.empty() ? 0.0 : resolved.clauses.front().rate * horizon;
        return out;
    }

    const CtbnModel restricted =
        restrict_to_ancestors(model, {target_set.begin(), target_set.end()});

    const bool use_exact = opts.engine == Engine::exact ||
                           (opts.engine == Engine::auto_select &&
                            joint_state_count(restricted) <= opts.state_cap);
    QueryResult out;
    if (use_exact) {
        const JointGenerator gen = amalgamate(restricted, scenario, opts.state_cap);

        std::vector<ExactFunctional> fns;
        ExactFunctional rate_fn;
        rate_fn.weights.assign(gen.n_states, 0.0);
        for (std::size_t s = 0; s < gen.n_states; ++s) {
            for (const auto& c : resolved.clauses) {
                bool match = true;
                for (const auto& lit : c.literals) {
                    const std::size_t pos = gen.var_position(lit.var);
                    if (gen.digit(s, pos) !=
                        static_cast<std::uint32_t>(restricted.state_index(lit.var, lit.state))) {
                        match = false;
                        break;
                    }
                }
                if (match) {
                    rate_fn.weights[s] = c.rate;
                    break;
                }
            }
        }
        fns.push_back(std::move(rate_fn));

        for (const auto& im : resolved.impulses) {
            ExactFunctional fn;
            fn.entry = true;
            fn.entry_var = gen.var_position(im.enter.var);
            fn.entry_state =
                static_cast<std::uint32_t>(restricted.state_index(im.enter.var, im.enter.state));
            if (!im.conditions.empty()) {
                fn.source_gate.assign(gen.n_states, 1);
                for (const auto& lit : im.conditions) {
                    const std::size_t pos = gen.var_position(lit.var);
                    const auto st =
                        static_cast<std::uint32_t>(restricted.state_index(lit.var, lit.state));
                    if (pos == fn.entry_var) {
                        // Condition on the entry variable refers to the target
                        // state; a mismatch kills the impulse entirely.
                        if (st != fn.entry_state)
                            std::fill(fn.source_gate.begin(), fn.source_gate.end(), 0);
                        continue;
                    }
                    for (std::size_t s = 0; s < gen.n_states; ++s)
                        if (gen.digit(s, pos) != st) fn.source_gate[s] = 0;
                }
            }
            fns.push_back(std::move(fn));
        }

        ExactOptions eopts;
        eopts.tol = opts.tol;
        auto run = exact_filtered_run(gen, restricted, joint_initial_distribution(restricted, gen),
                                      clipped, horizon, fns, false, eopts);
        out.value = run.integrals[0];
        for (std::size_t i = 0; i < resolved.impulses.size(); ++i)
            out.value += resolved.impulses[i].value * run.integrals[i + 1];
        out.engine = "exact";
    } else {
        McPerformanceSpec spec;
        for (const auto& c : resolved.clauses) {
            McPerformanceSpec::Clause mc;
            mc.rate = c.rate;
            for (const auto& lit : c.literals) mc.literals.emplace_back(lit.var, lit.state);
            spec.clauses.push_back(std::move(mc));
        }
        for (const auto& im : resolved.impulses) {
            McPerformanceSpec::Impulse mi;
            mi.var = im.enter.var;
            mi.state = im.enter.state;
            mi.value = im.value;
            for (const auto& lit : im.conditions) mi.conditions.emplace_back(lit.var, lit.state);
            spec.impulses.push_back(std::move(mi));
        }
        const McEstimate est = mc_performance(restricted, scenario, clipped, spec, horizon,
                                              opts.mc_samples, opts.seed);
        out.value = est.value;
        out.std_error = est.std_error;
        out.n_samples = est.n_accepted;
        out.engine = "mc";
    }
    return out;
}

}  // namespace phmkit
