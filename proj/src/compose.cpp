#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "phmkit/decision.hpp"
#include "phmkit/errors.hpp"

namespace phmkit {

IntensityMatrix scale_failure_rates(const IntensityMatrix& m, double factor) {
    if (!(factor >= 0.0) || !std::isfinite(factor))
        throw parameter_error("rate scale factor must be finite and >= 0");
    IntensityMatrix out(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) {
        double diag = 0.0;
        for (std::size_t j = 0; j < m.dim; ++j) {
            if (j == i) continue;
            const double r = j > i ? m.at(i, j) * factor : m.at(i, j);
            out.at(i, j) = r;
            diag -= r;
        }
        out.at(i, i) = diag;
    }
    return out;
}

CtbnModel merge_models(const CtbnModel& diagnostic, const CtbnModel& hazard) {
    auto faults_of = [](const CtbnModel& m) {
        std::set<std::string> out;
        for (const auto& v : m.variables)
            if (v.kind == VariableKind::fault) out.insert(v.id);
        return out;
    };
    const auto fd = faults_of(diagnostic);
    const auto fh = faults_of(hazard);
    if (fd != fh) {
        std::ostringstream os;
        os << "fault sets differ:";
        for (const auto& f : fd)
            if (!fh.count(f)) os << " " << f << "(first only)";
        for (const auto& f : fh)
            if (!fd.count(f)) os << " " << f << "(second only)";
        throw merge_error(os.str());
    }

    for (const auto& f : fd) {
        if (diagnostic.cims.at(f) != hazard.cims.at(f))
            throw merge_error("fault " + f + " has conflicting CIMs");
        if (diagnostic.initial.at(f) != hazard.initial.at(f))
            throw merge_error("fault " + f + " has conflicting initial distributions");
    }
    for (const auto& v : hazard.variables) {
        if (v.kind == VariableKind::fault) continue;
        if (diagnostic.find_variable(v.id))
            throw merge_error("non-fault variable " + v.id + " exists in both models");
    }

    CtbnModel out = diagnostic;
    for (const auto& v : hazard.variables)
        if (v.kind != VariableKind::fault) out.variables.push_back(v);
    for (const auto& e : hazard.edges) out.edges.insert(e);
    for (const auto& [id, cim] : hazard.cims) out.cims.emplace(id, cim);
    for (const auto& [id, dist] : hazard.initial) out.initial.emplace(id, dist);
    for (const auto& mask : hazard.edge_masks) out.edge_masks.push_back(mask);
    out.canonicalize();
    return out;
}

namespace {

std::vector<std::string> masked_parents_for(const DecisionSpec& spec, const std::string& child,
                                            const std::string& state) {
    std::vector<std::string> out;
    for (const auto& m : spec.edge_masks)
        if (m.child == child && m.state == state) out.push_back(m.parent);
    std::sort(out.begin(), out.end());
    return out;
}

void validate_spec(const CtbnModel& model, const DecisionSpec& spec) {
    if (spec.states.size() < 2)
        throw decision_spec_error("decision " + spec.id + " needs at least 2 states");
    {
        auto states = spec.states;
        std::sort(states.begin(), states.end());
        if (std::adjacent_find(states.begin(), states.end()) != states.end())
            throw decision_spec_error("decision " + spec.id + " has duplicate states");
    }
    if (model.find_variable(spec.id))
        throw decision_spec_error("decision id " + spec.id + " collides with an existing variable");

    std::set<std::string> children;
    for (const auto& ov : spec.overrides) {
        const Variable& child = model.variable(ov.child);
        if (child.kind == VariableKind::decision)
            throw decision_spec_error("decision " + spec.id + " cannot override decision " + ov.child);
        if (!children.insert(ov.child).second)
            throw decision_spec_error("duplicate override for child " + ov.child);
        for (const auto& [state, o] : ov.per_state) {
            if (std::find(spec.states.begin(), spec.states.end(), state) == spec.states.end())
                throw decision_spec_error("override on unknown state " + state + " of " + spec.id);
            if (o.scale_lambda.has_value() == o.replacement.has_value())
                throw decision_spec_error("override for " + ov.child + " under " + state +
                                          " must set exactly one of scale_lambda/matrices");
        }
    }
    for (const auto& m : spec.edge_masks) {
        if (std::find(spec.states.begin(), spec.states.end(), m.state) == spec.states.end())
            throw decision_spec_error("edge mask on unknown state " + m.state);
        if (!model.edges.count({m.parent, m.child}))
            throw decision_spec_error("edge mask on a non-edge " + m.parent + "->" + m.child);
    }

    // Masked (child, state) pairs need a replacement over exactly the reduced
    // parent set; replacements must line up either way.
    std::set<std::pair<std::string, std::string>> mask_keys;
    for (const auto& m : spec.edge_masks) mask_keys.insert({m.child, m.state});
    for (const auto& [child, state] : mask_keys) {
        const auto masked = masked_parents_for(spec, child, state);
        const CimOverride* found = nullptr;
        for (const auto& ov : spec.overrides)
            if (ov.child == child)
                if (auto it = ov.per_state.find(state); it != ov.per_state.end()) found = &it->second;
        if (!found || !found->replacement)
            throw decision_spec_error("severed edge into " + child + " under state " + state +
                                      " requires a replacement CIM over the reduced parents");
        auto expected = model.parents_of(child);
        for (const auto& p : masked)
            expected.erase(std::remove(expected.begin(), expected.end(), p), expected.end());
        auto got = found->replacement->parent_ids;
        std::sort(got.begin(), got.end());
        if (got != expected)
            throw decision_spec_error("replacement CIM for " + child + " under state " + state +
                                      " must cover exactly the unmasked parents");
    }
    for (const auto& ov : spec.overrides)
        for (const auto& [state, o] : ov.per_state)
            if (o.replacement) {
                auto expected = model.parents_of(ov.child);
                const auto masked = masked_parents_for(spec, ov.child, state);
                for (const auto& p : masked)
                    expected.erase(std::remove(expected.begin(), expected.end(), p), expected.end());
                auto got = o.replacement->parent_ids;
                std::sort(got.begin(), got.end());
                if (got != expected)
                    throw decision_spec_error("replacement CIM for " + ov.child + " under state " +
                                              state + " does not match the expected parent set");
            }
}

}  // namespace

CtbnModel attach_decision(const CtbnModel& model, const DecisionSpec& spec) {
    validate_spec(model, spec);

    CtbnModel out = model;
    Variable dec{spec.id, spec.states, VariableKind::decision};
    out.variables.push_back(dec);
    out.canonicalize();
    Cim dec_cim;
    dec_cim.owner = spec.id;
    dec_cim.matrices.push_back(IntensityMatrix(spec.states.size()));
    out.cims.emplace(spec.id, std::move(dec_cim));
    out.initial.emplace(spec.id,
                        std::vector<double>(spec.states.size(), 1.0 / spec.states.size()));

    std::set<std::string> affected;
    for (const auto& ov : spec.overrides) affected.insert(ov.child);
    for (const auto& m : spec.edge_masks) affected.insert(m.child);

    for (const auto& child_id : affected) {
        const Cim& old = model.cims.at(child_id);
        Cim next;
        next.owner = child_id;
        next.parent_ids = old.parent_ids;
        next.parent_ids.push_back(spec.id);
        std::sort(next.parent_ids.begin(), next.parent_ids.end());

        const DecisionOverride* ov = nullptr;
        for (const auto& o : spec.overrides)
            if (o.child == child_id) ov = &o;

        const std::size_t count = cim_matrix_count(out, next);
        next.matrices.reserve(count);
        for (std::size_t idx = 0; idx < count; ++idx) {
            const auto digits = assignment_digits(out, next, idx);
            std::map<std::string, std::size_t> states;
            for (std::size_t i = 0; i < next.parent_ids.size(); ++i)
                states[next.parent_ids[i]] = digits[i];
            const std::string& dec_state = spec.states[states.at(spec.id)];

            const CimOverride* o = nullptr;
            if (ov)
                if (auto it = ov->per_state.find(dec_state); it != ov->per_state.end())
                    o = &it->second;

            if (!o) {
                std::map<std::string, std::size_t> old_states(states);
                old_states.erase(spec.id);
                next.matrices.push_back(old.matrices[cim_assignment_index(model, old, old_states)]);
            } else if (o->scale_lambda) {
                std::map<std::string, std::size_t> old_states(states);
                old_states.erase(spec.id);
                next.matrices.push_back(scale_failure_rates(
                    old.matrices[cim_assignment_index(model, old, old_states)], *o->scale_lambda));
            } else {
                const Cim& rep = *o->replacement;
                std::map<std::string, std::size_t> rep_states;
                for (const auto& pid : rep.parent_ids) rep_states[pid] = states.at(pid);
                next.matrices.push_back(rep.matrices[cim_assignment_index(out, rep, rep_states)]);
            }
        }
        out.cims.at(child_id) = std::move(next);
        out.edges.insert({spec.id, child_id});
    }

    for (const auto& m : spec.edge_masks)
        out.edge_masks.push_back({spec.id, m.state, m.parent, m.child});
    return out;
}

CtbnModel bind_scenario(const CtbnModel& model, const ScenarioAssignment& assignment) {
    std::map<std::string, std::size_t> decision_digit;
    for (const auto& v : model.variables) {
        if (v.kind != VariableKind::decision) continue;
        auto it = assignment.find(v.id);
        if (it == assignment.end())
            throw binding_error("scenario assignment misses decision " + v.id);
        decision_digit[v.id] = model.state_index(v.id, it->second);
    }
    for (const auto& [id, state] : assignment)
        if (!decision_digit.count(id)) throw binding_error("unknown decision " + id);

    // Active masks under this assignment: parent -> severed for child.
    std::set<std::pair<std::string, std::string>> severed;
    for (const auto& m : model.edge_masks)
        if (assignment.count(m.decision) && assignment.at(m.decision) == m.state)
            severed.insert({m.parent, m.child});

    CtbnModel out;
    for (const auto& v : model.variables)
        if (v.kind != VariableKind::decision) out.variables.push_back(v);
    for (const auto& [p, c] : model.edges) {
        if (decision_digit.count(p)) continue;
        if (severed.count({p, c})) continue;
        out.edges.insert({p, c});
    }

    for (const auto& v : out.variables) {
        const Cim& old = model.cims.at(v.id);
        Cim next;
        next.owner = v.id;
        for (const auto& pid : old.parent_ids)
            if (!decision_digit.count(pid) && !severed.count({pid, v.id}))
                next.parent_ids.push_back(pid);

        const std::size_t count = cim_matrix_count(model, next);
        next.matrices.reserve(count);
        for (std::size_t idx = 0; idx < count; ++idx) {
            const auto digits = assignment_digits(model, next, idx);
            std::map<std::string, std::size_t> states(decision_digit);
            for (std::size_t i = 0; i < next.parent_ids.size(); ++i)
                states[next.parent_ids[i]] = digits[i];
            // Severed parents must not matter; probe digit 0 and check the rest.
            std::vector<std::string> dropped;
            for (const auto& pid : old.parent_ids)
                if (severed.count({pid, v.id})) {
                    states[pid] = 0;
                    dropped.push_back(pid);
                }
            const IntensityMatrix& base = old.matrices[cim_assignment_index(model, old, states)];
            for (const auto& pid : dropped) {
                for (std::size_t d = 1; d < model.state_count(pid); ++d) {
                    auto probe = states;
                    probe[pid] = d;
                    if (!(old.matrices[cim_assignment_index(model, old, probe)] == base))
                        throw binding_error("CIM for " + v.id + " varies with severed parent " + pid);
                }
            }
            next.matrices.push_back(base);
        }
        out.cims.emplace(v.id, std::move(next));
        out.initial.emplace(v.id, model.initial.at(v.id));
    }
    return out;
}

}  // namespace phmkit
