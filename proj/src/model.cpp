#include "phmkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "phmkit/errors.hpp"

namespace phmkit {

std::string to_string(VariableKind kind) {
    switch (kind) {
        case VariableKind::fault: return "fault";
        case VariableKind::test: return "test";
        case VariableKind::hazard: return "hazard";
        case VariableKind::decision: return "decision";
    }
    return "fault";
}

VariableKind variable_kind_from_string(const std::string& s) {
    if (s == "fault") return VariableKind::fault;
    if (s == "test") return VariableKind::test;
    if (s == "hazard") return VariableKind::hazard;
    if (s == "decision") return VariableKind::decision;
    throw parse_error("unknown variable kind: " + s);
}

const Variable* CtbnModel::find_variable(const std::string& id) const {
    auto it = std::lower_bound(variables.begin(), variables.end(), id,
                               [](const Variable& v, const std::string& key) { return v.id < key; });
    if (it != variables.end() && it->id == id) return &*it;
    return nullptr;
}

const Variable& CtbnModel::variable(const std::string& id) const {
    const Variable* v = find_variable(id);
    if (!v) throw data_error("unknown variable: " + id);
    return *v;
}

std::size_t CtbnModel::state_count(const std::string& id) const { return variable(id).states.size(); }

std::size_t CtbnModel::state_index(const std::string& var, const std::string& state) const {
    const Variable& v = variable(var);
    for (std::size_t i = 0; i < v.states.size(); ++i)
        if (v.states[i] == state) return i;
    throw data_error("variable " + var + " has no state named '" + state + "'");
}

std::vector<std::string> CtbnModel::parents_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [p, c] : edges)
        if (c == id) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> CtbnModel::children_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [p, c] : edges)
        if (p == id) out.push_back(c);
    std::sort(out.begin(), out.end());
    return out;
}

void CtbnModel::canonicalize() {
    std::sort(variables.begin(), variables.end(),
              [](const Variable& a, const Variable& b) { return a.id < b.id; });
}

std::size_t cim_matrix_count(const CtbnModel& model, const Cim& cim) {
    std::size_t n = 1;
    for (const auto& p : cim.parent_ids) n *= model.state_count(p);
    return n;
}

std::size_t cim_assignment_index(const CtbnModel& model, const Cim& cim,
                                 const std::map<std::string, std::size_t>& parent_state) {
    std::size_t index = 0, stride = 1;
    for (const auto& p : cim.parent_ids) {
        auto it = parent_state.find(p);
        if (it == parent_state.end()) throw data_error("missing parent state for " + p);
        index += stride * it->second;
        stride *= model.state_count(p);
    }
    return index;
}

std::vector<std::size_t> assignment_digits(const CtbnModel& model, const Cim& cim,
                                           std::size_t index) {
    std::vector<std::size_t> digits(cim.parent_ids.size());
    for (std::size_t i = 0; i < cim.parent_ids.size(); ++i) {
        const std::size_t k = model.state_count(cim.parent_ids[i]);
        digits[i] = index % k;
        index /= k;
    }
    return digits;
}

std::string assignment_key(const CtbnModel& model, const Cim& cim, std::size_t index) {
    const auto digits = assignment_digits(model, cim, index);
    std::ostringstream os;
    for (std::size_t i = 0; i < cim.parent_ids.size(); ++i) {
        if (i > 0) os << ",";
        const Variable& p = model.variable(cim.parent_ids[i]);
        os << p.id << "=" << p.states[digits[i]];
    }
    return os.str();
}

namespace {

void check_initial(const CtbnModel& model, const Variable& v, std::vector<Violation>& out) {
    auto it = model.initial.find(v.id);
    if (it == model.initial.end()) {
        out.push_back({v.id, "missing initial distribution"});
        return;
    }
    const auto& dist = it->second;
    if (dist.size() != v.states.size()) {
        out.push_back({v.id, "initial distribution size does not match state count"});
        return;
    }
    double sum = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            out.push_back({v.id, "initial distribution has a negative or non-finite entry"});
            return;
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        out.push_back({v.id, "initial distribution does not sum to 1"});
    if (v.kind == VariableKind::decision) {
        const double uniform = 1.0 / static_cast<double>(v.states.size());
        for (double p : dist)
            if (std::fabs(p - uniform) > 1e-12) {
                out.push_back({v.id, "decision variable requires a uniform initial distribution"});
                break;
            }
    }
}

void check_cim(const CtbnModel& model, const Variable& v, std::vector<Violation>& out) {
    auto it = model.cims.find(v.id);
    if (it == model.cims.end()) {
        out.push_back({v.id, "missing CIM"});
        return;
    }
    const Cim& cim = it->second;
    if (cim.owner != v.id) out.push_back({v.id, "CIM owner mismatch"});

    auto sorted_parents = cim.parent_ids;
    std::sort(sorted_parents.begin(), sorted_parents.end());
    if (sorted_parents != cim.parent_ids)
        out.push_back({v.id, "CIM parent list is not sorted by id"});
    if (std::adjacent_find(sorted_parents.begin(), sorted_parents.end()) != sorted_parents.end())
        out.push_back({v.id, "CIM parent list has duplicates"});
    for (const auto& p : cim.parent_ids)
        if (!model.find_variable(p)) {
            out.push_back({v.id, "CIM references unknown parent " + p});
            return;
        }

    const auto graph_parents = model.parents_of(v.id);
    if (graph_parents != sorted_parents)
        out.push_back({v.id, "CIM parent list does not match graph edges"});

    const std::size_t expected = cim_matrix_count(model, cim);
    if (cim.matrices.size() != expected) {
        std::ostringstream os;
        os << "incomplete CIM: " << cim.matrices.size() << " matrices, expected " << expected;
        out.push_back({v.id, os.str()});
        return;
    }
    for (std::size_t i = 0; i < cim.matrices.size(); ++i) {
        const IntensityMatrix& m = cim.matrices[i];
        if (m.dim != v.states.size()) {
            out.push_back({v.id, "matrix dimension does not match state count (assignment " +
                                     assignment_key(model, cim, i) + ")"});
            continue;
        }
        for (const auto& issue : intensity_matrix_issues(m))
            out.push_back({v.id, issue + " (assignment " + assignment_key(model, cim, i) + ")"});
        if (v.kind == VariableKind::decision) {
            for (double e : m.entries)
                if (e != 0.0) {
                    out.push_back({v.id, "decision variable requires all-zero intensity matrices"});
                    break;
                }
        }
    }
}

}  // namespace

std::vector<Violation> validate_model(const CtbnModel& model) {
    std::vector<Violation> out;

    for (std::size_t i = 0; i + 1 < model.variables.size(); ++i)
        if (model.variables[i].id >= model.variables[i + 1].id)
            out.push_back({"<model>", "variables not sorted by unique id near '" +
                                          model.variables[i].id + "'"});

    for (const auto& [p, c] : model.edges) {
        if (!model.find_variable(p)) out.push_back({"<model>", "edge from unknown variable " + p});
        if (!model.find_variable(c)) out.push_back({"<model>", "edge to unknown variable " + c});
    }
    if (!out.empty()) return out;  // structural lookups below need a sane id set

    for (const Variable& v : model.variables) {
        if (v.states.size() < 2) out.push_back({v.id, "fewer than 2 states"});
        auto states = v.states;
        std::sort(states.begin(), states.end());
        if (std::adjacent_find(states.begin(), states.end()) != states.end())
            out.push_back({v.id, "duplicate state names"});
        if (v.kind == VariableKind::decision && !model.parents_of(v.id).empty())
            out.push_back({v.id, "decision variable must not have parents"});
        check_initial(model, v, out);
        check_cim(model, v, out);
    }

    for (const auto& mask : model.edge_masks) {
        const Variable* d = model.find_variable(mask.decision);
        if (!d || d->kind != VariableKind::decision) {
            out.push_back({mask.decision, "edge mask does not reference a decision variable"});
            continue;
        }
        if (std::find(d->states.begin(), d->states.end(), mask.state) == d->states.end())
            out.push_back({mask.decision, "edge mask references unknown state " + mask.state});
        if (!model.edges.count({mask.parent, mask.child}))
            out.push_back({mask.child, "edge mask on a non-edge " + mask.parent + "->" + mask.child});
        if (!model.edges.count({mask.decision, mask.child}))
            out.push_back({mask.child, "edge mask decision is not a parent of the child"});
    }
    return out;
}

CtbnModel restrict_to_ancestors(const CtbnModel& model, const std::vector<std::string>& targets) {
    std::set<std::string> keep;
    std::deque<std::string> frontier;
    for (const auto& t : targets) {
        model.variable(t);  // existence check
        if (keep.insert(t).second) frontier.push_back(t);
    }
    while (!frontier.empty()) {
        const std::string v = frontier.front();
        frontier.pop_front();
        for (const auto& p : model.parents_of(v))
            if (keep.insert(p).second) frontier.push_back(p);
    }

    CtbnModel out;
    for (const Variable& v : model.variables)
        if (keep.count(v.id)) out.variables.push_back(v);
    for (const auto& e : model.edges)
        if (keep.count(e.first) && keep.count(e.second)) out.edges.insert(e);
    for (const auto& [id, cim] : model.cims)
        if (keep.count(id)) out.cims.emplace(id, cim);
    for (const auto& [id, dist] : model.initial)
        if (keep.count(id)) out.initial.emplace(id, dist);
    for (const auto& mask : model.edge_masks)
        if (keep.count(mask.child)) out.edge_masks.push_back(mask);
    return out;
}

}  // namespace phmkit
