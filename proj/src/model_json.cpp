#include "phmkit/model_json.hpp"

#include <algorithm>
#include <cstdio>

#include "phmkit/errors.hpp"

namespace phmkit {

using nlohmann::json;

std::string format_rate(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_rate(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        try {
            std::size_t used = 0;
            const double d = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return d;
        } catch (const std::exception&) {
            throw parse_error("cannot parse rate '" + s + "'");
        }
    }
    throw parse_error("rate must be a number or a decimal string");
}

namespace {

json parse_document(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string(what) + ": " + e.what());
    }
}

}  // namespace

json model_to_json(const CtbnModel& model) {
    json doc;
    doc["variables"] = json::array();
    for (const auto& v : model.variables)
        doc["variables"].push_back(
            {{"id", v.id}, {"kind", to_string(v.kind)}, {"states", v.states}});

    doc["edges"] = json::array();
    for (const auto& [p, c] : model.edges) doc["edges"].push_back({p, c});

    doc["cims"] = json::object();
    for (const auto& [id, cim] : model.cims) {
        json entry;
        entry["parents"] = cim.parent_ids;
        json matrices = json::object();
        for (std::size_t i = 0; i < cim.matrices.size(); ++i) {
            json cells = json::array();
            for (double e : cim.matrices[i].entries) cells.push_back(format_rate(e));
            matrices[assignment_key(model, cim, i)] = std::move(cells);
        }
        entry["matrices"] = std::move(matrices);
        doc["cims"][id] = std::move(entry);
    }

    doc["initial"] = json::object();
    for (const auto& [id, dist] : model.initial) {
        json cells = json::array();
        for (double p : dist) cells.push_back(format_rate(p));
        doc["initial"][id] = std::move(cells);
    }

    if (!model.edge_masks.empty()) {
        doc["edge_masks"] = json::array();
        auto masks = model.edge_masks;
        std::sort(masks.begin(), masks.end());
        for (const auto& m : masks)
            doc["edge_masks"].push_back({{"decision", m.decision},
                                         {"state", m.state},
                                         {"parent", m.parent},
                                         {"child", m.child}});
    }
    return doc;
}

std::string model_to_string(const CtbnModel& model) { return model_to_json(model).dump(2) + "\n"; }

CtbnModel model_from_json(const json& doc) {
    CtbnModel m;
    if (!doc.is_object()) throw parse_error("model JSON must be an object");
    for (const auto& v : doc.at("variables")) {
        Variable var;
        var.id = v.at("id").get<std::string>();
        var.kind = variable_kind_from_string(v.at("kind").get<std::string>());
        for (const auto& s : v.at("states")) var.states.push_back(s.get<std::string>());
        m.variables.push_back(std::move(var));
    }
    m.canonicalize();

    for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw parse_error("edge must be a [parent, child] pair");
        m.edges.insert({e[0].get<std::string>(), e[1].get<std::string>()});
    }

    for (const auto& [id, entry] : doc.at("cims").items()) {
        Cim cim;
        cim.owner = id;
        for (const auto& p : entry.at("parents")) cim.parent_ids.push_back(p.get<std::string>());
        const Variable* owner = m.find_variable(id);
        if (!owner) throw parse_error("CIM for unknown variable " + id);
        const std::size_t dim = owner->states.size();

        const std::size_t count = cim_matrix_count(m, cim);
        cim.matrices.resize(count);
        const auto& matrices = entry.at("matrices");
        if (matrices.size() != count)
            throw parse_error("CIM for " + id + " has " + std::to_string(matrices.size()) +
                              " matrices, expected " + std::to_string(count));
        for (std::size_t i = 0; i < count; ++i) {
            const std::string key = assignment_key(m, cim, i);
            if (!matrices.contains(key))
                throw parse_error("CIM for " + id + " misses assignment '" + key + "'");
            const auto& cells = matrices.at(key);
            if (cells.size() != dim * dim)
                throw parse_error("matrix for " + id + "/" + key + " must have " +
                                  std::to_string(dim * dim) + " entries");
            IntensityMatrix im(dim);
            for (std::size_t k = 0; k < cells.size(); ++k) im.entries[k] = parse_rate(cells[k]);
            cim.matrices[i] = std::move(im);
        }
        m.cims.emplace(id, std::move(cim));
    }

    for (const auto& [id, cells] : doc.at("initial").items()) {
        std::vector<double> dist;
        for (const auto& c : cells) dist.push_back(parse_rate(c));
        m.initial.emplace(id, std::move(dist));
    }

    if (doc.contains("edge_masks"))
        for (const auto& e : doc.at("edge_masks"))
            m.edge_masks.push_back({e.at("decision").get<std::string>(),
                                    e.at("state").get<std::string>(),
                                    e.at("parent").get<std::string>(),
                                    e.at("child").get<std::string>()});
    return m;
}

CtbnModel model_from_string(const std::string& text) {
    return model_from_json(parse_document(text, "model JSON"));
}

Evidence evidence_from_string(const std::string& text) {
    const json doc = parse_document(text, "evidence JSON");
    Evidence ev;
    if (doc.contains("point"))
        for (const auto& p : doc.at("point"))
            ev.points.push_back({p.at("var").get<std::string>(), p.at("state").get<std::string>(),
                                 p.at("t").get<double>()});
    if (doc.contains("interval"))
        for (const auto& iv : doc.at("interval"))
            ev.intervals.push_back({iv.at("var").get<std::string>(),
                                    iv.at("state").get<std::string>(),
                                    iv.at("t_start").get<double>(),
                                    iv.at("t_end").get<double>()});
    return ev;
}

json evidence_to_json(const Evidence& evidence) {
    json doc;
    doc["point"] = json::array();
    for (const auto& p : evidence.points)
        doc["point"].push_back({{"var", p.var}, {"state", p.state}, {"t", p.t}});
    doc["interval"] = json::array();
    for (const auto& iv : evidence.intervals)
        doc["interval"].push_back({{"var", iv.var},
                                   {"state", iv.state},
                                   {"t_start", iv.t_start},
                                   {"t_end", iv.t_end}});
    return doc;
}

namespace {

PfLiteral literal_from_json(const json& j) {
    return {j.at("var").get<std::string>(), j.at("state").get<std::string>()};
}

PerformanceFunction pf_from_json(const json& item) {
    PerformanceFunction pf;
    pf.id = item.at("id").get<std::string>();
    if (item.contains("clauses"))
        for (const auto& c : item.at("clauses")) {
            PfClause clause;
            clause.rate = c.at("rate").get<double>();
            if (c.contains("if"))
                for (const auto& lit : c.at("if")) clause.literals.push_back(literal_from_json(lit));
            pf.clauses.push_back(std::move(clause));
        }
    if (item.contains("impulses"))
        for (const auto& im : item.at("impulses")) {
            PfImpulse impulse;
            impulse.enter = literal_from_json(im.at("enter"));
            impulse.value = im.at("value").get<double>();
            if (im.contains("if"))
                for (const auto& lit : im.at("if"))
                    impulse.conditions.push_back(literal_from_json(lit));
            pf.impulses.push_back(std::move(impulse));
        }
    return pf;
}

ObjectiveSpec objective_from_json(const json& item) {
    ObjectiveSpec obj;
    obj.id = item.at("id").get<std::string>();
    obj.pf = item.value("pf", obj.id);
    obj.direction = direction_from_string(item.at("direction").get<std::string>());
    if (item.contains("threshold")) obj.threshold = item.at("threshold").get<double>();
    return obj;
}

}  // namespace

std::vector<PerformanceFunction> performance_functions_from_string(const std::string& text) {
    const json doc = parse_document(text, "performance function JSON");
    if (!doc.is_array()) throw parse_error("performance function JSON must be an array");
    std::vector<PerformanceFunction> out;
    for (const auto& item : doc) out.push_back(pf_from_json(item));
    return out;
}

ObjectivesFile objectives_from_string(const std::string& text) {
    const json doc = parse_document(text, "objectives JSON");
    ObjectivesFile out;
    if (doc.is_array()) {
        for (const auto& item : doc) out.objectives.push_back(objective_from_json(item));
        return out;
    }
    if (!doc.is_object() || !doc.contains("objectives"))
        throw parse_error("objectives JSON must be an array or an object with 'objectives'");
    for (const auto& item : doc.at("objectives")) out.objectives.push_back(objective_from_json(item));
    if (doc.contains("pfs"))
        for (const auto& item : doc.at("pfs")) out.pfs.push_back(pf_from_json(item));
    return out;
}

std::vector<DecisionSpec> decision_specs_from_string(const std::string& text) {
    const json doc = parse_document(text, "decision spec JSON");
    if (!doc.is_object() || !doc.contains("decisions"))
        throw parse_error("decision spec JSON needs a 'decisions' array");

    std::vector<DecisionSpec> out;
    for (const auto& item : doc.at("decisions")) {
        DecisionSpec spec;
        spec.id = item.at("id").get<std::string>();
        for (const auto& s : item.at("states")) spec.states.push_back(s.get<std::string>());
        if (item.contains("overrides"))
            for (const auto& ov : item.at("overrides")) {
                DecisionOverride dov;
                dov.child = ov.at("child").get<std::string>();
                for (const auto& [state, body] : ov.at("per_state").items()) {
                    CimOverride co;
                    if (body.contains("scale_lambda")) {
                        co.scale_lambda = body.at("scale_lambda").get<double>();
                    } else {
                        Cim rep;
                        rep.owner = dov.child;
                        for (const auto& p : body.at("parents"))
                            rep.parent_ids.push_back(p.get<std::string>());
                        std::sort(rep.parent_ids.begin(), rep.parent_ids.end());
                        // Keys are resolved positionally later; store matrices
                        // in key-sorted order matching the binary convention.
                        const auto& matrices = body.at("matrices");
                        const std::size_t count = std::size_t(1) << rep.parent_ids.size();
                        if (matrices.size() != count)
                            throw parse_error("replacement CIM for " + dov.child + " needs " +
                                              std::to_string(count) + " matrices");
                        for (std::size_t i = 0; i < count; ++i) {
                            std::string key;
                            for (std::size_t k = 0; k < rep.parent_ids.size(); ++k) {
                                if (k) key += ",";
                                key += rep.parent_ids[k] + "=" + std::to_string(i >> k & 1);
                            }
                            if (!matrices.contains(key))
                                throw parse_error("replacement CIM for " + dov.child +
                                                  " misses assignment '" + key + "'");
                            const auto& cells = matrices.at(key);
                            IntensityMatrix im(2);
                            if (cells.size() != 4)
                                throw parse_error("replacement matrices must be 2x2 (" + dov.child +
                                                  ")");
                            for (std::size_t k = 0; k < 4; ++k)
                                im.entries[k] = parse_rate(cells[k]);
                            rep.matrices.push_back(std::move(im));
                        }
                        co.replacement = std::move(rep);
                    }
                    dov.per_state.emplace(state, std::move(co));
                }
                spec.overrides.push_back(std::move(dov));
            }
        if (item.contains("edge_masks"))
            for (const auto& m : item.at("edge_masks"))
                spec.edge_masks.push_back({m.at("state").get<std::string>(),
                                           m.at("parent").get<std::string>(),
                                           m.at("child").get<std::string>()});
        out.push_back(std::move(spec));
    }
    return out;
}

json trajectory_to_json(const Trajectory& traj) {
    json doc;
    doc["horizon"] = traj.horizon;
    doc["variables"] = traj.var_ids;
    json initial = json::object();
    for (std::size_t i = 0; i < traj.var_ids.size(); ++i)
        initial[traj.var_ids[i]] = traj.initial_states[i];
    doc["initial"] = std::move(initial);
    json transitions = json::array();
    for (const auto& rec : traj.transitions)
        transitions.push_back(
            {{"t", rec.t}, {"var", traj.var_ids[rec.var]}, {"state", rec.new_state}});
    doc["transitions"] = std::move(transitions);
    return doc;
}

}  // namespace phmkit
