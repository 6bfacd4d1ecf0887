#include "phmkit/fault_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "json.hpp"
#include "phmkit/errors.hpp"

namespace phmkit {

namespace {

using nlohmann::json;

void check_acyclic(const FaultTree& ft) {
    // Iterative DFS with a coloring; reports the cycle it finds.
    std::map<std::string, int> color;  // 0 new, 1 on stack, 2 done
    for (const auto& [start, node] : ft.nodes) {
        if (color[start]) continue;
        std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
        color[start] = 1;
        while (!stack.empty()) {
            auto& [id, next] = stack.back();
            const auto& children = ft.nodes.at(id).children;
            if (next >= children.size()) {
                color[id] = 2;
                stack.pop_back();
                continue;
            }
            const std::string child = children[next++];
            if (color[child] == 1) {
                std::string cycle = child;
                for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                    cycle += " <- " + it->first;
                    if (it->first == child) break;
                }
                throw parse_error("not a DAG, cycle: [" + cycle + "]");
            }
            if (color[child] == 0) {
                color[child] = 1;
                stack.emplace_back(child, 0);
            }
        }
    }
}

}  // namespace

FaultTree parse_fault_tree(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("fault tree JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("top"))
        throw parse_error("fault tree JSON needs 'nodes' and 'top'");

    FaultTree ft;
    ft.top = doc.at("top").get<std::string>();
    for (const auto& [id, spec] : doc.at("nodes").items()) {
        FaultTreeNode node;
        const std::string kind = spec.at("kind").get<std::string>();
        if (kind == "gate") {
            node.is_gate = true;
            const std::string op = spec.at("gate_op").get<std::string>();
            if (op == "and")
                node.op = GateOp::and_gate;
            else if (op == "or")
                node.op = GateOp::or_gate;
            else
                throw parse_error("gate " + id + " has unsupported gate_op '" + op +
                                  "' (only and/or)");
            for (const auto& c : spec.at("children")) node.children.push_back(c.get<std::string>());
            if (node.children.empty()) throw parse_error("gate " + id + " has no children");
        } else if (kind == "fault") {
            if (spec.contains("children") && !spec.at("children").empty())
                throw parse_error("fault " + id + " must be a leaf");
        } else {
            throw parse_error("node " + id + " has unknown kind '" + kind + "'");
        }
        ft.nodes.emplace(id, std::move(node));
    }

    if (!ft.nodes.count(ft.top)) throw parse_error("top node " + ft.top + " is not defined");
    for (const auto& [id, node] : ft.nodes)
        for (const auto& c : node.children)
            if (!ft.nodes.count(c)) throw parse_error("node " + id + " references unknown child " + c);
    check_acyclic(ft);

    // Nodes that cannot reach the top are flagged, not rejected.
    std::set<std::string> reaches{ft.top};
    std::deque<std::string> frontier{ft.top};
    while (!frontier.empty()) {
        const std::string cur = frontier.front();
        frontier.pop_front();
        for (const auto& c : ft.nodes.at(cur).children)
            if (reaches.insert(c).second) frontier.push_back(c);
    }
    for (const auto& [id, node] : ft.nodes)
        if (!reaches.count(id)) ft.warnings.push_back("node " + id + " cannot reach top " + ft.top);
    return ft;
}

FaultTree prune_fault_tree(const FaultTree& ft) {
    FaultTree out = ft;
    for (auto& [id, node] : out.nodes) {
        std::vector<std::string> deduped;
        std::set<std::string> seen;
        for (const auto& c : node.children)
            if (seen.insert(c).second) deduped.push_back(c);
        node.children = std::move(deduped);
    }
    return out;
}

std::map<std::string, int> evaluate_fault_tree(const FaultTree& ft,
                                               const std::map<std::string, int>& leaves) {
    std::map<std::string, int> values;
    // Memoized recursive evaluation via an explicit worklist.
    std::vector<std::string> stack;
    for (const auto& [id, node] : ft.nodes) stack.push_back(id);
    while (!stack.empty()) {
        const std::string id = stack.back();
        if (values.count(id)) {
            stack.pop_back();
            continue;
        }
        const FaultTreeNode& node = ft.nodes.at(id);
        if (!node.is_gate) {
            auto it = leaves.find(id);
            if (it == leaves.end()) throw data_error("no leaf value for fault " + id);
            values[id] = it->second;
            stack.pop_back();
            continue;
        }
        bool ready = true;
        for (const auto& c : node.children)
            if (!values.count(c)) {
                stack.push_back(c);
                ready = false;
            }
        if (!ready) continue;
        int v = node.op == GateOp::and_gate ? 1 : 0;
        for (const auto& c : node.children) {
            if (node.op == GateOp::and_gate)
                v = v && values[c];
            else
                v = v || values[c];
        }
        values[id] = v;
        stack.pop_back();
    }
    return values;
}

CtbnModel derive_fault_tree_structure(const FaultTree& ft) {
    CtbnModel m;
    for (const auto& [id, node] : ft.nodes) {
        m.variables.push_back(
            {id, {"0", "1"}, node.is_gate ? VariableKind::hazard : VariableKind::fault});
        for (const auto& c : node.children) m.edges.insert({c, id});
    }
    m.canonicalize();
    return m;
}

Cim gate_cim(const GateParams& g, GateOp op, const std::vector<std::string>& parents) {
    if (parents.empty()) throw parameter_error("gate " + g.id + " needs at least one parent");
    if (g.mode == GateMode::noisy_or && op != GateOp::or_gate)
        throw parameter_error("noisy_or mode requires an OR gate (" + g.id + ")");
    if (g.mu < 0.0 || !std::isfinite(g.mu))
        throw parameter_error("mu must be >= 0 for gate " + g.id);

    Cim cim;
    cim.owner = g.id;
    cim.parent_ids = parents;
    std::sort(cim.parent_ids.begin(), cim.parent_ids.end());
    const std::size_t k = cim.parent_ids.size();

    auto full_rate = [&](std::size_t a) {
        std::ostringstream key;
        for (std::size_t i = 0; i < k; ++i) {
            if (i) key << ",";
            key << cim.parent_ids[i] << "=" << (a >> i & 1);
        }
        auto it = g.full_rates.find(key.str());
        if (it == g.full_rates.end())
            throw data_error("gate " + g.id + " lacks a full-mode rate for assignment " + key.str());
        return it->second;
    };

    const std::size_t n_assignments = std::size_t(1) << k;
    for (std::size_t a = 0; a < n_assignments; ++a) {
        const bool all_ones = a + 1 == n_assignments;
        const bool any_one = a != 0;
        const bool asserted = op == GateOp::and_gate ? all_ones : any_one;
        if (asserted) {
            double lambda;
            switch (g.mode) {
                case GateMode::simplified:
                    lambda = g.lambda;
                    break;
                case GateMode::full:
                    lambda = full_rate(a);
                    break;
                case GateMode::noisy_or: {
                    lambda = 0.0;
                    for (std::size_t i = 0; i < k; ++i) {
                        if (!(a >> i & 1)) continue;
                        auto it = g.noisy_rates.find(cim.parent_ids[i]);
                        if (it == g.noisy_rates.end())
                            throw data_error("gate " + g.id + " lacks a noisy-or rate for parent " +
                                             cim.parent_ids[i]);
                        lambda += it->second;
                    }
                    break;
                }
            }
            if (!(lambda > 0.0) || !std::isfinite(lambda))
                throw parameter_error("lambda must be > 0 for gate " + g.id);
            IntensityMatrix m(2);
            m.at(0, 0) = -lambda;
            m.at(0, 1) = lambda;
            cim.matrices.push_back(std::move(m));
        } else {
            const double mu = g.mode == GateMode::full ? full_rate(a) : g.mu;
            if (mu < 0.0 || !std::isfinite(mu))
                throw parameter_error("mu must be >= 0 for gate " + g.id);
            IntensityMatrix m(2);
            m.at(1, 0) = mu;
            m.at(1, 1) = -mu;
            cim.matrices.push_back(std::move(m));
        }
    }
    return cim;
}

std::vector<GateParams> parse_gate_params(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("gate params JSON: ") + e.what());
    }
    if (!doc.is_array()) throw parse_error("gate params JSON must be an array");

    std::vector<GateParams> out;
    for (const auto& item : doc) {
        GateParams g;
        g.id = item.at("id").get<std::string>();
        const std::string mode = item.value("mode", std::string("simplified"));
        if (mode == "simplified")
            g.mode = GateMode::simplified;
        else if (mode == "full")
            g.mode = GateMode::full;
        else if (mode == "noisy_or")
            g.mode = GateMode::noisy_or;
        else
            throw parse_error("gate " + g.id + " has unknown mode '" + mode + "'");
        g.lambda = item.value("lambda", 0.0);
        g.mu = item.value("mu", 0.0);
        if (item.contains("noisy_rates"))
            for (const auto& [pid, rate] : item.at("noisy_rates").items())
                g.noisy_rates[pid] = rate.get<double>();
        if (item.contains("full_rates"))
            for (const auto& [key, rate] : item.at("full_rates").items())
                g.full_rates[key] = rate.get<double>();
        out.push_back(std::move(g));
    }
    return out;
}

CtbnModel build_hazard_model(const FaultTree& ft,
                             const std::vector<FaultReliability>& fault_reliability,
                             const std::vector<GateParams>& gate_params) {
    const FaultTree pruned = prune_fault_tree(ft);
    CtbnModel m = derive_fault_tree_structure(pruned);

    std::map<std::string, const FaultReliability*> rel;
    for (const auto& r : fault_reliability) rel.emplace(r.id, &r);
    std::map<std::string, const GateParams*> gates;
    for (const auto& g : gate_params) gates.emplace(g.id, &g);

    for (const auto& [id, node] : pruned.nodes) {
        if (node.is_gate) {
            auto it = gates.find(id);
            if (it == gates.end()) throw data_error("gate " + id + " has no parameters");
            m.cims.emplace(id, gate_cim(*it->second, node.op, node.children));
        } else {
            auto it = rel.find(id);
            if (it == rel.end()) throw data_error("fault " + id + " has no reliability record");
            m.cims.emplace(id, fault_cim(*it->second));
        }
        m.initial.emplace(id, std::vector<double>{1.0, 0.0});
    }

    const auto report = validate_model(m);
    if (!report.empty())
        throw data_error("derived model failed validation: " + report.front().variable + ": " +
                         report.front().description);
    return m;
}

}  // namespace phmkit
