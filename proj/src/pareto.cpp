#include "phmkit/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "phmkit/errors.hpp"

namespace phmkit {

std::string to_string(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }

Direction direction_from_string(const std::string& s) {
    if (s == "maximize") return Direction::maximize;
    if (s == "minimize") return Direction::minimize;
    throw parse_error("unknown objective direction: " + s);
}

std::vector<ScenarioAssignment> enumerate_scenarios(const CtbnModel& model, std::size_t cap) {
    std::vector<const Variable*> decisions;
    for (const auto& v : model.variables)
        if (v.kind == VariableKind::decision) decisions.push_back(&v);

    std::size_t total = 1;
    for (const auto* d : decisions) {
        if (total > cap / d->states.size() && total * d->states.size() > cap) {
            std::ostringstream os;
            os << "scenario count exceeds cap " << cap;
            throw capacity_error(os.str());
        }
        total *= d->states.size();
    }
    if (total > cap) throw capacity_error("scenario count exceeds cap " + std::to_string(cap));

    std::vector<ScenarioAssignment> out;
    out.reserve(total);
    std::vector<std::size_t> digits(decisions.size(), 0);
    while (true) {
        ScenarioAssignment a;
        for (std::size_t i = 0; i < decisions.size(); ++i)
            a[decisions[i]->id] = decisions[i]->states[digits[i]];
        out.push_back(std::move(a));
        // First (sorted) decision varies slowest.
        std::size_t pos = decisions.size();
        while (pos > 0) {
            --pos;
            if (++digits[pos] < decisions[pos]->states.size()) break;
            digits[pos] = 0;
            if (pos == 0) return out;
        }
        if (decisions.empty()) return out;
    }
}

namespace {

// Direction-adjusted objective matrix; throws on missing values.
std::vector<std::vector<double>> adjusted_values(const std::vector<ScenarioResult>& results,
                                                 const std::vector<ObjectiveSpec>& objectives) {
    std::vector<std::vector<double>> vals(results.size(),
                                          std::vector<double>(objectives.size(), 0.0));
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (std::size_t k = 0; k < objectives.size(); ++k) {
            auto it = results[i].values.find(objectives[k].id);
            if (it == results[i].values.end())
                throw data_error("scenario result lacks objective " + objectives[k].id);
            const double v = it->second.value;
            vals[i][k] = objectives[k].direction == Direction::maximize ? v : -v;
        }
    }
    return vals;
}

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] < b[k]) return false;
        if (a[k] > b[k]) strict = true;
    }
    return strict;
}

}  // namespace

std::vector<bool> pareto_front(const std::vector<ScenarioResult>& results,
                               const std::vector<ObjectiveSpec>& objectives) {
    const auto vals = adjusted_values(results, objectives);
    const std::size_t n = results.size();
    std::vector<bool> on_front(n, false);
    if (n == 0) return on_front;

    // Lexicographic descending sweep: any dominator of x sorts before x, so
    // comparing against the running archive of non-dominated items suffices.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(vals[b].begin(), vals[b].end(), vals[a].begin(),
                                            vals[a].end());
    });
    std::vector<std::size_t> archive;
    for (std::size_t idx : order) {
        bool dominated = false;
        for (std::size_t a : archive)
            if (dominates(vals[a], vals[idx])) {
                dominated = true;
                break;
            }
        if (!dominated) {
            archive.push_back(idx);
            on_front[idx] = true;
        }
    }
    return on_front;
}

ScenarioReport scenario_report(std::vector<ScenarioResult> results,
                               const std::vector<ObjectiveSpec>& objectives) {
    ScenarioReport report;
    report.objectives = objectives;

    for (auto& r : results) {
        r.feasible = true;
        r.on_front = false;
        for (const auto& obj : objectives) {
            if (!obj.threshold) continue;
            auto it = r.values.find(obj.id);
            if (it == r.values.end()) throw data_error("scenario result lacks objective " + obj.id);
            const double v = it->second.value;
            const bool ok = obj.direction == Direction::maximize ? v >= *obj.threshold
                                                                 : v <= *obj.threshold;
            if (!ok) r.feasible = false;
        }
    }

    std::vector<ScenarioResult> feasible;
    std::vector<ScenarioResult> infeasible;
    for (auto& r : results) (r.feasible ? feasible : infeasible).push_back(std::move(r));

    const auto flags = pareto_front(feasible, objectives);
    for (std::size_t i = 0; i < feasible.size(); ++i) feasible[i].on_front = flags[i];
    report.n_feasible = feasible.size();

    if (!objectives.empty()) {
        const auto& first = objectives.front();
        auto better = [&](const ScenarioResult& a, const ScenarioResult& b) {
            const double va = a.values.at(first.id).value;
            const double vb = b.values.at(first.id).value;
            return first.direction == Direction::maximize ? va > vb : va < vb;
        };
        std::stable_sort(feasible.begin(), feasible.end(), better);
        std::stable_sort(infeasible.begin(), infeasible.end(), better);
    }
    report.rows = std::move(feasible);
    for (auto& r : infeasible) report.rows.push_back(std::move(r));
    return report;
}

std::string report_table(const ScenarioReport& report) {
    std::ostringstream os;
    std::vector<std::string> decision_ids;
    if (!report.rows.empty())
        for (const auto& [id, state] : report.rows.front().assignment) decision_ids.push_back(id);

    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s += std::string(w - s.size(), ' ');
        return s;
    };
    const std::size_t col = 16;

    for (const auto& id : decision_ids) os << pad(id, col);
    for (const auto& obj : report.objectives) os << pad(obj.id, col);
    os << pad("feasible", 10) << pad("pareto", 8) << "\n";
    os << std::string(col * (decision_ids.size() + report.objectives.size()) + 18, '-') << "\n";

    for (const auto& row : report.rows) {
        for (const auto& id : decision_ids) os << pad(row.assignment.at(id), col);
        for (const auto& obj : report.objectives) {
            const auto& val = row.values.at(obj.id);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6g", val.value);
            os << pad(buf, col);
        }
        os << pad(row.feasible ? "yes" : "no", 10) << pad(row.on_front ? "*" : "", 8) << "\n";
    }
    if (report.n_feasible == 0) os << "(no scenario meets the thresholds)\n";
    return os.str();
}

}  // namespace phmkit
