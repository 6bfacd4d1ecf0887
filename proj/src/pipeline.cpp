#include "phmkit/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "phmkit/decision.hpp"
#include "phmkit/errors.hpp"
#include "phmkit/exact.hpp"
#include "phmkit/joint.hpp"
#include "phmkit/model_json.hpp"
#include "phmkit/sampler.hpp"

namespace phmkit {

namespace {

using nlohmann::json;

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t salt) {
    return trajectory_seed(master ^ 0x5851F42D4C957F2DULL, salt);
}

std::string scenario_label(const ScenarioAssignment& a) {
    std::string out;
    for (const auto& [id, state] : a) {
        if (!out.empty()) out += "|";
        out += id + "=" + state;
    }
    return out.empty() ? "(base)" : out;
}

}  // namespace

EvaluateOutput run_evaluate(const CtbnModel& model, const std::vector<PerformanceFunction>& pfs,
                            const std::vector<ObjectiveSpec>& objectives,
                            const EvaluateOptions& opts) {
    std::map<std::string, const PerformanceFunction*> pf_by_id;
    for (const auto& pf : pfs) pf_by_id.emplace(pf.id, &pf);
    for (const auto& obj : objectives)
        if (!pf_by_id.count(obj.pf))
            throw data_error("objective " + obj.id + " references unknown performance function " +
                             obj.pf);

    const auto scenarios = enumerate_scenarios(model);
    std::vector<ScenarioResult> results;
    results.reserve(scenarios.size());
    for (const auto& scenario : scenarios) {
        ScenarioResult r;
        r.assignment = scenario;
        for (std::size_t oi = 0; oi < objectives.size(); ++oi) {
            QueryOptions qopts;
            qopts.engine = opts.engine;
            qopts.mc_samples = opts.samples;
            qopts.seed = mix_seed(opts.seed, oi);  // common noise across scenarios
            qopts.tol = opts.tol;
            qopts.state_cap = opts.state_cap;
            const auto est = expected_performance(model, scenario, opts.evidence,
                                                  *pf_by_id.at(objectives[oi].pf), opts.horizon,
                                                  qopts);
            r.values[objectives[oi].id] = {est.value, est.std_error};
        }
        results.push_back(std::move(r));
    }

    EvaluateOutput out;
    out.report = scenario_report(std::move(results), objectives);
    out.table = report_table(out.report);

    json doc;
    doc["horizon"] = opts.horizon;
    doc["seed"] = opts.seed;
    doc["samples"] = opts.samples;
    doc["objectives"] = json::array();
    for (const auto& obj : objectives) {
        json o{{"id", obj.id}, {"pf", obj.pf}, {"direction", to_string(obj.direction)}};
        if (obj.threshold) o["threshold"] = *obj.threshold;
        doc["objectives"].push_back(std::move(o));
    }
    doc["n_feasible"] = out.report.n_feasible;
    doc["scenarios"] = json::array();
    for (const auto& row : out.report.rows) {
        json r;
        r["assignment"] = row.assignment;
        r["feasible"] = row.feasible;
        r["pareto"] = row.on_front;
        json values = json::object();
        for (const auto& [id, val] : row.values)
            values[id] = {{"value", val.value}, {"std_error", val.std_error}};
        r["values"] = std::move(values);
        doc["scenarios"].push_back(std::move(r));
    }
    out.report_json = doc.dump(2) + "\n";

    if (!opts.risk_var.empty()) out.risk_csv = risk_curve_csv(model, opts.risk_var, "1", opts);
    return out;
}

std::string risk_curve_csv(const CtbnModel& model, const std::string& var,
                           const std::string& state, const EvaluateOptions& opts) {
    if (opts.risk_grid < 1) throw parameter_error("risk grid needs at least one step");
    const auto scenarios = enumerate_scenarios(model);
    std::vector<double> grid(opts.risk_grid + 1);
    for (std::size_t i = 0; i <= opts.risk_grid; ++i)
        grid[i] = opts.horizon * static_cast<double>(i) / static_cast<double>(opts.risk_grid);

    const CtbnModel restricted = restrict_to_ancestors(model, {var});
    const std::size_t target = restricted.state_index(var, state);
    const bool exact = opts.engine == Engine::exact ||
                       (opts.engine == Engine::auto_select &&
                        joint_state_count(restricted) <= opts.state_cap);

    std::vector<std::vector<double>> curves;  // per scenario
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        std::vector<double> curve(grid.size(), 0.0);
        if (exact) {
            const auto gen = amalgamate(restricted, scenarios[si], opts.state_cap);
            const std::size_t pos = gen.var_position(var);
            auto dist = joint_initial_distribution(restricted, gen);
            double prev = 0.0;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                dist = transient_distribution(gen, std::move(dist), grid[g] - prev, opts.tol);
                prev = grid[g];
                double p = 0.0;
                for (std::size_t s = 0; s < gen.n_states; ++s)
                    if (gen.digit(s, pos) == target) p += dist[s];
                curve[g] = p;
            }
        } else {
            const auto ests = mc_state_probability_grid(restricted, scenarios[si], var, state,
                                                        grid, opts.samples,
                                                        mix_seed(opts.seed, 0x726B));
            for (std::size_t g = 0; g < grid.size(); ++g) curve[g] = ests[g].value;
        }
        curves.push_back(std::move(curve));
    }

    std::ostringstream os;
    os << "t";
    for (const auto& s : scenarios) os << "," << scenario_label(s);
    os << "\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
        os << format_rate(grid[g]);
        for (const auto& curve : curves) os << "," << format_rate(curve[g]);
        os << "\n";
    }
    return os.str();
}

}  // namespace phmkit
