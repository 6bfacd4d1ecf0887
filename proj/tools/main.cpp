#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "phmkit/decision.hpp"
#include "phmkit/dmatrix.hpp"
#include "phmkit/errors.hpp"
#include "phmkit/fault_tree.hpp"
#include "phmkit/model_json.hpp"
#include "phmkit/pipeline.hpp"
#include "phmkit/sampler.hpp"
#include "phmkit/vehicle.hpp"

namespace {

using namespace phmkit;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write " + path);
    out << content;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PHMKIT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw parse_error("PHMKIT_SEED is not an integer");
        }
    }
    return 42;
}

// "D_AX=current,Operation=standard"; unmentioned decisions fall back to
// their first state.
ScenarioAssignment parse_assignment(const CtbnModel& model, const std::string& text) {
    ScenarioAssignment out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw parse_error("bad decision assignment '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    for (const auto& v : model.variables)
        if (v.kind == VariableKind::decision && !out.count(v.id)) out[v.id] = v.states.front();
    return out;
}

StateCondition parse_condition(const std::string& text) {
    StateCondition out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw parse_error("bad condition literal '" + item + "'");
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    if (out.empty()) throw parse_error("empty condition");
    return out;
}

Evidence load_evidence(const std::string& path) {
    if (path.empty()) return {};
    return evidence_from_string(read_file(path));
}

int run_cli(int argc, char** argv) {
    CLI::App app{"CTBN-based reliability modeling, inference and scenario evaluation"};
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand("validate", "check a model file against its invariants");
    std::string validate_model_path;
    validate->add_option("--model", validate_model_path, "model JSON")->required();

    // derive dmatrix | faulttree
    auto* derive = app.add_subcommand("derive", "derive a model from reliability artifacts");
    derive->require_subcommand(1);
    auto* derive_dm = derive->add_subcommand("dmatrix", "fault/test model from a D-matrix");
    std::string dm_path, dm_rel, dm_tests, dm_mode = "simplified", dm_out;
    derive_dm->add_option("--dmatrix", dm_path, "D-matrix CSV")->required();
    derive_dm->add_option("--reliability", dm_rel, "reliability CSV")->required();
    derive_dm->add_option("--tests", dm_tests, "test parameter JSON")->required();
    derive_dm->add_option("--mode", dm_mode, "simplified|per_pair")
        ->check(CLI::IsMember({"simplified", "per_pair"}));
    derive_dm->add_option("-o,--output", dm_out, "output model JSON (default stdout)");

    auto* derive_ft = derive->add_subcommand("faulttree", "hazard model from a fault tree");
    std::string ft_path, ft_rel, ft_gates, ft_out;
    derive_ft->add_option("--tree", ft_path, "fault tree JSON")->required();
    derive_ft->add_option("--reliability", ft_rel, "reliability CSV")->required();
    derive_ft->add_option("--gates", ft_gates, "gate parameter JSON")->required();
    derive_ft->add_option("-o,--output", ft_out, "output model JSON (default stdout)");

    // merge
    auto* merge = app.add_subcommand("merge", "merge diagnostic and hazard models");
    std::string merge_diag, merge_haz, merge_decisions, merge_out;
    merge->add_option("--diagnostic", merge_diag, "diagnostic model JSON")->required();
    merge->add_option("--hazard", merge_haz, "hazard model JSON")->required();
    merge->add_option("--decisions", merge_decisions, "decision spec JSON to attach");
    merge->add_option("-o,--output", merge_out, "output model JSON (default stdout)");

    // query
    auto* query = app.add_subcommand("query", "state probability or occupancy query");
    std::string q_model, q_type = "state_prob", q_var, q_state = "1", q_cond, q_evidence,
                q_engine = "auto", q_decisions, q_out;
    double q_t = 0.0, q_horizon = 0.0;
    std::uint64_t q_samples = 100000, q_seed = default_seed();
    std::size_t q_cap = default_state_cap;
    query->add_option("--model", q_model, "model JSON")->required();
    query->add_option("--type", q_type, "state_prob|occupancy")
        ->check(CLI::IsMember({"state_prob", "occupancy"}));
    query->add_option("--var", q_var, "queried variable (state_prob)");
    query->add_option("--state", q_state, "queried state name");
    query->add_option("--t", q_t, "query time in hours (state_prob)");
    query->add_option("--condition", q_cond, "VAR=STATE[,VAR=STATE...] (occupancy)");
    query->add_option("--horizon", q_horizon, "occupancy horizon in hours");
    query->add_option("--evidence", q_evidence, "evidence JSON");
    query->add_option("--engine", q_engine, "auto|exact|mc")
        ->check(CLI::IsMember({"auto", "exact", "mc"}));
    query->add_option("--samples", q_samples, "MC trajectory count");
    query->add_option("--seed", q_seed, "master seed");
    query->add_option("--cap", q_cap, "exact-engine state-space cap");
    query->add_option("--decisions", q_decisions, "decision assignment D=state,...");
    query->add_option("-o,--output", q_out, "output JSON (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "sample one trajectory");
    std::string s_model, s_decisions, s_out;
    double s_horizon = 0.0;
    std::uint64_t s_seed = default_seed();
    simulate->add_option("--model", s_model, "model JSON")->required();
    simulate->add_option("--horizon", s_horizon, "simulation horizon in hours")->required();
    simulate->add_option("--seed", s_seed, "trajectory seed");
    simulate->add_option("--decisions", s_decisions, "decision assignment D=state,...");
    simulate->add_option("-o,--output", s_out, "trajectory JSON (default stdout)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "scenario sweep with a Pareto report");
    std::string e_model, e_pfs, e_objectives, e_evidence, e_engine = "auto", e_risk_var, e_out,
                e_table, e_risk_csv;
    double e_horizon = 500.0;
    std::uint64_t e_samples = 20000, e_seed = default_seed();
    std::size_t e_cap = default_state_cap, e_grid = 50;
    evaluate->add_option("--model", e_model, "model JSON")->required();
    evaluate->add_option("--pfs", e_pfs, "performance function JSON");
    evaluate->add_option("--objectives", e_objectives, "objectives JSON")->required();
    evaluate->add_option("--horizon", e_horizon, "evaluation horizon in hours");
    evaluate->add_option("--evidence", e_evidence, "evidence JSON");
    evaluate->add_option("--engine", e_engine, "auto|exact|mc")
        ->check(CLI::IsMember({"auto", "exact", "mc"}));
    evaluate->add_option("--samples", e_samples, "MC trajectory count per estimate");
    evaluate->add_option("--seed", e_seed, "master seed");
    evaluate->add_option("--cap", e_cap, "exact-engine state-space cap");
    evaluate->add_option("--risk-var", e_risk_var, "emit P(var=1,t) curves for this variable");
    evaluate->add_option("--risk-grid", e_grid, "grid steps for risk curves");
    evaluate->add_option("-o,--output", e_out, "report JSON (default stdout)");
    evaluate->add_option("--table", e_table, "also write the text table here");
    evaluate->add_option("--risk-csv", e_risk_csv, "write risk curves CSV here");

    // example
    auto* example = app.add_subcommand("example", "emit a bundled example");
    example->require_subcommand(1);
    auto* vehicle = example->add_subcommand("vehicle", "14-subsystem vehicle bundle");
    std::string v_out = ".";
    vehicle->add_option("-o,--output", v_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (*validate) {
        const auto model = model_from_string(read_file(validate_model_path));
        const auto report = validate_model(model);
        for (const auto& v : report) std::cout << v.variable << ": " << v.description << "\n";
        if (report.empty()) std::cout << "ok: model is valid\n";
        return report.empty() ? 0 : 1;
    }

    if (*derive_dm) {
        const auto d = parse_dmatrix(read_file(dm_path));
        for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
        const auto model = build_diagnostic_model(
            d, parse_reliability_csv(read_file(dm_rel)), parse_test_params_json(read_file(dm_tests)),
            dm_mode == "simplified" ? TestCimMode::simplified : TestCimMode::per_pair);
        write_output(dm_out, model_to_string(model));
        return 0;
    }

    if (*derive_ft) {
        const auto tree = parse_fault_tree(read_file(ft_path));
        for (const auto& w : tree.warnings) std::cerr << "warning: " << w << "\n";
        const auto model = build_hazard_model(prune_fault_tree(tree),
                                              parse_reliability_csv(read_file(ft_rel)),
                                              parse_gate_params(read_file(ft_gates)));
        write_output(ft_out, model_to_string(model));
        return 0;
    }

    if (*merge) {
        auto model = merge_models(model_from_string(read_file(merge_diag)),
                                  model_from_string(read_file(merge_haz)));
        if (!merge_decisions.empty())
            for (const auto& spec : decision_specs_from_string(read_file(merge_decisions)))
                model = attach_decision(model, spec);
        write_output(merge_out, model_to_string(model));
        return 0;
    }

    if (*query) {
        const auto model = model_from_string(read_file(q_model));
        const auto decisions = parse_assignment(model, q_decisions);
        const auto evidence = load_evidence(q_evidence);
        QueryOptions opts;
        opts.engine = engine_from_string(q_engine);
        opts.mc_samples = q_samples;
        opts.seed = q_seed;
        opts.state_cap = q_cap;

        QueryResult result;
        if (q_type == "state_prob") {
            if (q_var.empty()) throw parse_error("state_prob queries need --var");
            result = query_state_probability(model, decisions, evidence, q_var, q_state, q_t, opts);
        } else {
            if (q_cond.empty() || !(q_horizon > 0))
                throw parse_error("occupancy queries need --condition and --horizon");
            result = expected_occupancy(model, decisions, evidence, parse_condition(q_cond),
                                        q_horizon, opts);
        }
        nlohmann::json doc{{"value", result.value},
                           {"std_error", result.std_error},
                           {"engine", result.engine},
                           {"n_samples", result.n_samples}};
        write_output(q_out, doc.dump(2) + "\n");
        return 0;
    }

    if (*simulate) {
        const auto model = model_from_string(read_file(s_model));
        const auto decisions = parse_assignment(model, s_decisions);
        const auto traj = sample_trajectory(model, decisions, s_horizon, s_seed);
        write_output(s_out, trajectory_to_json(traj).dump(2) + "\n");
        return 0;
    }

    if (*evaluate) {
        const auto model = model_from_string(read_file(e_model));
        auto objectives_file = objectives_from_string(read_file(e_objectives));
        std::vector<PerformanceFunction> pfs = std::move(objectives_file.pfs);
        if (!e_pfs.empty()) {
            auto extra = performance_functions_from_string(read_file(e_pfs));
            pfs.insert(pfs.end(), std::make_move_iterator(extra.begin()),
                       std::make_move_iterator(extra.end()));
        }
        if (pfs.empty())
            throw parse_error("no performance functions: pass --pfs or embed 'pfs' in --objectives");

        EvaluateOptions opts;
        opts.horizon = e_horizon;
        opts.engine = engine_from_string(e_engine);
        opts.samples = e_samples;
        opts.seed = e_seed;
        opts.state_cap = e_cap;
        opts.evidence = load_evidence(e_evidence);
        opts.risk_var = e_risk_var;
        opts.risk_grid = e_grid;

        const auto out = run_evaluate(model, pfs, objectives_file.objectives, opts);
        write_output(e_out, out.report_json);
        if (!e_table.empty())
            write_output(e_table, out.table);
        else if (!e_out.empty() && e_out != "-")
            std::cout << out.table;
        if (!out.risk_csv.empty()) {
            if (e_risk_csv.empty()) throw parse_error("--risk-var needs --risk-csv PATH");
            write_output(e_risk_csv, out.risk_csv);
        }
        return 0;
    }

    if (*vehicle) {
        std::filesystem::create_directories(v_out);
        for (const auto& [name, content] : vehicle_example_files())
            write_output((std::filesystem::path(v_out) / name).string(), content);
        std::cout << "wrote vehicle example to " << v_out << "\n";
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const phmkit::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
