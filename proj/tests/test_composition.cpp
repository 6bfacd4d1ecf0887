#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "phmkit/decision.hpp"
#include "phmkit/dmatrix.hpp"
#include "phmkit/errors.hpp"
#include "phmkit/exact.hpp"
#include "phmkit/fault_tree.hpp"
#include "phmkit/joint.hpp"
#include "phmkit/query.hpp"

using namespace phmkit;

namespace {

std::vector<FaultReliability> three_faults() {
    return {{"F1", "one", 900, 5, 100}, {"F2", "two", 1200, 8, 200}, {"F3", "three", 700, 3, 300}};
}

CtbnModel diagnostic_side() {
    const auto d = parse_dmatrix("f,T1,T2\nF1,1,0\nF2,1,1\nF3,0,1\n");
    std::vector<TestParams> tests(2);
    tests[0].id = "T1";
    tests[0].fa = 0.05;
    tests[0].nd = 0.1;
    tests[1].id = "T2";
    tests[1].fa = 0.02;
    tests[1].nd = 0.08;
    return build_diagnostic_model(d, three_faults(), tests, TestCimMode::simplified);
}

CtbnModel hazard_side() {
    const auto ft = parse_fault_tree(R"({
      "nodes": {
        "F1": {"kind": "fault"},
        "F2": {"kind": "fault"},
        "F3": {"kind": "fault"},
        "H1": {"kind": "gate", "gate_op": "or", "children": ["F1", "F2"]},
        "H2": {"kind": "gate", "gate_op": "and", "children": ["H1", "F3"]}
      },
      "top": "H2"
    })");
    GateParams h1{"H1", GateMode::simplified, 0.5, 0.25, {}, {}};
    GateParams h2{"H2", GateMode::simplified, 1.0, 0.0, {}, {}};
    return build_hazard_model(ft, three_faults(), {h1, h2});
}

}  // namespace

TEST_CASE("merge unions the variable and edge sets") {
    const auto d = diagnostic_side();
    const auto h = hazard_side();
    const auto m = merge_models(d, h);
    CHECK(m.variables.size() == 7);
    CHECK(m.edges.size() == d.edges.size() + h.edges.size());
    CHECK(validate_model(m).empty());

    // Every CIM of both inputs survives bit for bit.
    for (const auto& [id, cim] : d.cims) CHECK(m.cims.at(id) == cim);
    for (const auto& [id, cim] : h.cims) CHECK(m.cims.at(id) == cim);
}

TEST_CASE("merge with an empty hazard side is the identity") {
    const auto d = diagnostic_side();
    CtbnModel faults_only;
    for (const auto& v : d.variables)
        if (v.kind == VariableKind::fault) {
            faults_only.variables.push_back(v);
            faults_only.cims.emplace(v.id, d.cims.at(v.id));
            faults_only.initial.emplace(v.id, d.initial.at(v.id));
        }
    const auto m = merge_models(d, faults_only);
    CHECK(m == d);
}

TEST_CASE("merge rejects mismatched fault sets and conflicting CIMs") {
    const auto d = diagnostic_side();
    auto h = hazard_side();

    auto extra = h;
    testing::add_root(extra, "F9", VariableKind::fault, 0.001, 0.1);
    extra.canonicalize();
    CHECK_THROWS_WITH_AS(merge_models(d, extra), doctest::Contains("F9"), merge_error);

    auto conflicting = h;
    conflicting.cims.at("F1").matrices[0].at(0, 1) *= 2;
    conflicting.cims.at("F1").matrices[0].at(0, 0) *= 2;
    CHECK_THROWS_WITH_AS(merge_models(d, conflicting), doctest::Contains("F1"), merge_error);
}

namespace {

DecisionSpec operation_spec() {
    DecisionSpec spec;
    spec.id = "Operation";
    spec.states = {"standard", "conservative"};
    DecisionOverride ov;
    ov.child = "F2";
    CimOverride conservative;
    conservative.scale_lambda = 0.5;
    ov.per_state.emplace("conservative", std::move(conservative));
    spec.overrides.push_back(std::move(ov));
    return spec;
}

}  // namespace

TEST_CASE("attach_decision doubles the child's CIM and keeps the original slice") {
    const auto base = merge_models(diagnostic_side(), hazard_side());
    const auto with_op = attach_decision(base, operation_spec());
    CHECK(validate_model(with_op).empty());

    const auto& cim = with_op.cims.at("F2");
    REQUIRE(cim.parent_ids == std::vector<std::string>{"Operation"});
    REQUIRE(cim.matrices.size() == 2);
    CHECK(cim.matrices[0] == base.cims.at("F2").matrices[0]);
    CHECK(cim.matrices[1].at(0, 1) == base.cims.at("F2").matrices[0].at(0, 1) * 0.5);
    CHECK(cim.matrices[1].at(1, 0) == base.cims.at("F2").matrices[0].at(1, 0));

    const auto& dec = with_op.variable("Operation");
    CHECK(dec.kind == VariableKind::decision);
    CHECK(with_op.initial.at("Operation") == std::vector<double>{0.5, 0.5});
}

TEST_CASE("binding the original state reproduces the pre-decision model") {
    const auto base = merge_models(diagnostic_side(), hazard_side());
    const auto with_op = attach_decision(base, operation_spec());
    const auto bound = bind_scenario(with_op, {{"Operation", "standard"}});
    CHECK(validate_model(bound).empty());
    CHECK(bound == base);

    for (const char* var : {"F2", "H1", "H2", "T1"}) {
        QueryOptions opts;
        opts.engine = Engine::exact;
        const auto a = query_state_probability(base, {}, {}, var, "1", 300.0, opts);
        const auto b = query_state_probability(bound, {}, {}, var, "1", 300.0, opts);
        CHECK(std::fabs(a.value - b.value) <= 1e-12);
    }
}

TEST_CASE("bind equals amalgamation with clamped decisions") {
    const auto base = merge_models(diagnostic_side(), hazard_side());
    const auto with_op = attach_decision(base, operation_spec());
    const ScenarioAssignment a{{"Operation", "conservative"}};

    const auto direct = amalgamate(restrict_to_ancestors(with_op, {"H2"}), a);
    const auto bound_model = bind_scenario(with_op, a);
    const auto bound = amalgamate(restrict_to_ancestors(bound_model, {"H2"}), {});
    REQUIRE(direct.n_states == bound.n_states);

    const auto restricted = restrict_to_ancestors(bound_model, {"H2"});
    const auto init = joint_initial_distribution(restricted, bound);
    const auto da = transient_distribution(direct, init, 250.0);
    const auto db = transient_distribution(bound, init, 250.0);
    for (std::size_t s = 0; s < da.size(); ++s) CHECK(std::fabs(da[s] - db[s]) <= 1e-12);
}

namespace {

// Two power sources feeding an AND hazard, with a structural decision that
// severs PW2 in its "single" state.
CtbnModel power_model() {
    const auto ft = parse_fault_tree(R"({
      "nodes": {
        "PW1": {"kind": "fault"},
        "PW2": {"kind": "fault"},
        "LOP": {"kind": "gate", "gate_op": "and", "children": ["PW1", "PW2"]}
      },
      "top": "LOP"
    })");
    std::vector<FaultReliability> rel{{"PW1", "Power Source 1", 400, 3, 250},
                                      {"PW2", "Power Source 2", 200, 3, 250}};
    GateParams lop{"LOP", GateMode::simplified, 0.5, 0.25, {}, {}};
    return build_hazard_model(ft, rel, {lop});
}

DecisionSpec power_spec() {
    DecisionSpec spec;
    spec.id = "D_PW";
    spec.states = {"redundant", "single"};
    DecisionOverride ov;
    ov.child = "LOP";
    CimOverride single;
    Cim rep;
    rep.owner = "LOP";
    rep.parent_ids = {"PW1"};
    {
        IntensityMatrix off(2);  // PW1 healthy: fall back toward 0
        off.at(1, 0) = 0.25;
        off.at(1, 1) = -0.25;
        IntensityMatrix on(2);  // PW1 failed: ramp toward 1
        on.at(0, 0) = -0.5;
        on.at(0, 1) = 0.5;
        rep.matrices = {off, on};
    }
    single.replacement = std::move(rep);
    ov.per_state.emplace("single", std::move(single));
    spec.overrides.push_back(std::move(ov));
    spec.edge_masks.push_back({"single", "PW2", "LOP"});
    return spec;
}

}  // namespace

TEST_CASE("edge masking duplicates the reduced CIM across the severed parent") {
    const auto base = power_model();
    const auto with_dec = attach_decision(base, power_spec());
    CHECK(validate_model(with_dec).empty());

    const auto& cim = with_dec.cims.at("LOP");
    REQUIRE(cim.parent_ids == std::vector<std::string>{"D_PW", "PW1", "PW2"});
    REQUIRE(cim.matrices.size() == 8);
    // Redundant state keeps the original four matrices.
    for (std::size_t pw = 0; pw < 4; ++pw) {
        std::map<std::string, std::size_t> s{
            {"D_PW", 0}, {"PW1", pw & 1}, {"PW2", pw >> 1}};
        CHECK(cim.matrices[cim_assignment_index(with_dec, cim, s)] ==
              base.cims.at("LOP").matrices[pw]);
    }
    // Single state ignores PW2.
    for (std::size_t pw1 = 0; pw1 < 2; ++pw1) {
        std::map<std::string, std::size_t> a{{"D_PW", 1}, {"PW1", pw1}, {"PW2", 0}};
        std::map<std::string, std::size_t> b{{"D_PW", 1}, {"PW1", pw1}, {"PW2", 1}};
        CHECK(cim.matrices[cim_assignment_index(with_dec, cim, a)] ==
              cim.matrices[cim_assignment_index(with_dec, cim, b)]);
    }
}

TEST_CASE("binding the single state drops the severed edge") {
    const auto with_dec = attach_decision(power_model(), power_spec());
    const auto bound = bind_scenario(with_dec, {{"D_PW", "single"}});
    CHECK(validate_model(bound).empty());
    CHECK(bound.parents_of("LOP") == std::vector<std::string>{"PW1"});
    CHECK(!bound.edges.count({"PW2", "LOP"}));
    CHECK(bound.cims.at("LOP").matrices.size() == 2);
}

TEST_CASE("severed-edge marginals ignore the severed parent entirely") {
    const auto with_dec = attach_decision(power_model(), power_spec());
    auto bound = bind_scenario(with_dec, {{"D_PW", "single"}});

    // Clamp PW2 by freezing it in either state; the LOP marginal must agree.
    auto clamped = [&](int state) {
        CtbnModel m = bound;
        m.cims.at("PW2").matrices[0] = IntensityMatrix(2);
        m.initial.at("PW2") = state == 0 ? std::vector<double>{1.0, 0.0}
                                         : std::vector<double>{0.0, 1.0};
        QueryOptions opts;
        opts.engine = Engine::exact;
        // Keep PW2 in the amalgamation to exercise the full joint space.
        const auto gen = amalgamate(m, {});
        const auto dist =
            transient_distribution(gen, joint_initial_distribution(m, gen), 400.0);
        const std::size_t pos = gen.var_position("LOP");
        double p = 0.0;
        for (std::size_t s = 0; s < gen.n_states; ++s)
            if (gen.digit(s, pos) == 1) p += dist[s];
        return p;
    };
    const double p0 = clamped(0);
    const double p1 = clamped(1);
    CHECK(std::fabs(p0 - p1) <= 1e-12);

    // Sanity: under the redundant design the clamp direction matters.
    const auto redundant = bind_scenario(with_dec, {{"D_PW", "redundant"}});
    auto clamped_red = [&](int state) {
        CtbnModel m = redundant;
        m.cims.at("PW2").matrices[0] = IntensityMatrix(2);
        m.initial.at("PW2") = state == 0 ? std::vector<double>{1.0, 0.0}
                                         : std::vector<double>{0.0, 1.0};
        const auto gen = amalgamate(m, {});
        const auto dist =
            transient_distribution(gen, joint_initial_distribution(m, gen), 400.0);
        const std::size_t pos = gen.var_position("LOP");
        double p = 0.0;
        for (std::size_t s = 0; s < gen.n_states; ++s)
            if (gen.digit(s, pos) == 1) p += dist[s];
        return p;
    };
    CHECK(std::fabs(clamped_red(0) - clamped_red(1)) > 1e-6);
}

TEST_CASE("attach_decision validates its spec") {
    const auto base = power_model();

    auto no_replacement = power_spec();
    no_replacement.overrides.clear();
    CHECK_THROWS_AS(attach_decision(base, no_replacement), decision_spec_error);

    auto bad_parents = power_spec();
    bad_parents.overrides[0].per_state.at("single").replacement->parent_ids = {"PW1", "PW2"};
    CHECK_THROWS_AS(attach_decision(base, bad_parents), decision_spec_error);

    auto bad_state = power_spec();
    bad_state.edge_masks[0].state = "bogus";
    CHECK_THROWS_AS(attach_decision(base, bad_state), decision_spec_error);

    auto clash = power_spec();
    clash.id = "LOP";
    CHECK_THROWS_AS(attach_decision(base, clash), decision_spec_error);
}

TEST_CASE("bind_scenario requires a complete assignment") {
    const auto with_dec = attach_decision(power_model(), power_spec());
    CHECK_THROWS_AS(bind_scenario(with_dec, {}), binding_error);
    CHECK_THROWS_AS(bind_scenario(with_dec, {{"D_PW", "nope"}}), data_error);
    CHECK_THROWS_AS(
        bind_scenario(with_dec, {{"D_PW", "single"}, {"Ghost", "x"}}), binding_error);
}

TEST_CASE("axle-style CIM swap binds to distinct failure rates") {
    CtbnModel base;
    testing::add_root(base, "AX", VariableKind::fault, 1.0 / 1800, 1.0 / 12);
    base = testing::finish(base);

    DecisionSpec spec;
    spec.id = "D_AX";
    spec.states = {"current", "upgraded"};
    DecisionOverride ov;
    ov.child = "AX";
    CimOverride upgraded;
    Cim rep;
    rep.owner = "AX";
    rep.matrices = {two_state_im(1.0 / 2100, 1.0 / 20)};
    upgraded.replacement = std::move(rep);
    ov.per_state.emplace("upgraded", std::move(upgraded));
    spec.overrides.push_back(std::move(ov));

    const auto with_dec = attach_decision(base, spec);
    REQUIRE(with_dec.cims.at("AX").matrices.size() == 2);
    CHECK(with_dec.cims.at("AX").matrices[0].at(0, 1) == doctest::Approx(1.0 / 1800));
    CHECK(with_dec.cims.at("AX").matrices[1].at(0, 1) == doctest::Approx(1.0 / 2100));

    const auto bound = bind_scenario(with_dec, {{"D_AX", "upgraded"}});
    CHECK(bound.cims.at("AX").matrices[0].at(1, 0) == doctest::Approx(1.0 / 20));
}
