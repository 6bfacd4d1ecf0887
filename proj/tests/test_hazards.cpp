#include <cmath>
#include <random>

#include "doctest.h"
#include "phmkit/errors.hpp"
#include "phmkit/fault_tree.hpp"
#include "phmkit/joint.hpp"
#include "phmkit/exact.hpp"
#include "phmkit/sampler.hpp"

using namespace phmkit;

namespace {

const char* k_small_tree = R"({
  "nodes": {
    "F1": {"kind": "fault"},
    "F2": {"kind": "fault"},
    "A": {"kind": "gate", "gate_op": "or", "children": ["F1", "F2"]}
  },
  "top": "A"
})";

}  // namespace

TEST_CASE("parse_fault_tree reads a three-node tree") {
    const auto ft = parse_fault_tree(k_small_tree);
    CHECK(ft.nodes.size() == 3);
    CHECK(ft.top == "A");
    CHECK(ft.nodes.at("A").is_gate);
    CHECK(ft.nodes.at("A").op == GateOp::or_gate);
    CHECK(ft.warnings.empty());
}

TEST_CASE("shared faults make a DAG, not a strict tree") {
    const auto ft = parse_fault_tree(R"({
      "nodes": {
        "F1": {"kind": "fault"},
        "A": {"kind": "gate", "gate_op": "or", "children": ["F1"]},
        "B": {"kind": "gate", "gate_op": "and", "children": ["F1", "A"]}
      },
      "top": "B"
    })");
    CHECK(ft.nodes.size() == 3);
    const auto m = derive_fault_tree_structure(ft);
    CHECK(m.children_of("F1") == std::vector<std::string>{"A", "B"});
}

TEST_CASE("parse_fault_tree rejects malformed trees") {
    CHECK_THROWS_WITH_AS(parse_fault_tree(R"({
      "nodes": {"A": {"kind": "gate", "gate_op": "and", "children": ["A"]}},
      "top": "A"
    })"),
                         doctest::Contains("not a DAG"), parse_error);
    CHECK_THROWS_AS(parse_fault_tree(R"({
      "nodes": {"A": {"kind": "gate", "gate_op": "and", "children": []}},
      "top": "A"
    })"),
                    parse_error);
    CHECK_THROWS_WITH_AS(parse_fault_tree(R"({
      "nodes": {
        "F": {"kind": "fault"},
        "A": {"kind": "gate", "gate_op": "xor", "children": ["F"]}
      },
      "top": "A"
    })"),
                         doctest::Contains("only and/or"), parse_error);
}

TEST_CASE("unreachable nodes are flagged, not rejected") {
    const auto ft = parse_fault_tree(R"({
      "nodes": {
        "F1": {"kind": "fault"},
        "F2": {"kind": "fault"},
        "A": {"kind": "gate", "gate_op": "or", "children": ["F1"]},
        "B": {"kind": "gate", "gate_op": "or", "children": ["F2"]}
      },
      "top": "A"
    })");
    CHECK(ft.warnings.size() == 2);
}

TEST_CASE("pruning deduplicates gate inputs and is a fixed point") {
    auto ft = parse_fault_tree(k_small_tree);
    ft.nodes.at("A").children = {"F1", "F1", "F2", "F1"};
    const auto pruned = prune_fault_tree(ft);
    CHECK(pruned.nodes.at("A").children == std::vector<std::string>{"F1", "F2"});
    const auto again = prune_fault_tree(pruned);
    CHECK(again.nodes.at("A").children == pruned.nodes.at("A").children);
}

namespace {

FaultTree random_tree(std::mt19937_64& rng, int n_faults, int n_gates) {
    FaultTree ft;
    std::vector<std::string> pool;
    for (int i = 0; i < n_faults; ++i) {
        const std::string id = "F" + std::to_string(i);
        ft.nodes.emplace(id, FaultTreeNode{});
        pool.push_back(id);
    }
    std::string last;
    for (int g = 0; g < n_gates; ++g) {
        FaultTreeNode node;
        node.is_gate = true;
        node.op = rng() % 2 ? GateOp::and_gate : GateOp::or_gate;
        const std::size_t n_children = 1 + rng() % 4;
        for (std::size_t c = 0; c < n_children; ++c)
            node.children.push_back(pool[rng() % pool.size()]);  // duplicates likely
        const std::string id = "G" + std::to_string(g);
        ft.nodes.emplace(id, std::move(node));
        pool.push_back(id);
        last = id;
    }
    ft.top = last;
    return ft;
}

}  // namespace

TEST_CASE("pruning preserves Boolean semantics on random trees") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_faults = 2 + static_cast<int>(rng() % 11);  // up to 12
        const auto ft = random_tree(rng, n_faults, 1 + rng() % 6);
        const auto pruned = prune_fault_tree(ft);
        for (std::size_t bits = 0; bits < (std::size_t(1) << n_faults); ++bits) {
            std::map<std::string, int> leaves;
            for (int i = 0; i < n_faults; ++i)
                leaves["F" + std::to_string(i)] = static_cast<int>(bits >> i & 1);
            CHECK(evaluate_fault_tree(ft, leaves) == evaluate_fault_tree(pruned, leaves));
        }
    }
}

TEST_CASE("gate_cim emits the AND/OR absorbing matrices") {
    GateParams g;
    g.id = "A";
    g.lambda = 1.0;
    g.mu = 0.5;

    const auto and_cim = gate_cim(g, GateOp::and_gate, {"P1", "P2"});
    REQUIRE(and_cim.matrices.size() == 4);
    const auto& all_ones = and_cim.matrices[3];
    CHECK(all_ones.at(0, 0) == -1.0);
    CHECK(all_ones.at(0, 1) == 1.0);
    CHECK(all_ones.at(1, 0) == 0.0);
    CHECK(all_ones.at(1, 1) == 0.0);
    for (std::size_t a = 0; a < 3; ++a) {
        CHECK(and_cim.matrices[a].at(0, 1) == 0.0);
        CHECK(and_cim.matrices[a].at(1, 0) == 0.5);
    }

    const auto or_cim = gate_cim(g, GateOp::or_gate, {"P1", "P2"});
    const auto& all_zero = or_cim.matrices[0];
    CHECK(all_zero.at(0, 0) == 0.0);
    CHECK(all_zero.at(0, 1) == 0.0);
    CHECK(all_zero.at(1, 0) == 0.5);
    for (std::size_t a = 1; a < 4; ++a) CHECK(or_cim.matrices[a].at(0, 1) == 1.0);

    // Simplified mode: exactly two distinct matrices across the assignments.
    GateParams g4 = g;
    const auto big = gate_cim(g4, GateOp::or_gate, {"P1", "P2", "P3", "P4"});
    CHECK(big.matrices.size() == 16);
    for (std::size_t a = 1; a < 16; ++a) CHECK(big.matrices[a] == big.matrices[1]);
}

TEST_CASE("noisy_or sums the rates of active parents") {
    GateParams g;
    g.id = "O";
    g.mode = GateMode::noisy_or;
    g.mu = 0.5;
    g.noisy_rates = {{"P1", 0.1}, {"P2", 0.3}};
    const auto cim = gate_cim(g, GateOp::or_gate, {"P1", "P2"});
    CHECK(cim.matrices[1].at(0, 1) == doctest::Approx(0.1));
    CHECK(cim.matrices[2].at(0, 1) == doctest::Approx(0.3));
    CHECK(cim.matrices[3].at(0, 1) == doctest::Approx(0.4));

    CHECK_THROWS_AS(gate_cim(g, GateOp::and_gate, {"P1", "P2"}), parameter_error);
}

TEST_CASE("noisy_or matches the competing-exponential oracle") {
    // First firing time of two independent causes with rates 0.1 and 0.3 is
    // exponential with the summed rate; check the empirical mean.
    std::mt19937_64 rng(5);
    auto exp_draw = [&](double rate) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return -std::log1p(-u) / rate;
    };
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::min(exp_draw(0.1), exp_draw(0.3));
    const double mean = sum / n;
    const double se = 2.5 / std::sqrt(n);
    CHECK(std::fabs(mean - 1.0 / 0.4) <= 3.0 * se);
}

TEST_CASE("noisy_or enumerates additively for up to six parents") {
    GateParams g;
    g.id = "O";
    g.mode = GateMode::noisy_or;
    g.mu = 0.25;
    std::vector<std::string> parents;
    std::vector<double> rates{0.1, 0.2, 0.4, 0.8, 1.6, 3.2};
    for (int i = 0; i < 6; ++i) {
        parents.push_back("P" + std::to_string(i));
        g.noisy_rates[parents.back()] = rates[i];
    }
    const auto cim = gate_cim(g, GateOp::or_gate, parents);
    for (std::size_t a = 1; a < 64; ++a) {
        double expected = 0.0;
        for (int i = 0; i < 6; ++i)
            if (a >> i & 1) expected += rates[i];
        CHECK(cim.matrices[a].at(0, 1) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("full mode reads one rate per assignment") {
    GateParams g;
    g.id = "A";
    g.mode = GateMode::full;
    g.full_rates = {{"P1=0,P2=0", 0.5}, {"P1=1,P2=0", 0.6}, {"P1=0,P2=1", 0.7}, {"P1=1,P2=1", 2.0}};
    const auto cim = gate_cim(g, GateOp::and_gate, {"P1", "P2"});
    CHECK(cim.matrices[0].at(1, 0) == 0.5);
    CHECK(cim.matrices[1].at(1, 0) == 0.6);
    CHECK(cim.matrices[2].at(1, 0) == 0.7);
    CHECK(cim.matrices[3].at(0, 1) == 2.0);

    g.full_rates.erase("P1=1,P2=0");
    CHECK_THROWS_AS(gate_cim(g, GateOp::and_gate, {"P1", "P2"}), data_error);
}

TEST_CASE("gate convergence to the gate function under frozen parents") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.05, 5.0);
    for (int trial = 0; trial < 40; ++trial) {
        GateParams g;
        g.id = "G";
        g.lambda = u(rng);
        g.mu = u(rng);
        const std::size_t k = 1 + rng() % 4;
        std::vector<std::string> parents;
        for (std::size_t i = 0; i < k; ++i) parents.push_back("P" + std::to_string(i));
        const GateOp op = rng() % 2 ? GateOp::and_gate : GateOp::or_gate;
        const auto cim = gate_cim(g, op, parents);
        const double t = 20.0 / std::min(g.lambda, g.mu);

        for (std::size_t a = 0; a < cim.matrices.size(); ++a) {
            const bool asserted =
                op == GateOp::and_gate ? a + 1 == cim.matrices.size() : a != 0;
            // Single frozen-parent chain: evolve the 2x2 matrix directly.
            CtbnModel m;
            m.variables.push_back({"G", {"0", "1"}, VariableKind::hazard});
            Cim c;
            c.owner = "G";
            c.matrices = {cim.matrices[a]};
            m.cims.emplace("G", std::move(c));
            m.initial.emplace("G", std::vector<double>{1.0, 0.0});
            const auto gen = amalgamate(m, {});
            for (int start = 0; start < 2; ++start) {
                std::vector<double> init{start == 0 ? 1.0 : 0.0, start == 0 ? 0.0 : 1.0};
                const auto dist = transient_distribution(gen, init, t);
                CHECK(std::fabs(dist[asserted ? 1 : 0] - 1.0) <= 1e-3);
            }
        }
    }
}

TEST_CASE("AND gate closed-form transient") {
    GateParams g;
    g.id = "G";
    g.lambda = 1.0;
    g.mu = 0.5;
    const auto cim = gate_cim(g, GateOp::and_gate, {"P1", "P2"});
    CtbnModel m;
    m.variables.push_back({"G", {"0", "1"}, VariableKind::hazard});
    Cim c;
    c.owner = "G";
    c.matrices = {cim.matrices[3]};
    m.cims.emplace("G", std::move(c));
    m.initial.emplace("G", std::vector<double>{1.0, 0.0});
    const auto dist = transient_distribution(amalgamate(m, {}), {1.0, 0.0}, 10.0);
    CHECK(std::fabs(dist[1] - 0.9999546) <= 1e-7);
}

TEST_CASE("build_hazard_model produces a valid CTBN") {
    const auto ft = parse_fault_tree(k_small_tree);
    std::vector<FaultReliability> rel{{"F1", "Power Source 1", 400, 3, 250},
                                      {"F2", "Power Source 2", 200, 3, 250}};
    GateParams g;
    g.id = "A";
    g.lambda = 0.5;
    g.mu = 0.25;
    const auto m = build_hazard_model(ft, rel, {g});
    CHECK(validate_model(m).empty());
    CHECK(m.variables.size() == 3);
    CHECK(m.cims.at("A").matrices.size() == 4);
    for (const auto& v : m.variables) CHECK(m.initial.at(v.id)[0] == 1.0);

    CHECK_THROWS_WITH_AS(build_hazard_model(ft, rel, {}), doctest::Contains("A"), data_error);
}

TEST_CASE("hazards may be absorbing by leaving mu at zero") {
    GateParams g;
    g.id = "A";
    g.lambda = 0.5;  // mu defaults to 0
    const auto cim = gate_cim(g, GateOp::or_gate, {"P1"});
    CHECK(cim.matrices[0].at(1, 0) == 0.0);
    CtbnModel m;
    m.variables.push_back({"A", {"0", "1"}, VariableKind::hazard});
    Cim c;
    c.owner = "A";
    c.matrices = {cim.matrices[1]};
    m.cims.emplace("A", std::move(c));
    m.initial.emplace("A", std::vector<double>{0.0, 1.0});
    const auto dist = transient_distribution(amalgamate(m, {}), {0.0, 1.0}, 1000.0);
    CHECK(dist[1] == doctest::Approx(1.0));  // stays asserted
}
