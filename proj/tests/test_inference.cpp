#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "phmkit/errors.hpp"
#include "phmkit/exact.hpp"
#include "phmkit/joint.hpp"
#include "phmkit/query.hpp"
#include "phmkit/sampler.hpp"

using namespace phmkit;
using phmkit::testing::add_root;
using phmkit::testing::binary_var;
using phmkit::testing::finish;

namespace {

CtbnModel single_fault(double lam, double mu) {
    CtbnModel m;
    add_root(m, "F", VariableKind::fault, lam, mu);
    return finish(m);
}

double closed_form_fail(double lam, double mu, double t) {
    return lam / (lam + mu) * (1.0 - std::exp(-(lam + mu) * t));
}

CtbnModel fault_with_test(double lam, double mu, double fa, double nd) {
    CtbnModel m;
    add_root(m, "F", VariableKind::fault, lam, mu);
    m.variables.push_back(binary_var("T", VariableKind::test));
    m.edges.insert({"F", "T"});
    Cim cim;
    cim.owner = "T";
    cim.parent_ids = {"F"};
    cim.matrices = {two_state_im(1.0 / (1.0 - fa), 1.0 / fa),
                    two_state_im(1.0 / nd, 1.0 / (1.0 - nd))};
    m.cims.emplace("T", std::move(cim));
    m.initial.emplace("T", std::vector<double>{1.0, 0.0});
    return finish(m);
}

}  // namespace

TEST_CASE("transient at t=0 returns the initial distribution") {
    const auto m = single_fault(0.01, 0.1);
    const auto gen = amalgamate(m, {});
    const auto d = transient_distribution(gen, {0.25, 0.75}, 0.0);
    CHECK(d[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("transient matches the two-state closed form") {
    const double lam = 5.5556e-4, mu = 8.3333e-2;
    const auto m = single_fault(lam, mu);
    const auto gen = amalgamate(m, {});
    const auto d = transient_distribution(gen, {1.0, 0.0}, 1800.0);
    CHECK(std::fabs(d[1] - 0.0066225) <= 1e-7);
    CHECK(std::fabs(d[1] - closed_form_fail(lam, mu, 1800.0)) <= 1e-9);
    CHECK(d[0] + d[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transient of independent faults factorizes") {
    CtbnModel m;
    add_root(m, "A", VariableKind::fault, 0.004, 0.09);
    add_root(m, "B", VariableKind::fault, 0.002, 0.25);
    m = finish(m);
    const auto gen = amalgamate(m, {});
    const double t = 37.0;
    const auto d = transient_distribution(gen, joint_initial_distribution(m, gen), t);
    const double pa = closed_form_fail(0.004, 0.09, t);
    const double pb = closed_form_fail(0.002, 0.25, t);
    CHECK(std::fabs(d[0] - (1 - pa) * (1 - pb)) <= 1e-9);
    CHECK(std::fabs(d[1] - pa * (1 - pb)) <= 1e-9);
    CHECK(std::fabs(d[2] - (1 - pa) * pb) <= 1e-9);
    CHECK(std::fabs(d[3] - pa * pb) <= 1e-9);
}

TEST_CASE("transient is stable under tolerance halving") {
    const auto m = single_fault(0.01, 0.3);
    const auto gen = amalgamate(m, {});
    const auto a = transient_distribution(gen, {1.0, 0.0}, 123.0, 1e-9);
    const auto b = transient_distribution(gen, {1.0, 0.0}, 123.0, 5e-10);
    CHECK(std::fabs(a[1] - b[1]) <= 1e-9);
}

TEST_CASE("frozen model produces an empty trajectory") {
    CtbnModel m;
    add_root(m, "F", VariableKind::fault, 0.0, 0.0);
    m = finish(m);
    const auto traj = sample_trajectory(m, {}, 1000.0, 1);
    CHECK(traj.transitions.empty());
}

TEST_CASE("trajectory sampling is deterministic in the seed") {
    const auto m = fault_with_test(0.01, 0.2, 0.05, 0.1);
    const auto a = sample_trajectory(m, {}, 500.0, 42);
    const auto b = sample_trajectory(m, {}, 500.0, 42);
    CHECK(a == b);
    const auto c = sample_trajectory(m, {}, 500.0, 43);
    CHECK(a != c);
}

TEST_CASE("mean first transition time matches the exponential rate") {
    const auto m = single_fault(0.01, 0.0);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto traj = sample_trajectory(m, {}, 1e6, static_cast<std::uint64_t>(i));
        REQUIRE(!traj.transitions.empty());
        sum += traj.transitions.front().t;
    }
    const double mean = sum / n;
    CHECK(std::fabs(mean - 100.0) <= 3.0);  // 3 standard errors at se = 1
}

TEST_CASE("query with no evidence matches the transient marginal") {
    const auto m = fault_with_test(0.01, 0.2, 0.05, 0.1);
    const auto gen = amalgamate(m, {});
    const double t = 77.0;
    const auto d = transient_distribution(gen, joint_initial_distribution(m, gen), t);
    const std::size_t fpos = gen.var_position("F");
    double marginal = 0.0;
    for (std::size_t s = 0; s < gen.n_states; ++s)
        if (gen.digit(s, fpos) == 1) marginal += d[s];

    QueryOptions opts;
    opts.engine = Engine::exact;
    const auto r = query_state_probability(m, {}, {}, "F", "1", t, opts);
    CHECK(std::fabs(r.value - marginal) <= 1e-12);
    CHECK(r.std_error == 0.0);
    CHECK(r.engine == "exact");
}

TEST_CASE("a failing test raises the fault posterior") {
    const auto m = fault_with_test(0.001, 0.05, 0.05, 0.1);
    QueryOptions opts;
    opts.engine = Engine::exact;
    const auto prior = query_state_probability(m, {}, {}, "F", "1", 100.0, opts);

    Evidence ev;
    ev.intervals.push_back({"T", "1", 100.0, 101.0});
    const auto posterior = query_state_probability(m, {}, ev, "F", "1", 100.0, opts);
    CHECK(posterior.value > prior.value);
}

TEST_CASE("point evidence conditions both engines the same way") {
    const auto m = fault_with_test(0.01, 0.1, 0.05, 0.1);
    Evidence ev;
    ev.points.push_back({"T", "1", 50.0});

    QueryOptions exact_opts;
    exact_opts.engine = Engine::exact;
    const auto ex = query_state_probability(m, {}, ev, "F", "1", 60.0, exact_opts);

    QueryOptions mc_opts;
    mc_opts.engine = Engine::mc;
    mc_opts.mc_samples = 100000;
    mc_opts.seed = 42;
    const auto mc = query_state_probability(m, {}, ev, "F", "1", 60.0, mc_opts);
    CHECK(std::fabs(ex.value - mc.value) <= std::max(3.0 * mc.std_error, 0.01));
}

TEST_CASE("MC agrees with exact on a three-fault two-test model") {
    CtbnModel m;
    add_root(m, "F1", VariableKind::fault, 0.002, 0.08);
    add_root(m, "F2", VariableKind::fault, 0.004, 0.05);
    add_root(m, "F3", VariableKind::fault, 0.001, 0.0);
    for (const char* test_id : {"T1", "T2"}) {
        m.variables.push_back(binary_var(test_id, VariableKind::test));
        m.initial.emplace(test_id, std::vector<double>{1.0, 0.0});
    }
    m.edges.insert({"F1", "T1"});
    m.edges.insert({"F2", "T1"});
    m.edges.insert({"F2", "T2"});
    m.edges.insert({"F3", "T2"});
    const auto healthy = two_state_im(1.0 / 0.95, 20.0);
    const auto faulty = two_state_im(10.0, 1.0 / 0.9);
    for (const char* test_id : {"T1", "T2"}) {
        Cim cim;
        cim.owner = test_id;
        cim.parent_ids = test_id == std::string("T1") ? std::vector<std::string>{"F1", "F2"}
                                                      : std::vector<std::string>{"F2", "F3"};
        cim.matrices = {healthy, faulty, faulty, faulty};
        m.cims.emplace(test_id, std::move(cim));
    }
    m = finish(m);
    REQUIRE(validate_model(m).empty());

    QueryOptions exact_opts;
    exact_opts.engine = Engine::exact;
    QueryOptions mc_opts;
    mc_opts.engine = Engine::mc;
    mc_opts.mc_samples = 100000;
    mc_opts.seed = 42;
    for (const char* var : {"F1", "F2", "F3", "T1"}) {
        const auto ex = query_state_probability(m, {}, {}, var, "1", 500.0, exact_opts);
        const auto mc = query_state_probability(m, {}, {}, var, "1", 500.0, mc_opts);
        CAPTURE(var);
        CHECK(std::fabs(ex.value - mc.value) <= std::max(3.0 * mc.std_error, 0.01));
    }
}

TEST_CASE("rejection sampling accepts everything without evidence") {
    const auto m = single_fault(0.01, 0.1);
    const auto est = mc_state_probability(m, {}, {}, "F", "1", 200.0, 5000, 42);
    CHECK(est.n_accepted == est.n_sampled);
}

TEST_CASE("occupancy of a frozen state covers the whole horizon") {
    CtbnModel m;
    add_root(m, "F", VariableKind::fault, 0.0, 0.0);
    m = finish(m);
    QueryOptions opts;
    opts.engine = Engine::exact;
    const auto r = expected_occupancy(m, {}, {}, {{"F", "0"}}, 321.0, opts);
    CHECK(r.value == doctest::Approx(321.0).epsilon(1e-12));
}

TEST_CASE("occupancy matches the closed-form integral") {
    const auto m = single_fault(0.001, 0.0);
    QueryOptions opts;
    opts.engine = Engine::exact;
    const auto r = expected_occupancy(m, {}, {}, {{"F", "0"}}, 500.0, opts);
    CHECK(std::fabs(r.value - 393.46934) <= 1e-3);

    QueryOptions mc_opts;
    mc_opts.engine = Engine::mc;
    mc_opts.mc_samples = 100000;
    mc_opts.seed = 42;
    const auto mc = expected_occupancy(m, {}, {}, {{"F", "0"}}, 500.0, mc_opts);
    CHECK(std::fabs(mc.value - 393.46934) <= 3.0 * mc.std_error);
}

TEST_CASE("inconsistent evidence is rejected upfront") {
    const auto m = fault_with_test(0.01, 0.1, 0.05, 0.1);
    Evidence ev;
    ev.points.push_back({"T", "1", 50.0});
    ev.intervals.push_back({"T", "0", 40.0, 60.0});
    CHECK_THROWS_AS(query_state_probability(m, {}, ev, "F", "1", 100.0, {}), evidence_error);
}
