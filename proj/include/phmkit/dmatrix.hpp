#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phmkit/model.hpp"

namespace phmkit {

// Fault x test dependency matrix; entry 1 means the test monitors the fault.
struct DMatrix {
    std::vector<std::string> fault_ids;  // rows
    std::vector<std::string> test_ids;   // columns
    std::vector<std::uint8_t> d;         // row-major
    std::vector<std::string> warnings;   // isolated faults/tests

    std::uint8_t at(std::size_t fault, std::size_t test) const {
        return d[fault * test_ids.size() + test];
    }
};

struct FaultReliability {
    std::string id;
    std::string name;
    double mtbf = 0.0;        // hours, > 0
    double mttr = 0.0;        // hours; 0 means no repair (absorbing failure)
    double repair_cost = 0.0;
};

struct PairParams {
    double fa = 0.0;
    double nd = 0.0;
};

struct TestParams {
    std::string id;
    double fa = 0.0;
    double nd = 0.0;
    std::map<std::string, PairParams> per_pair;  // fault id -> pair-specific values
};

enum class TestCimMode { simplified, per_pair };

// CSV with a header row of test ids; first column holds fault ids, cells 0/1.
DMatrix parse_dmatrix(const std::string& csv_text);

// CSV with header id,name,mtbf,mttr,repair_cost.
std::vector<FaultReliability> parse_reliability_csv(const std::string& csv_text);

// JSON array [{id, fa, nd, per_pair:{faultId:{fa,nd}}}].
std::vector<TestParams> parse_test_params_json(const std::string& json_text);

// m fault vertices, n test vertices, an edge per 1-entry; no CIMs yet.
CtbnModel derive_dmatrix_structure(const DMatrix& d);

Cim fault_cim(const FaultReliability& r);

// The two-level line-failure combination for P(test passes | parent faults):
// the inner product is the chance the per-pair checks report all-clear, the
// outer mix applies the test-level ND/FA exactly as conventionally written,
// i.e. P(T=0|F) = ND * P(all-clear) + (1-FA) * (1 - P(all-clear)). Note the
// all-clear branch is weighted by ND; see the docs for why this reads oddly.
// `parent_states` maps fault id -> state index (0 healthy, 1 failed); missing
// per-pair entries default to zero.
double test_pass_probability(const TestParams& p,
                             const std::map<std::string, int>& parent_states);

// Dwell-based test parameterization. In simplified mode the no-fault
// assignment uses rates 1/(1-FA), 1/FA and every faulty assignment 1/ND,
// 1/(1-ND), which makes the stationary fail probability FA resp. 1-ND.
// In per_pair mode each assignment's rates come from the all-clear-weighted
// pass/fail split ((1-FA)*P(all-clear) + ND*(1-P(all-clear)) and its
// complement), clamped to [1e-6, 1-1e-6]; with all pair values zero this
// reproduces the simplified matrices bit for bit.
Cim test_cim(const TestParams& p, const std::vector<std::string>& parents, TestCimMode mode);

CtbnModel build_diagnostic_model(const DMatrix& d,
                                 const std::vector<FaultReliability>& reliability,
                                 const std::vector<TestParams>& tests, TestCimMode mode);

}  // namespace phmkit
