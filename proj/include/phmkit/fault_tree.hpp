#pragma once

#include <map>
#include <string>
#include <vector>

#include "phmkit/dmatrix.hpp"
#include "phmkit/model.hpp"

namespace phmkit {

enum class GateOp { and_gate, or_gate };

struct FaultTreeNode {
    bool is_gate = false;
    GateOp op = GateOp::or_gate;
    std::vector<std::string> children;  // gate inputs; empty for faults
};

// DAG of fault leaves and AND/OR gates. Shared subtrees are expressed by
// referencing the same node id from several gates.
struct FaultTree {
    std::map<std::string, FaultTreeNode> nodes;
    std::string top;
    std::vector<std::string> warnings;  // nodes that cannot reach the top
};

enum class GateMode { simplified, full, noisy_or };

struct GateParams {
    std::string id;
    GateMode mode = GateMode::simplified;
    double lambda = 0.0;  // rate toward the gate's asserted output
    double mu = 0.0;      // rate back when the gate condition clears; 0 = absorbing
    std::map<std::string, double> noisy_rates;  // parent id -> rate (OR gates)
    std::map<std::string, double> full_rates;   // assignment key -> rate
};

// JSON: {"nodes":{id:{"kind":"fault"|"gate","gate_op":"and"|"or","children":[...]}},"top":id}.
// Rejects cycles, childless gates, unknown gate ops and dangling references.
FaultTree parse_fault_tree(const std::string& json_text);

// Duplicate children within a gate collapse to one reference; shared fault
// ids already denote a single node. Gate Boolean semantics are unchanged.
FaultTree prune_fault_tree(const FaultTree& ft);

// Evaluates every node for a leaf assignment (fault id -> 0/1).
std::map<std::string, int> evaluate_fault_tree(const FaultTree& ft,
                                               const std::map<std::string, int>& leaves);

// One binary variable per fault and gate, an edge from each gate input to the
// gate; no CIMs.
CtbnModel derive_fault_tree_structure(const FaultTree& ft);

// AND: the all-ones assignment ramps to 1 at lambda and pins state 1; any
// other assignment decays to 0 at mu and pins state 0. OR mirrors that with
// the all-zeros assignment pinned at 0. noisy_or sums the per-parent rates of
// the active parents; full mode reads a rate per assignment.
Cim gate_cim(const GateParams& g, GateOp op, const std::vector<std::string>& parents);

std::vector<GateParams> parse_gate_params(const std::string& json_text);

CtbnModel build_hazard_model(const FaultTree& ft,
                             const std::vector<FaultReliability>& fault_reliability,
                             const std::vector<GateParams>& gate_params);

}  // namespace phmkit
