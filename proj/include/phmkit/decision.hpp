#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phmkit/model.hpp"

namespace phmkit {

// Replacement behavior of one child under one decision state: either a
// multiplicative factor on the failure-direction rates of the original
// matrices, or a full CIM over a (possibly reduced) parent set.
struct CimOverride {
    std::optional<double> scale_lambda;
    std::optional<Cim> replacement;
};

struct DecisionOverride {
    std::string child;
    std::map<std::string, CimOverride> per_state;  // states absent here keep the original matrices
};

struct EdgeMaskSpec {
    std::string state;
    std::string parent;
    std::string child;
};

struct DecisionSpec {
    std::string id;
    std::vector<std::string> states;  // >= 2; the first state conventionally keeps original behavior
    std::vector<DecisionOverride> overrides;
    std::vector<EdgeMaskSpec> edge_masks;
};

using ScenarioAssignment = std::map<std::string, std::string>;

// Union of a diagnostic and a hazard model that share their fault set. Fault
// vertices must carry identical CIMs and initial distributions; test/hazard
// ids must not collide.
CtbnModel merge_models(const CtbnModel& diagnostic, const CtbnModel& hazard);

// Adds a parentless decision variable and re-indexes each affected child's
// CIM over (decision state x original assignment). States without an
// override reuse the original matrices unchanged. Masked states must supply
// a replacement CIM over the reduced parent set; it is duplicated across the
// severed parent's states.
CtbnModel attach_decision(const CtbnModel& model, const DecisionSpec& spec);

// Slices every CIM at the assigned decision states and removes the decision
// vertices; masked edges disappear from the effective graph. Inference on the
// result matches inference on the full model with the decisions clamped.
CtbnModel bind_scenario(const CtbnModel& model, const ScenarioAssignment& assignment);

// Multiplies rates toward higher state indexes by `factor` and rebuilds the
// diagonal.
IntensityMatrix scale_failure_rates(const IntensityMatrix& m, double factor);

}  // namespace phmkit
