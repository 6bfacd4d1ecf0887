#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "phmkit/matrix.hpp"

namespace phmkit {

enum class VariableKind { fault, test, hazard, decision };

std::string to_string(VariableKind kind);
VariableKind variable_kind_from_string(const std::string& s);

struct Variable {
    std::string id;
    std::vector<std::string> states;  // >= 2, names unique within the variable
    VariableKind kind = VariableKind::fault;

    bool operator==(const Variable&) const = default;
};

// Conditional intensity matrix set for one variable: one IntensityMatrix per
// full assignment of the parents. Parents are kept sorted by id and
// assignments are indexed mixed-radix little-endian in that order (first
// parent varies fastest), which also fixes the JSON key order.
struct Cim {
    std::string owner;
    std::vector<std::string> parent_ids;  // sorted
    std::vector<IntensityMatrix> matrices;

    bool operator==(const Cim&) const = default;
};

// Declares that under decision state `state` the edge parent->child is
// inactive; the child's matrices for that state ignore the parent.
struct EdgeMask {
    std::string decision;
    std::string state;
    std::string parent;
    std::string child;

    auto operator<=>(const EdgeMask&) const = default;
};

struct CtbnModel {
    std::vector<Variable> variables;  // sorted by id
    std::set<std::pair<std::string, std::string>> edges;  // (parent, child)
    std::map<std::string, Cim> cims;
    std::map<std::string, std::vector<double>> initial;
    std::vector<EdgeMask> edge_masks;

    const Variable* find_variable(const std::string& id) const;
    const Variable& variable(const std::string& id) const;  // throws data_error
    std::size_t state_count(const std::string& id) const;
    // Index of a named state within a variable; throws data_error if unknown.
    std::size_t state_index(const std::string& var, const std::string& state) const;
    std::vector<std::string> parents_of(const std::string& id) const;  // sorted
    std::vector<std::string> children_of(const std::string& id) const;

    // Keeps `variables` sorted; call after ad-hoc edits.
    void canonicalize();

    bool operator==(const CtbnModel&) const = default;
};

struct Violation {
    std::string variable;  // id, or "<model>" for model-level issues
    std::string description;
};

std::vector<Violation> validate_model(const CtbnModel& model);

// Index into cim.matrices for given parent states (little-endian over the
// sorted parent list). `parent_state` maps parent id -> state index.
std::size_t cim_assignment_index(const CtbnModel& model, const Cim& cim,
                                 const std::map<std::string, std::size_t>& parent_state);
std::size_t cim_matrix_count(const CtbnModel& model, const Cim& cim);

// "p1=s1,p2=s2" in sorted parent order; "" for a parentless variable.
std::string assignment_key(const CtbnModel& model, const Cim& cim, std::size_t index);
// Digits of assignment `index` aligned with cim.parent_ids.
std::vector<std::size_t> assignment_digits(const CtbnModel& model, const Cim& cim,
                                           std::size_t index);

// Smallest sub-model closed under "parent of" that contains `targets`.
// Decision parents are kept. Everything else (barren descendants) is dropped;
// query marginals on the kept variables are unchanged.
CtbnModel restrict_to_ancestors(const CtbnModel& model, const std::vector<std::string>& targets);

}  // namespace phmkit
