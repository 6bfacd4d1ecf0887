#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phmkit/model.hpp"

namespace phmkit {

inline constexpr std::size_t default_state_cap = std::size_t(1) << 20;

// Joint-chain generator over all non-decision variables. Joint states are
// indexed mixed-radix little-endian over the variables sorted by id (the
// first variable is the least significant digit). The rate matrix is stored
// CSR with diagonal entries included.
struct JointGenerator {
    std::vector<std::string> var_ids;      // sorted, non-decision
    std::vector<std::uint32_t> radices;    // state counts per variable
    std::vector<std::size_t> strides;      // little-endian strides
    std::size_t n_states = 0;

    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    std::size_t var_position(const std::string& id) const;  // throws data_error
    std::uint32_t digit(std::size_t state, std::size_t var_pos) const {
        return static_cast<std::uint32_t>(state / strides[var_pos] % radices[var_pos]);
    }
    std::size_t index_of(const std::vector<std::uint32_t>& digits) const;

    double max_exit_rate() const;  // max |diagonal|
};

// Expands the CTBN into its joint generator. Decision variables must all be
// assigned (id -> state name); they select CIM slices and are excluded from
// the joint space. Throws capacity_error when the product of state counts
// exceeds `cap`.
JointGenerator amalgamate(const CtbnModel& model,
                          const std::map<std::string, std::string>& decision_assignment,
                          std::size_t cap = default_state_cap);

// Product of non-decision state counts without building anything.
std::size_t joint_state_count(const CtbnModel& model);

// Joint initial distribution (product of per-variable initials) aligned with
// the generator's indexing.
std::vector<double> joint_initial_distribution(const CtbnModel& model, const JointGenerator& gen);

}  // namespace phmkit
