#pragma once

#include <stdexcept>
#include <string>

namespace phmkit {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad numeric or structural input to a constructor-style operation.
struct parameter_error : error {
    using error::error;
};

// Malformed input file (CSV/JSON); message carries location where known.
struct parse_error : error {
    using error::error;
};

// Requested joint state space exceeds the configured cap.
struct capacity_error : error {
    using error::error;
};

// Inconsistent or unusable observation set.
struct evidence_error : error {
    using error::error;
};

struct merge_error : error {
    using error::error;
};

// Decision spec does not fit the model it is attached to.
struct decision_spec_error : error {
    using error::error;
};

// Scenario assignment incomplete or unknown.
struct binding_error : error {
    using error::error;
};

// Missing objective values, unparameterized nodes and similar data gaps.
struct data_error : error {
    using error::error;
};

struct numeric_error : error {
    using error::error;
};

}  // namespace phmkit
