#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace phmkit {

// Generator of a finite-state Markov chain. Off-diagonal entries are
// transition rates per hour; each diagonal entry is the negative sum of the
// rest of its row.
struct IntensityMatrix {
    std::size_t dim = 0;
    std::vector<double> entries;  // row-major dim*dim

    IntensityMatrix() = default;
    explicit IntensityMatrix(std::size_t k) : dim(k), entries(k * k, 0.0) {}

    double at(std::size_t i, std::size_t j) const { return entries[i * dim + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * dim + j]; }

    bool operator==(const IntensityMatrix&) const = default;
};

// [[-a, a], [b, -b]]
IntensityMatrix two_state_im(double rate_0to1, double rate_1to0);

// Collects human-readable reasons why `im` is not a valid intensity matrix.
// Row sums are checked against 1e-9 * max|entry|.
std::vector<std::string> intensity_matrix_issues(const IntensityMatrix& im);

// Solves pi Q = 0, sum(pi) = 1. Requires exactly one closed communicating
// class; an absorbing chain yields the indicator of its absorbing state.
// Throws numeric_error("no unique stationary distribution") otherwise.
std::vector<double> stationary_distribution(const IntensityMatrix& im);

}  // namespace phmkit
