#pragma once

#include <map>
#include <string>
#include <vector>

#include "phmkit/model.hpp"

namespace phmkit::testing {

// Binary variable with the toolkit's state convention.
inline Variable binary_var(const std::string& id, VariableKind kind) {
    return Variable{id, {"0", "1"}, kind};
}

// Parentless two-state variable wired into a model under construction.
inline void add_root(CtbnModel& m, const std::string& id, VariableKind kind, double rate_up,
                     double rate_down, std::vector<double> initial = {1.0, 0.0}) {
    m.variables.push_back(binary_var(id, kind));
    Cim cim;
    cim.owner = id;
    cim.matrices.push_back(two_state_im(rate_up, rate_down));
    m.cims.emplace(id, std::move(cim));
    m.initial.emplace(id, std::move(initial));
}

inline CtbnModel finish(CtbnModel m) {
    m.canonicalize();
    return m;
}

}  // namespace phmkit::testing
