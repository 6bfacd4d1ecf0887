#pragma once

#include <map>
#include <string>

#include "phmkit/model.hpp"

namespace phmkit {

// Bundled ground-vehicle example: 14 subsystems with reliability data, six
// built-in tests, a seven-hazard tree, three decisions (operating mode, axle
// design, power-source redundancy) and the matching performance functions
// and objectives. The hazard-tree wiring is an illustrative assumption
// shipped as data so users can replace it.
std::map<std::string, std::string> vehicle_example_files();

// The same bundle assembled in memory: derive both models from the bundled
// text, merge them and attach the three decisions.
CtbnModel build_vehicle_model();

}  // namespace phmkit
