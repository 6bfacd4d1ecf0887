#pragma once

#include <cstdint>
#include <vector>

#include "phmkit/evidence.hpp"
#include "phmkit/joint.hpp"

namespace phmkit {

// init * exp(Q t) by uniformization; the Poisson series is truncated two-sided
// so the discarded mass is below `tol`. Output is renormalized.
std::vector<double> transient_distribution(const JointGenerator& gen, std::vector<double> init,
                                           double t, double tol = 1e-9);

struct ExactOptions {
    double tol = 1e-9;               // series truncation
    double occupancy_rel_tol = 1e-6; // integral error per unit horizon
};

// A time-integral functional evaluated along the filtered distribution:
// either sum_s w(s) P(s,t) dt for a fixed state weighting, or the expected
// rate of transitions that set `entry_var` to `entry_state` (with an optional
// gate on the surrounding state), integrated over time.
struct ExactFunctional {
    std::vector<double> weights;            // state weighting (size n_states), or empty
    bool entry = false;
    std::size_t entry_var = 0;              // position in gen.var_ids
    std::uint32_t entry_state = 0;
    std::vector<std::uint8_t> source_gate;  // optional, indexed by source state
};

struct ExactRunResult {
    std::vector<double> final_distribution;  // normalized; empty unless requested
    std::vector<double> integrals;           // one per functional
};

// Forward filtering over [0, t_end]. Point observations collapse the
// distribution; interval observations evolve it on the generator with
// transitions out of the consistent set removed (mass decay = conditioning on
// survival). Evidence must already be clipped to [0, t_end].
ExactRunResult exact_filtered_run(const JointGenerator& gen, const CtbnModel& model,
                                  std::vector<double> init, const Evidence& evidence,
                                  double t_end, const std::vector<ExactFunctional>& functionals,
                                  bool want_final, const ExactOptions& opts = {});

}  // namespace phmkit
