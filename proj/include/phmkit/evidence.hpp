#pragma once

#include <string>
#include <vector>

#include "phmkit/model.hpp"

namespace phmkit {

struct PointObservation {
    std::string var;
    std::string state;
    double t = 0.0;
};

// Variable observed in `state` throughout [t_start, t_end). The left endpoint
// is included (state paths are right-continuous), the right one is not, so
// back-to-back intervals with different states do not conflict.
struct IntervalObservation {
    std::string var;
    std::string state;
    double t_start = 0.0;
    double t_end = 0.0;
};

struct Evidence {
    std::vector<PointObservation> points;
    std::vector<IntervalObservation> intervals;

    bool empty() const { return points.empty() && intervals.empty(); }
    double max_time() const;

    // Items restricted to [0, horizon]; intervals are clipped, later items
    // dropped. Both inference engines condition on the clipped set.
    Evidence clipped(double horizon) const;

    // Structural checks plus name resolution against the model. Throws
    // evidence_error on bad times, unknown variables/states, observations on
    // decision variables, or two items pinning one variable to conflicting
    // states at the same time.
    void validate(const CtbnModel& model) const;
};

}  // namespace phmkit
