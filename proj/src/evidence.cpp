#include "phmkit/evidence.hpp"

#include <algorithm>
#include <cmath>

#include "phmkit/errors.hpp"

namespace phmkit {

double Evidence::max_time() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.t);
    for (const auto& iv : intervals) m = std::max(m, iv.t_end);
    return m;
}

Evidence Evidence::clipped(double horizon) const {
    Evidence out;
    for (const auto& p : points)
        if (p.t <= horizon) out.points.push_back(p);
    for (const auto& iv : intervals) {
        if (iv.t_start > horizon) continue;
        IntervalObservation c = iv;
        c.t_end = std::min(c.t_end, horizon);
        if (c.t_end > c.t_start)
            out.intervals.push_back(c);
        else
            out.points.push_back({c.var, c.state, c.t_start});
    }
    return out;
}

namespace {

struct Span {
    double a, b;  // [a, b); b == a encodes a point
    const std::string* state;
};

}  // namespace

void Evidence::validate(const CtbnModel& model) const {
    for (const auto& p : points) {
        if (!(p.t >= 0.0) || !std::isfinite(p.t))
            throw evidence_error("point observation on " + p.var + " has invalid time");
        const Variable& v = model.variable(p.var);
        if (v.kind == VariableKind::decision)
            throw evidence_error("evidence on decision variable " + p.var +
                                 "; decisions are fixed by the scenario assignment");
        model.state_index(p.var, p.state);
    }
    for (const auto& iv : intervals) {
        if (!(iv.t_start >= 0.0) || !std::isfinite(iv.t_start) || !std::isfinite(iv.t_end) ||
            !(iv.t_start < iv.t_end))
            throw evidence_error("interval observation on " + iv.var +
                                 " must satisfy 0 <= t_start < t_end");
        const Variable& v = model.variable(iv.var);
        if (v.kind == VariableKind::decision)
            throw evidence_error("evidence on decision variable " + iv.var +
                                 "; decisions are fixed by the scenario assignment");
        model.state_index(iv.var, iv.state);
    }

    // Conflicts: same variable pinned to different states at one instant.
    std::map<std::string, std::vector<Span>> by_var;
    for (const auto& p : points) by_var[p.var].push_back({p.t, p.t, &p.state});
    for (const auto& iv : intervals) by_var[iv.var].push_back({iv.t_start, iv.t_end, &iv.state});
    for (auto& [var, spans] : by_var) {
        for (std::size_t i = 0; i < spans.size(); ++i) {
            for (std::size_t j = i + 1; j < spans.size(); ++j) {
                const Span& x = spans[i];
                const Span& y = spans[j];
                if (*x.state == *y.state) continue;
                const bool x_point = x.a == x.b;
                const bool y_point = y.a == y.b;
                bool overlap;
                if (x_point && y_point)
                    overlap = x.a == y.a;
                else if (x_point)
                    overlap = x.a >= y.a && x.a < y.b;
                else if (y_point)
                    overlap = y.a >= x.a && y.a < x.b;
                else
                    overlap = x.a < y.b && y.a < x.b;
                if (overlap)
                    throw evidence_error("conflicting evidence on " + var + " around t=" +
                                         std::to_string(std::max(x.a, y.a)));
            }
        }
    }
}

}  // namespace phmkit
