#include "phmkit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "phmkit/errors.hpp"

namespace phmkit {

std::uint32_t Trajectory::state_at(std::size_t var_pos, double t) const {
    std::uint32_t s = initial_states[var_pos];
    for (const auto& rec : transitions) {
        if (rec.t > t) break;
        if (rec.var == var_pos) s = rec.new_state;
    }
    return s;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
};

struct SimVariable {
    std::uint32_t n_states = 0;
    const Cim* cim = nullptr;
    // Parent digits that live in the simulation state, with matching strides
    // into the cim's matrix list; decision parents contribute a fixed offset.
    std::vector<std::pair<std::uint32_t, std::size_t>> parent_terms;
    std::size_t fixed_offset = 0;
    std::vector<std::uint32_t> children;  // positions needing a re-clock
    const std::vector<double>* initial = nullptr;
};

struct SimModel {
    std::vector<std::string> var_ids;
    std::vector<SimVariable> vars;

    const IntensityMatrix& matrix(std::size_t vi, const std::vector<std::uint32_t>& states) const {
        const SimVariable& v = vars[vi];
        std::size_t idx = v.fixed_offset;
        for (const auto& [pos, stride] : v.parent_terms) idx += states[pos] * stride;
        return v.cim->matrices[idx];
    }
};

SimModel compile_model(const CtbnModel& model,
                       const std::map<std::string, std::string>& decision_assignment) {
    SimModel sim;
    for (const Variable& v : model.variables)
        if (v.kind != VariableKind::decision) sim.var_ids.push_back(v.id);

    auto position = [&](const std::string& id) -> std::size_t {
        auto it = std::lower_bound(sim.var_ids.begin(), sim.var_ids.end(), id);
        return static_cast<std::size_t>(it - sim.var_ids.begin());
    };

    sim.vars.resize(sim.var_ids.size());
    for (std::size_t vi = 0; vi < sim.var_ids.size(); ++vi) {
        const std::string& id = sim.var_ids[vi];
        SimVariable& sv = sim.vars[vi];
        const Variable& v = model.variable(id);
        sv.n_states = static_cast<std::uint32_t>(v.states.size());
        auto cit = model.cims.find(id);
        if (cit == model.cims.end()) throw data_error("missing CIM for " + id);
        sv.cim = &cit->second;
        auto iit = model.initial.find(id);
        if (iit == model.initial.end()) throw data_error("missing initial for " + id);
        sv.initial = &iit->second;

        std::size_t stride = 1;
        for (const auto& pid : sv.cim->parent_ids) {
            const Variable& pv = model.variable(pid);
            if (pv.kind == VariableKind::decision) {
                auto ait = decision_assignment.find(pid);
                if (ait == decision_assignment.end())
                    throw binding_error("decision variable " + pid + " is not assigned");
                sv.fixed_offset += model.state_index(pid, ait->second) * stride;
            } else {
                sv.parent_terms.emplace_back(static_cast<std::uint32_t>(position(pid)), stride);
            }
            stride *= pv.states.size();
        }
        if (sv.cim->matrices.size() != stride) throw data_error("CIM for " + id + " is incomplete");
    }
    for (const auto& [p, c] : model.edges) {
        const Variable& pv = model.variable(p);
        if (pv.kind == VariableKind::decision) continue;
        sim.vars[position(p)].children.push_back(static_cast<std::uint32_t>(position(c)));
    }
    for (auto& sv : sim.vars) std::sort(sv.children.begin(), sv.children.end());
    return sim;
}

constexpr double k_never = std::numeric_limits<double>::infinity();

void simulate(const SimModel& sim, double horizon, Rng& rng, Trajectory& out) {
    const std::size_t nv = sim.vars.size();
    out.transitions.clear();
    out.initial_states.resize(nv);
    out.horizon = horizon;

    std::vector<std::uint32_t> states(nv);
    for (std::size_t vi = 0; vi < nv; ++vi) {
        const auto& dist = *sim.vars[vi].initial;
        double u = rng.uniform(), acc = 0.0;
        std::uint32_t s = 0;
        for (std::uint32_t k = 0; k < sim.vars[vi].n_states; ++k) {
            acc += dist[k];
            if (u < acc) {
                s = k;
                break;
            }
            s = k;  // saturate on rounding
        }
        states[vi] = s;
        out.initial_states[vi] = s;
    }

    std::vector<double> clocks(nv);
    auto reclock = [&](std::size_t vi, double now) {
        const IntensityMatrix& m = sim.matrix(vi, states);
        const double exit = -m.at(states[vi], states[vi]);
        clocks[vi] = exit > 0.0 ? now + rng.exponential(exit) : k_never;
    };
    for (std::size_t vi = 0; vi < nv; ++vi) reclock(vi, 0.0);

    while (true) {
        std::size_t next = 0;
        for (std::size_t vi = 1; vi < nv; ++vi)
            if (clocks[vi] < clocks[next]) next = vi;
        const double t = clocks[next];
        if (!(t <= horizon)) break;

        const IntensityMatrix& m = sim.matrix(next, states);
        const std::uint32_t x = states[next];
        const double exit = -m.at(x, x);
        double u = rng.uniform() * exit, acc = 0.0;
        std::uint32_t x2 = x;
        for (std::uint32_t k = 0; k < sim.vars[next].n_states; ++k) {
            if (k == x) continue;
            acc += m.at(x, k);
            x2 = k;
            if (u < acc) break;
        }
        states[next] = x2;
        out.transitions.push_back({t, static_cast<std::uint32_t>(next), x2});

        reclock(next, t);
        for (std::uint32_t child : sim.vars[next].children)
            if (child != next) reclock(child, t);
    }
}

struct ResolvedPoint {
    std::uint32_t var, state;
    double t;
};
struct ResolvedInterval {
    std::uint32_t var, state;
    double a, b;
};

struct ResolvedEvidenceSet {
    std::vector<ResolvedPoint> points;
    std::vector<ResolvedInterval> intervals;
};

ResolvedEvidenceSet resolve(const CtbnModel& model, const SimModel& sim, const Evidence& ev) {
    ResolvedEvidenceSet out;
    auto pos = [&](const std::string& id) {
        auto it = std::lower_bound(sim.var_ids.begin(), sim.var_ids.end(), id);
        if (it == sim.var_ids.end() || *it != id)
            throw evidence_error("evidence on variable outside the model: " + id);
        return static_cast<std::uint32_t>(it - sim.var_ids.begin());
    };
    for (const auto& p : ev.points)
        out.points.push_back(
            {pos(p.var), static_cast<std::uint32_t>(model.state_index(p.var, p.state)), p.t});
    for (const auto& iv : ev.intervals)
        out.intervals.push_back({pos(iv.var),
                                 static_cast<std::uint32_t>(model.state_index(iv.var, iv.state)),
                                 iv.t_start, iv.t_end});
    return out;
}

bool accepts(const Trajectory& traj, const ResolvedEvidenceSet& ev) {
    for (const auto& p : ev.points)
        if (traj.state_at(p.var, p.t) != p.state) return false;
    for (const auto& iv : ev.intervals) {
        if (traj.state_at(iv.var, iv.a) != iv.state) return false;
        for (const auto& rec : traj.transitions) {
            if (rec.t >= iv.b) break;
            if (rec.t > iv.a && rec.var == iv.var) return false;
        }
    }
    return true;
}

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

Trajectory sample_trajectory(const CtbnModel& model,
                             const std::map<std::string, std::string>& decision_assignment,
                             double horizon, std::uint64_t seed) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw parameter_error("horizon must be positive");
    const SimModel sim = compile_model(model, decision_assignment);
    Trajectory out;
    out.var_ids = sim.var_ids;
    Rng rng(seed);
    simulate(sim, horizon, rng, out);
    return out;
}

McEstimate mc_state_probability(const CtbnModel& model,
                                const std::map<std::string, std::string>& decisions,
                                const Evidence& evidence, const std::string& var,
                                const std::string& state, double t, std::uint64_t samples,
                                std::uint64_t master_seed) {
    const SimModel sim = compile_model(model, decisions);
    const Evidence clipped = evidence.clipped(t);
    const ResolvedEvidenceSet ev = resolve(model, sim, clipped);
    auto vit = std::lower_bound(sim.var_ids.begin(), sim.var_ids.end(), var);
    if (vit == sim.var_ids.end() || *vit != var) throw data_error("unknown query variable " + var);
    const std::uint32_t var_pos = static_cast<std::uint32_t>(vit - sim.var_ids.begin());
    const std::uint32_t target = static_cast<std::uint32_t>(model.state_index(var, state));

    const double horizon = std::max(t, 1e-12);
    Trajectory traj;
    traj.var_ids = sim.var_ids;
    std::uint64_t accepted = 0, hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        Rng rng(trajectory_seed(master_seed, i));
        simulate(sim, horizon, rng, traj);
        if (!accepts(traj, ev)) continue;
        ++accepted;
        if (traj.state_at(var_pos, t) == target) ++hits;
    }
    if (accepted == 0)
        throw evidence_error("evidence too unlikely for rejection sampling");
    McEstimate est;
    est.n_accepted = accepted;
    est.n_sampled = samples;
    est.value = static_cast<double>(hits) / static_cast<double>(accepted);
    est.std_error = std::sqrt(std::max(0.0, est.value * (1.0 - est.value)) /
                              static_cast<double>(accepted));
    return est;
}

McEstimate mc_performance(const CtbnModel& model,
                          const std::map<std::string, std::string>& decisions,
                          const Evidence& evidence, const McPerformanceSpec& spec, double horizon,
                          std::uint64_t samples, std::uint64_t master_seed) {
    if (!(horizon > 0.0)) throw parameter_error("horizon must be positive");
    const SimModel sim = compile_model(model, decisions);
    const Evidence clipped = evidence.clipped(horizon);
    const ResolvedEvidenceSet ev = resolve(model, sim, clipped);

    auto pos = [&](const std::string& id) {
        auto it = std::lower_bound(sim.var_ids.begin(), sim.var_ids.end(), id);
        if (it == sim.var_ids.end() || *it != id) throw data_error("unknown variable " + id);
        return static_cast<std::uint32_t>(it - sim.var_ids.begin());
    };
    struct RClause {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> lits;
        double rate;
    };
    struct RImpulse {
        std::uint32_t var, state;
        double value;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> conds;
    };
    std::vector<RClause> clauses;
    for (const auto& c : spec.clauses) {
        RClause rc;
        rc.rate = c.rate;
        for (const auto& [v, s] : c.literals)
            rc.lits.emplace_back(pos(v), static_cast<std::uint32_t>(model.state_index(v, s)));
        clauses.push_back(std::move(rc));
    }
    std::vector<RImpulse> impulses;
    for (const auto& im : spec.impulses) {
        RImpulse ri;
        ri.var = pos(im.var);
        ri.state = static_cast<std::uint32_t>(model.state_index(im.var, im.state));
        ri.value = im.value;
        for (const auto& [v, s] : im.conditions)
            ri.conds.emplace_back(pos(v), static_cast<std::uint32_t>(model.state_index(v, s)));
        impulses.push_back(std::move(ri));
    }

    Trajectory traj;
    traj.var_ids = sim.var_ids;
    std::vector<std::uint32_t> states;
    std::uint64_t accepted = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        Rng rng(trajectory_seed(master_seed, i));
        simulate(sim, horizon, rng, traj);
        if (!accepts(traj, ev)) continue;
        ++accepted;

        states = traj.initial_states;
        auto current_rate = [&]() {
            for (const auto& c : clauses) {
                bool ok = true;
                for (const auto& [vp, st] : c.lits)
                    if (states[vp] != st) {
                        ok = false;
                        break;
                    }
                if (ok) return c.rate;
            }
            return 0.0;
        };
        double total = 0.0, prev = 0.0, rate = current_rate();
        for (const auto& rec : traj.transitions) {
            total += rate * (rec.t - prev);
            prev = rec.t;
            const bool flips = states[rec.var] != rec.new_state;
            states[rec.var] = rec.new_state;
            rate = current_rate();
            if (!flips) continue;
            for (const auto& im : impulses) {
                if (im.var != rec.var || im.state != rec.new_state) continue;
                bool ok = true;
                for (const auto& [vp, st] : im.conds)
                    if (states[vp] != st) {
                        ok = false;
                        break;
                    }
                if (ok) total += im.value;
            }
        }
        total += rate * (horizon - prev);
        sum += total;
        sum_sq += total * total;
    }
    if (accepted == 0)
        throw evidence_error("evidence too unlikely for rejection sampling");
    McEstimate est;
    est.n_accepted = accepted;
    est.n_sampled = samples;
    est.value = sum / static_cast<double>(accepted);
    if (accepted > 1) {
        const double var =
            std::max(0.0, (sum_sq - sum * sum / static_cast<double>(accepted)) /
                              static_cast<double>(accepted - 1));
        est.std_error = std::sqrt(var / static_cast<double>(accepted));
    }
    return est;
}

std::vector<McEstimate> mc_state_probability_grid(
    const CtbnModel& model, const std::map<std::string, std::string>& decisions,
    const std::string& var, const std::string& state, const std::vector<double>& grid,
    std::uint64_t samples, std::uint64_t master_seed) {
    const SimModel sim = compile_model(model, decisions);
    auto it = std::lower_bound(sim.var_ids.begin(), sim.var_ids.end(), var);
    if (it == sim.var_ids.end() || *it != var) throw data_error("unknown variable " + var);
    const std::uint32_t var_pos = static_cast<std::uint32_t>(it - sim.var_ids.begin());
    const std::uint32_t target = static_cast<std::uint32_t>(model.state_index(var, state));
    double horizon = 1e-12;
    for (double t : grid) horizon = std::max(horizon, t);

    std::vector<std::uint64_t> hits(grid.size(), 0);
    Trajectory traj;
    traj.var_ids = sim.var_ids;
    for (std::uint64_t i = 0; i < samples; ++i) {
        Rng rng(trajectory_seed(master_seed, i));
        simulate(sim, horizon, rng, traj);
        std::uint32_t cur = traj.initial_states[var_pos];
        std::size_t g = 0;
        for (const auto& rec : traj.transitions) {
            while (g < grid.size() && grid[g] < rec.t) {
                if (cur == target) ++hits[g];
                ++g;
            }
            if (rec.var == var_pos) cur = rec.new_state;
        }
        for (; g < grid.size(); ++g)
            if (cur == target) ++hits[g];
    }
    std::vector<McEstimate> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out[g].n_accepted = out[g].n_sampled = samples;
        out[g].value = static_cast<double>(hits[g]) / static_cast<double>(samples);
        out[g].std_error = std::sqrt(std::max(0.0, out[g].value * (1.0 - out[g].value)) /
                                     static_cast<double>(samples));
    }
    return out;
}

McEstimate mc_occupancy(const CtbnModel& model,
                        const std::map<std::string, std::string>& decisions,
                        const Evidence& evidence,
                        const std::vector<std::pair<std::string, std::string>>& condition,
                        double horizon, std::uint64_t samples, std::uint64_t master_seed) {
    if (!(horizon > 0.0)) throw parameter_error("horizon must be positive");
    const SimModel sim = compile_model(model, decisions);
    const Evidence clipped = evidence.clipped(horizon);
    const ResolvedEvidenceSet ev = resolve(model, sim, clipped);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> lits;
    for (const auto& [v, s] : condition) {
        auto it = std::lower_bound(sim.var_ids.begin(), sim.var_ids.end(), v);
        if (it == sim.var_ids.end() || *it != v) throw data_error("unknown condition variable " + v);
        lits.emplace_back(static_cast<std::uint32_t>(it - sim.var_ids.begin()),
                          static_cast<std::uint32_t>(model.state_index(v, s)));
    }

    Trajectory traj;
    traj.var_ids = sim.var_ids;
    std::vector<std::uint32_t> states;
    std::uint64_t accepted = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        Rng rng(trajectory_seed(master_seed, i));
        simulate(sim, horizon, rng, traj);
        if (!accepts(traj, ev)) continue;
        ++accepted;

        states = traj.initial_states;
        double occ = 0.0, prev = 0.0;
        auto holds = [&]() {
            for (const auto& [vp, st] : lits)
                if (states[vp] != st) return false;
            return true;
        };
        bool cur = holds();
        for (const auto& rec : traj.transitions) {
            if (cur) occ += rec.t - prev;
            prev = rec.t;
            states[rec.var] = rec.new_state;
            cur = holds();
        }
        if (cur) occ += horizon - prev;
        sum += occ;
        sum_sq += occ * occ;
    }
    if (accepted == 0)
        throw evidence_error("evidence too unlikely for rejection sampling");
    McEstimate est;
    est.n_accepted = accepted;
    est.n_sampled = samples;
    est.value = sum / static_cast<double>(accepted);
    if (accepted > 1) {
        const double var =
            std::max(0.0, (sum_sq - sum * sum / static_cast<double>(accepted)) /
                              static_cast<double>(accepted - 1));
        est.std_error = std::sqrt(var / static_cast<double>(accepted));
    }
    return est;
}

}  // namespace phmkit
