#include "phmkit/exact.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "phmkit/errors.hpp"

namespace phmkit {

namespace {

struct PoissonWindow {
    std::size_t lo = 0;
    std::vector<double> pmf;  // normalized over [lo, lo+pmf.size())
    std::size_t hi() const { return lo + pmf.size(); }
};

// Poisson(m) probabilities around the mode; both tails cut where the weight
// falls below 1e-20 of the peak, well under any series tolerance in use.
PoissonWindow poisson_window(double m) {
    PoissonWindow w;
    if (m <= 0.0) {
        w.pmf = {1.0};
        return w;
    }
    const std::size_t mode = static_cast<std::size_t>(m);
    std::vector<double> up{1.0};
    for (std::size_t k = mode;; ++k) {
        const double next = up.back() * m / static_cast<double>(k + 1);
        if (next < 1e-20) break;
        up.push_back(next);
    }
    std::vector<double> down;
    double cur = 1.0;
    for (std::size_t k = mode; k > 0; --k) {
        cur = cur * static_cast<double>(k) / m;
        if (cur < 1e-20) break;
        down.push_back(cur);
    }
    w.lo = mode - down.size();
    w.pmf.reserve(down.size() + up.size());
    for (auto it = down.rbegin(); it != down.rend(); ++it) w.pmf.push_back(*it);
    for (double p : up) w.pmf.push_back(p);
    double total = 0.0;
    for (double p : w.pmf) total += p;
    for (double& p : w.pmf) p /= total;
    return w;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l1(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += std::fabs(x);
    return s;
}

// One segment of evidence-conditioned evolution with the uniformized chain.
class SegmentWalker {
  public:
    SegmentWalker(const JointGenerator& gen, double lambda, const std::vector<double>& scaled)
        : gen_(gen), lambda_(lambda), scaled_(scaled) {}

    // Evolves v over `duration`; adds integral contributions (weights in rate
    // units) to `acc` entry-wise.
    void advance(std::vector<double>& v, double duration,
                 const std::vector<std::vector<double>>& weights, std::vector<double>& acc) const {
        if (duration <= 0.0) return;
        std::vector<double> wdot(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i) wdot[i] = dot(v, weights[i]);
        if (lambda_ <= 0.0) {
            for (std::size_t i = 0; i < weights.size(); ++i) acc[i] += wdot[i] * duration;
            return;
        }
        const double m = lambda_ * duration;
        const PoissonWindow win = poisson_window(m);
        const std::size_t last = win.hi() - 1;

        std::vector<double> final_acc(v.size(), 0.0);
        std::vector<double> next(v.size());
        double cum_pmf = 0.0;    // sum of pmf over k processed so far
        double cum_erl = 0.0;    // sum of Erlang weights processed so far
        for (std::size_t k = 0;; ++k) {
            const double pk = (k >= win.lo && k <= last) ? win.pmf[k - win.lo] : 0.0;
            // integral of the k-th Poisson density over [0, duration]
            const double ck = (1.0 - std::min(1.0, cum_pmf + pk)) / lambda_;
            for (std::size_t i = 0; i < weights.size(); ++i) acc[i] += wdot[i] * ck;
            cum_pmf += pk;
            cum_erl += ck;
            if (pk > 0.0)
                for (std::size_t s = 0; s < v.size(); ++s) final_acc[s] += pk * v[s];
            if (k == last) break;

            matvec(v, next);
            double diff = 0.0;
            for (std::size_t s = 0; s < v.size(); ++s) diff += std::fabs(next[s] - v[s]);
            v.swap(next);
            for (std::size_t i = 0; i < weights.size(); ++i) wdot[i] = dot(v, weights[i]);
            if (diff <= 1e-14) {
                // Converged power sequence: the remaining series mass sits on v.
                const double rest = std::max(0.0, 1.0 - cum_pmf);
                for (std::size_t s = 0; s < v.size(); ++s) final_acc[s] += rest * v[s];
                const double rest_erl = std::max(0.0, duration - cum_erl);
                for (std::size_t i = 0; i < weights.size(); ++i) acc[i] += wdot[i] * rest_erl;
                break;
            }
        }
        v = std::move(final_acc);
    }

  private:
    // next = v (I + Q/lambda); `scaled_` holds Q/lambda including diagonals.
    void matvec(const std::vector<double>& v, std::vector<double>& next) const {
        std::fill(next.begin(), next.end(), 0.0);
        const auto& rp = gen_.row_ptr;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            next[i] += vi;
            for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) next[gen_.col[e]] += vi * scaled_[e];
        }
    }

    const JointGenerator& gen_;
    double lambda_;
    const std::vector<double>& scaled_;
};

struct ResolvedLiteral {
    std::size_t var_pos;
    std::uint32_t state;
};

struct TimelineEvent {
    double t;
    std::vector<ResolvedLiteral> collapses;
};

struct Timeline {
    std::vector<TimelineEvent> events;  // sorted, unique times
    struct Window {
        double a, b;
        ResolvedLiteral lit;
    };
    std::vector<Window> windows;
};

Timeline resolve_timeline(const JointGenerator& gen, const CtbnModel& model,
                          const Evidence& evidence, double t_end) {
    std::map<double, std::vector<ResolvedLiteral>> at;
    Timeline tl;
    for (const auto& p : evidence.points) {
        if (p.t > t_end) continue;
        at[p.t].push_back({gen.var_position(p.var),
                           static_cast<std::uint32_t>(model.state_index(p.var, p.state))});
    }
    for (const auto& iv : evidence.intervals) {
        if (iv.t_start > t_end) continue;
        const ResolvedLiteral lit{gen.var_position(iv.var),
                                  static_cast<std::uint32_t>(model.state_index(iv.var, iv.state))};
        at[iv.t_start].push_back(lit);
        const double b = std::min(iv.t_end, t_end);
        if (b > iv.t_start) tl.windows.push_back({iv.t_start, b, lit});
    }
    for (auto& [t, lits] : at) tl.events.push_back({t, std::move(lits)});
    return tl;
}

void collapse(std::vector<double>& v, const JointGenerator& gen, const ResolvedLiteral& lit) {
    const std::size_t stride = gen.strides[lit.var_pos];
    const std::uint32_t radix = gen.radices[lit.var_pos];
    for (std::size_t s = 0; s < v.size(); ++s)
        if (static_cast<std::uint32_t>(s / stride % radix) != lit.state) v[s] = 0.0;
}

void renormalize(std::vector<double>& v) {
    const double z = l1(v);
    if (z <= 0.0) throw evidence_error("evidence has zero probability under the model");
    for (double& x : v) x /= z;
}

// Zeroes rates leading out of the set consistent with `active` literals;
// diagonals keep the full exit rate so mass decays (survival conditioning).
std::vector<double> masked_scaled(const JointGenerator& gen, const std::vector<double>& base,
                                  const std::vector<ResolvedLiteral>& active) {
    if (active.empty()) return base;
    std::vector<double> out = base;
    for (std::size_t i = 0; i < gen.n_states; ++i) {
        for (std::size_t e = gen.row_ptr[i]; e < gen.row_ptr[i + 1]; ++e) {
            const std::size_t j = gen.col[e];
            if (j == i) continue;
            for (const auto& lit : active) {
                if (static_cast<std::uint32_t>(j / gen.strides[lit.var_pos] %
                                               gen.radices[lit.var_pos]) != lit.state) {
                    out[e] = 0.0;
                    break;
                }
            }
        }
    }
    return out;
}

// State weighting of an entry functional under the active (masked) rates:
// w(s) = rate of the transition that flips entry_var to entry_state, when the
// gate admits s.
std::vector<double> entry_weights(const JointGenerator& gen, const std::vector<double>& scaled,
                                  double lambda, const ExactFunctional& fn) {
    std::vector<double> w(gen.n_states, 0.0);
    const std::size_t stride = gen.strides[fn.entry_var];
    const std::uint32_t radix = gen.radices[fn.entry_var];
    for (std::size_t s = 0; s < gen.n_states; ++s) {
        const std::uint32_t x = static_cast<std::uint32_t>(s / stride % radix);
        if (x == fn.entry_state) continue;
        if (!fn.source_gate.empty() && !fn.source_gate[s]) continue;
        const std::size_t target = s - static_cast<std::size_t>(x) * stride +
                                   static_cast<std::size_t>(fn.entry_state) * stride;
        for (std::size_t e = gen.row_ptr[s]; e < gen.row_ptr[s + 1]; ++e)
            if (gen.col[e] == target) {
                w[s] = scaled[e] * lambda;
                break;
            }
    }
    return w;
}

struct RunOnce {
    std::vector<double> v;
    std::vector<double> integrals;
};

RunOnce run_timeline(const JointGenerator& gen, std::vector<double> v, const Timeline& tl,
                     double t_end, const std::vector<ExactFunctional>& fns,
                     const std::vector<double>& base_scaled, double lambda, int subdivide) {
    RunOnce out;
    out.integrals.assign(fns.size(), 0.0);

    // Segment boundaries: 0, event times, t_end.
    std::vector<double> cuts{0.0};
    for (const auto& ev : tl.events)
        if (ev.t > 0.0 && ev.t < t_end) cuts.push_back(ev.t);
    cuts.push_back(t_end);

    // Events exactly at 0 apply before the first segment.
    for (const auto& ev : tl.events)
        if (ev.t == 0.0)
            for (const auto& lit : ev.collapses) collapse(v, gen, lit);
    renormalize(v);

    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double a = cuts[seg], b = cuts[seg + 1];
        std::vector<ResolvedLiteral> active;
        for (const auto& w : tl.windows)
            if (w.a <= a && b <= w.b) active.push_back(w.lit);

        const auto scaled = masked_scaled(gen, base_scaled, active);
        SegmentWalker walker(gen, lambda, scaled);

        std::vector<std::vector<double>> weights;
        weights.reserve(fns.size());
        for (const auto& fn : fns)
            weights.push_back(fn.entry ? entry_weights(gen, scaled, lambda, fn) : fn.weights);

        const int parts = (!active.empty() && !fns.empty()) ? (1 << subdivide) : 1;
        const double step = (b - a) / parts;
        for (int p = 0; p < parts; ++p) {
            // Mass is conserved on unmasked segments, so normalizing at part
            // boundaries makes the raw integral the conditional one; on masked
            // segments the subdivision drives the same approximation to
            // convergence.
            renormalize(v);
            walker.advance(v, step, weights, out.integrals);
        }
        for (const auto& ev : tl.events)
            if (ev.t == b && b < t_end)
                for (const auto& lit : ev.collapses) collapse(v, gen, lit);
    }
    // Events at exactly t_end condition the final distribution.
    for (const auto& ev : tl.events)
        if (ev.t == t_end && t_end > 0.0)
            for (const auto& lit : ev.collapses) collapse(v, gen, lit);
    renormalize(v);
    out.v = std::move(v);
    return out;
}

}  // namespace

std::vector<double> transient_distribution(const JointGenerator& gen, std::vector<double> init,
                                           double t, double tol) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw parameter_error("transient time must be >= 0");
    ExactOptions opts;
    opts.tol = tol;
    auto res = exact_filtered_run(gen, CtbnModel{}, std::move(init), Evidence{}, t, {}, true, opts);
    return res.final_distribution;
}

ExactRunResult exact_filtered_run(const JointGenerator& gen, const CtbnModel& model,
                                  std::vector<double> init, const Evidence& evidence,
                                  double t_end, const std::vector<ExactFunctional>& functionals,
                                  bool want_final, const ExactOptions& opts) {
    if (init.size() != gen.n_states) throw parameter_error("initial vector size mismatch");
    for (double x : init)
        if (!std::isfinite(x) || x < 0.0) throw numeric_error("invalid initial distribution");

    double lambda = 0.0;
    for (std::size_t s = 0; s < gen.n_states; ++s)
        for (std::size_t e = gen.row_ptr[s]; e < gen.row_ptr[s + 1]; ++e) {
            if (!std::isfinite(gen.val[e])) throw numeric_error("non-finite rate in generator");
            if (gen.col[e] == s) lambda = std::max(lambda, -gen.val[e]);
        }
    std::vector<double> scaled(gen.val.size(), 0.0);
    if (lambda > 0.0)
        for (std::size_t e = 0; e < gen.val.size(); ++e) scaled[e] = gen.val[e] / lambda;

    const Timeline tl = resolve_timeline(gen, model, evidence, t_end);

    const bool needs_subdivision = !tl.windows.empty() && !functionals.empty();
    int depth = 0;
    RunOnce result = run_timeline(gen, init, tl, t_end, functionals, scaled, lambda, depth);
    if (needs_subdivision) {
        for (depth = 1; depth <= 12; ++depth) {
            RunOnce refined = run_timeline(gen, init, tl, t_end, functionals, scaled, lambda, depth);
            double delta = 0.0;
            for (std::size_t i = 0; i < functionals.size(); ++i)
                delta = std::max(delta, std::fabs(refined.integrals[i] - result.integrals[i]));
            result = std::move(refined);
            if (delta <= opts.occupancy_rel_tol * std::max(t_end, 1.0)) break;
        }
    }

    ExactRunResult out;
    out.integrals = std::move(result.integrals);
    if (want_final) out.final_distribution = std::move(result.v);
    return out;
}

}  // namespace phmkit
