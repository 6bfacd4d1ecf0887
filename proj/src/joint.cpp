#include "phmkit/joint.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "phmkit/errors.hpp"

namespace phmkit {

std::size_t JointGenerator::var_position(const std::string& id) const {
    auto it = std::lower_bound(var_ids.begin(), var_ids.end(), id);
    if (it == var_ids.end() || *it != id)
        throw data_error("variable not in joint state space: " + id);
    return static_cast<std::size_t>(it - var_ids.begin());
}

std::size_t JointGenerator::index_of(const std::vector<std::uint32_t>& digits) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) idx += strides[i] * digits[i];
    return idx;
}

double JointGenerator::max_exit_rate() const {
    double m = 0.0;
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t e = row_ptr[s]; e < row_ptr[s + 1]; ++e)
            if (col[e] == s) m = std::max(m, -val[e]);
    return m;
}

std::size_t joint_state_count(const CtbnModel& model) {
    std::size_t n = 1;
    for (const Variable& v : model.variables)
        if (v.kind != VariableKind::decision) n *= v.states.size();
    return n;
}

namespace {

struct VarPlan {
    std::size_t stride = 0;
    std::uint32_t radix = 0;
    const Cim* cim = nullptr;
    // Mixed-radix plan over the cim's parents: each parent either reads a
    // digit of the joint state or is a decision pinned by the assignment.
    struct ParentTerm {
        std::size_t joint_stride = 0;  // 0 for pinned decisions
        std::uint32_t joint_radix = 1;
        std::size_t cim_stride = 0;
        std::size_t fixed_digit = 0;  // used when joint_stride == 0
    };
    std::vector<ParentTerm> terms;
    std::size_t fixed_offset = 0;

    std::size_t matrix_index(std::size_t joint_state) const {
        std::size_t idx = fixed_offset;
        for (const auto& t : terms)
            if (t.joint_stride) idx += (joint_state / t.joint_stride % t.joint_radix) * t.cim_stride;
        return idx;
    }
};

}  // namespace

JointGenerator amalgamate(const CtbnModel& model,
                          const std::map<std::string, std::string>& decision_assignment,
                          std::size_t cap) {
    JointGenerator gen;
    for (const Variable& v : model.variables) {
        if (v.kind == VariableKind::decision) {
            if (!decision_assignment.count(v.id))
                throw binding_error("decision variable " + v.id + " is not assigned");
            continue;
        }
        gen.var_ids.push_back(v.id);
        gen.radices.push_back(static_cast<std::uint32_t>(v.states.size()));
    }
    if (gen.var_ids.empty()) throw data_error("model has no non-decision variables");

    std::size_t n = 1;
    bool overflow = false;
    gen.strides.resize(gen.var_ids.size());
    for (std::size_t i = 0; i < gen.var_ids.size(); ++i) {
        gen.strides[i] = n;
        if (gen.radices[i] == 0 || n > std::numeric_limits<std::size_t>::max() / gen.radices[i]) {
            overflow = true;
            break;
        }
        n *= gen.radices[i];
    }
    if (overflow || n > cap) {
        std::ostringstream os;
        os << "joint state space";
        if (!overflow) os << " of " << n << " states";
        os << " exceeds cap " << cap;
        throw capacity_error(os.str());
    }
    if (n > std::numeric_limits<std::uint32_t>::max())
        throw capacity_error("joint state space exceeds 32-bit indexing");
    gen.n_states = n;

    // Per-variable lookup plans.
    std::vector<VarPlan> plans(gen.var_ids.size());
    for (std::size_t vi = 0; vi < gen.var_ids.size(); ++vi) {
        const std::string& id = gen.var_ids[vi];
        VarPlan& plan = plans[vi];
        plan.stride = gen.strides[vi];
        plan.radix = gen.radices[vi];
        auto it = model.cims.find(id);
        if (it == model.cims.end()) throw data_error("missing CIM for " + id);
        plan.cim = &it->second;

        std::size_t cim_stride = 1;
        for (const auto& pid : plan.cim->parent_ids) {
            const Variable& pv = model.variable(pid);
            VarPlan::ParentTerm term;
            term.cim_stride = cim_stride;
            cim_stride *= pv.states.size();
            if (pv.kind == VariableKind::decision) {
                const auto& state = decision_assignment.at(pid);
                term.fixed_digit = model.state_index(pid, state);
                plan.fixed_offset += term.fixed_digit * term.cim_stride;
            } else {
                const std::size_t pos = gen.var_position(pid);
                term.joint_stride = gen.strides[pos];
                term.joint_radix = gen.radices[pos];
            }
            plan.terms.push_back(term);
        }
        if (plan.cim->matrices.size() != cim_stride)
            throw data_error("CIM for " + id + " is incomplete");
    }

    // Each row holds one entry per possible single-variable transition plus
    // the diagonal.
    std::size_t row_nnz = 1;
    for (std::size_t vi = 0; vi < plans.size(); ++vi) row_nnz += gen.radices[vi] - 1;
    gen.row_ptr.resize(n + 1);
    for (std::size_t s = 0; s <= n; ++s) gen.row_ptr[s] = s * row_nnz;
    gen.col.assign(gen.row_ptr[n], 0);
    gen.val.assign(gen.row_ptr[n], 0.0);

    for (std::size_t s = 0; s < n; ++s) {
        std::size_t cursor = gen.row_ptr[s];
        double diag = 0.0;
        const std::size_t diag_slot = cursor++;
        for (std::size_t vi = 0; vi < plans.size(); ++vi) {
            const VarPlan& plan = plans[vi];
            const std::uint32_t x = gen.digit(s, vi);
            const std::size_t base = s - static_cast<std::size_t>(x) * plan.stride;
            const IntensityMatrix& m = plan.cim->matrices[plan.matrix_index(s)];
            for (std::uint32_t x2 = 0; x2 < plan.radix; ++x2) {
                if (x2 == x) continue;
                const double rate = m.at(x, x2);
                gen.col[cursor] = static_cast<std::uint32_t>(base + x2 * plan.stride);
                gen.val[cursor] = rate;
                ++cursor;
                diag -= rate;
            }
        }
        gen.col[diag_slot] = static_cast<std::uint32_t>(s);
        gen.val[diag_slot] = diag;
    }
    return gen;
}

std::vector<double> joint_initial_distribution(const CtbnModel& model, const JointGenerator& gen) {
    std::vector<double> dist(gen.n_states, 1.0);
    for (std::size_t vi = 0; vi < gen.var_ids.size(); ++vi) {
        auto it = model.initial.find(gen.var_ids[vi]);
        if (it == model.initial.end()) throw data_error("missing initial for " + gen.var_ids[vi]);
        const auto& p = it->second;
        for (std::size_t s = 0; s < gen.n_states; ++s) dist[s] *= p[gen.digit(s, vi)];
    }
    return dist;
}

}  // namespace phmkit
