#include "phmkit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phmkit/errors.hpp"

namespace phmkit {

IntensityMatrix two_state_im(double rate_0to1, double rate_1to0) {
    if (!std::isfinite(rate_0to1) || !std::isfinite(rate_1to0) || rate_0to1 < 0.0 ||
        rate_1to0 < 0.0) {
        throw parameter_error("two_state_im: rates must be finite and >= 0");
    }
    IntensityMatrix im(2);
    im.at(0, 0) = -rate_0to1;
    im.at(0, 1) = rate_0to1;
    im.at(1, 0) = rate_1to0;
    im.at(1, 1) = -rate_1to0;
    return im;
}

std::vector<std::string> intensity_matrix_issues(const IntensityMatrix& im) {
    std::vector<std::string> issues;
    const std::size_t k = im.dim;
    if (k < 1 || im.entries.size() != k * k) {
        issues.push_back("matrix storage does not match its dimension");
        return issues;
    }
    double max_abs = 0.0;
    for (double v : im.entries) {
        if (!std::isfinite(v)) {
            issues.push_back("non-finite entry");
            return issues;
        }
        max_abs = std::max(max_abs, std::fabs(v));
    }
    for (std::size_t i = 0; i < k; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double v = im.at(i, j);
            row_sum += v;
            if (i != j && v < 0.0) {
                std::ostringstream os;
                os << "negative off-diagonal at (" << i << "," << j << ")";
                issues.push_back(os.str());
            }
        }
        if (std::fabs(row_sum) > 1e-9 * std::max(max_abs, 1e-300) && max_abs > 0.0) {
            std::ostringstream os;
            os << "row " << i << " does not sum to zero (sum=" << row_sum << ")";
            issues.push_back(os.str());
        }
    }
    return issues;
}

namespace {

// Reachability over positive rates, Floyd-Warshall style; dimensions stay small.
std::vector<std::vector<bool>> reachability(const IntensityMatrix& im) {
    const std::size_t k = im.dim;
    std::vector<std::vector<bool>> reach(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i) {
        reach[i][i] = true;
        for (std::size_t j = 0; j < k; ++j)
            if (i != j && im.at(i, j) > 0.0) reach[i][j] = true;
    }
    for (std::size_t m = 0; m < k; ++m)
        for (std::size_t i = 0; i < k; ++i)
            if (reach[i][m])
                for (std::size_t j = 0; j < k; ++j)
                    if (reach[m][j]) reach[i][j] = true;
    return reach;
}

// Dense solve of pi Q = 0 restricted to `states`, normalized to sum 1.
std::vector<double> solve_balance(const IntensityMatrix& im, const std::vector<std::size_t>& states) {
    const std::size_t n = states.size();
    // Transpose of the restricted generator with the last equation replaced by
    // the normalization constraint.
    std::vector<double> a(n * n, 0.0), b(n, 0.0);
    for (std::size_t r = 0; r + 1 < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a[r * n + c] = im.at(states[c], states[r]);
    for (std::size_t c = 0; c < n; ++c) a[(n - 1) * n + c] = 1.0;
    b[n - 1] = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        if (std::fabs(a[pivot * n + col]) < 1e-300)
            throw numeric_error("no unique stationary distribution");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = b[i] / a[i * n + i];
    double total = 0.0;
    for (double& p : pi) {
        if (p < 0.0 && p > -1e-12) p = 0.0;
        total += p;
    }
    for (double& p : pi) p /= total;
    return pi;
}

}  // namespace

std::vector<double> stationary_distribution(const IntensityMatrix& im) {
    auto issues = intensity_matrix_issues(im);
    if (!issues.empty()) throw parameter_error("stationary_distribution: " + issues.front());
    const std::size_t k = im.dim;
    const auto reach = reachability(im);

    // A communicating class is closed when no member has a rate out of it.
    std::vector<int> cls(k, -1);
    int n_classes = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (cls[i] >= 0) continue;
        const int id = n_classes++;
        for (std::size_t j = 0; j < k; ++j)
            if (reach[i][j] && reach[j][i]) cls[j] = id;
    }
    std::vector<bool> closed(static_cast<std::size_t>(n_classes), true);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (im.at(i, j) > 0.0 && cls[i] != cls[j]) closed[cls[i]] = false;

    int target = -1;
    for (int c = 0; c < n_classes; ++c) {
        if (!closed[c]) continue;
        if (target >= 0) throw numeric_error("no unique stationary distribution");
        target = c;
    }
    if (target < 0) throw numeric_error("no unique stationary distribution");

    std::vector<std::size_t> states;
    for (std::size_t i = 0; i < k; ++i)
        if (cls[i] == target) states.push_back(i);

    std::vector<double> pi(k, 0.0);
    if (states.size() == 1) {
        pi[states[0]] = 1.0;
        return pi;
    }
    const auto restricted = solve_balance(im, states);
    for (std::size_t i = 0; i < states.size(); ++i) pi[states[i]] = restricted[i];
    return pi;
}

}  // namespace phmkit
