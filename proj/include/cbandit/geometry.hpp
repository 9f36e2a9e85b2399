#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cbandit/model.hpp"

namespace cbandit {

constexpr double kZeroDivergenceTol = 1e-12;

// D(Bern(p) || Bern(q)) in nats, with 0*log 0 = 0.
inline double bernoulli_kl(double p, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("bernoulli_kl: q must be in (0,1)");
    if (p < 0.0 || p > 1.0) throw std::domain_error("bernoulli_kl: p must be in [0,1]");
    double d = 0.0;
    if (p > 0.0) d += p * std::log(p / q);
    if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return d;
}

// Marginal KL divergence between the observation laws of one action under
// theta* and theta, in nats. The gamma clamp keeps every log argument finite.
inline double marginal_kl(const LikelihoodTable& table, std::size_t truth_index,
                          std::size_t theta_index, std::size_t action) {
    const double* p = table.row(truth_index, action);
    const double* lp = table.log_row(truth_index, action);
    const double* lq = table.log_row(theta_index, action);
    double d = 0.0;
    for (std::size_t y = 0; y < table.n_obs; ++y) d += p[y] * (lp[y] - lq[y]);
    return d < 0.0 ? 0.0 : d;  // fp noise on identical rows
}

/// D(theta*_a || theta_a) for every (theta, action) pair.
struct DivergenceMatrix {
    std::size_t n_thetas = 0;
    std::size_t n_actions = 0;
    std::vector<double> d;  // [t*n_actions + a]

    double at(std::size_t t, std::size_t a) const { return d[t * n_actions + a]; }
};

inline DivergenceMatrix divergence_matrix(const InstanceDescriptor& inst) {
    DivergenceMatrix m;
    m.n_thetas = inst.n_thetas();
    m.n_actions = inst.n_actions();
    m.d.resize(m.n_thetas * m.n_actions);
    for (std::size_t t = 0; t < m.n_thetas; ++t)
        for (std::size_t a = 0; a < m.n_actions; ++a)
            m.d[t * m.n_actions + a] = marginal_kl(inst.table, inst.truth_index, t, a);
    return m;
}

/// S_a / S_a' / S_a'' for every action, plus a*(theta) per grid point.
struct DecisionRegions {
    std::size_t astar = 0;                        // a*(theta*)
    std::vector<std::size_t> region_of;           // a*(theta) per theta
    std::vector<std::vector<std::size_t>> s_prime;        // per action
    std::vector<std::vector<std::size_t>> s_double_prime; // per action
};

inline DecisionRegions decision_regions(const InstanceDescriptor& inst,
                                        const DivergenceMatrix& dmatrix,
                                        double tol_zero = kZeroDivergenceTol) {
    DecisionRegions r;
    r.region_of.resize(inst.n_thetas());
    r.s_prime.resize(inst.n_actions());
    r.s_double_prime.resize(inst.n_actions());
    r.astar = optimal_action(inst, inst.truth_index);
    for (std::size_t t = 0; t < inst.n_thetas(); ++t) {
        std::size_t a = optimal_action(inst, t);
        r.region_of[t] = a;
        if (a == r.astar) continue;
        if (dmatrix.at(t, r.astar) <= tol_zero)
            r.s_prime[a].push_back(t);
        else
            r.s_double_prime[a].push_back(t);
    }
    return r;
}

/// The gap quantities driving every bound: xi, delta_a, Delta and the
/// KL-resolvability L.
struct GapSummary {
    double xi_global = std::numeric_limits<double>::infinity();
    std::vector<double> xi_per_action;   // inf over S_a'' of the a*-column; inf if empty
    std::vector<double> delta_a;         // min over S_a' of the a-column; NaN if empty/a*
    double delta_min = std::numeric_limits<double>::infinity();  // Delta
    std::size_t resolvability = 0;       // L
    bool vacuous = false;                // every S_a' empty
    double threshold = 0.0;              // divergence floor used for L
};

// delta_threshold < 0 selects the default: the computed Delta itself.
inline GapSummary gap_summary(const DecisionRegions& regions, const DivergenceMatrix& dmatrix,
                              double delta_threshold = -1.0) {
    const std::size_t n_actions = dmatrix.n_actions;
    GapSummary g;
    g.xi_per_action.assign(n_actions, std::numeric_limits<double>::infinity());
    g.delta_a.assign(n_actions, std::numeric_limits<double>::quiet_NaN());

    bool any_prime = false;
    for (std::size_t a = 0; a < n_actions; ++a) {
        if (a == regions.astar) continue;
        for (std::size_t t : regions.s_double_prime[a]) {
            double d = dmatrix.at(t, regions.astar);
            g.xi_per_action[a] = std::min(g.xi_per_action[a], d);
            g.xi_global = std::min(g.xi_global, d);
        }
        if (!regions.s_prime[a].empty()) {
            any_prime = true;
            double dmin = std::numeric_limits<double>::infinity();
            for (std::size_t t : regions.s_prime[a])
                dmin = std::min(dmin, dmatrix.at(t, a));
            g.delta_a[a] = dmin;
            g.delta_min = std::min(g.delta_min, dmin);
        }
    }

    if (!any_prime) {
        g.vacuous = true;
        g.delta_min = std::numeric_limits<double>::infinity();
        g.resolvability = n_actions - 1;
        return g;
    }

    g.threshold = delta_threshold < 0.0 ? g.delta_min : delta_threshold;

    // L: over every suboptimal theta in some S_a', count the actions (other
    // than a*) whose divergence clears the floor; take the minimum count.
    std::size_t l = n_actions - 1;
    for (std::size_t a = 0; a < n_actions; ++a) {
        for (std::size_t t : regions.s_prime[a]) {
            std::size_t count = 0;
            for (std::size_t ahat = 0; ahat < n_actions; ++ahat) {
                if (ahat == regions.astar) continue;
                if (dmatrix.at(t, ahat) >= g.threshold) ++count;
            }
            l = std::min(l, count);
        }
    }
    g.resolvability = l;
    return g;
}

}  // namespace cbandit
