#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbandit {

constexpr double kWeightTol = 1e-12;
constexpr double kDefaultGamma = 1e-6;

/// Finite prior support: a list of parameter vectors (one success probability
/// per basic arm) with prior weights summing to 1.
struct ParameterGrid {
    std::vector<std::vector<double>> points;  // points[j] = theta_j, one prob per arm
    std::vector<double> prior_weights;

    std::size_t size() const { return points.size(); }
    std::size_t n_arms() const { return points.empty() ? 0 : points[0].size(); }
};

/// l(y;a,theta) for every (theta, action, observation) triple, stored flat.
/// Rows are clamped into [gamma, 1-gamma] and renormalized at construction.
struct LikelihoodTable {
    std::size_t n_thetas = 0;
    std::size_t n_actions = 0;
    std::size_t n_obs = 0;
    double gamma = kDefaultGamma;
    bool clamped = false;  // any entry hit the gamma bound during construction
    std::vector<double> values;      // [(t*n_actions + a)*n_obs + y]
    std::vector<double> log_values;

    double at(std::size_t t, std::size_t a, std::size_t y) const {
        return values[(t * n_actions + a) * n_obs + y];
    }
    double log_at(std::size_t t, std::size_t a, std::size_t y) const {
        return log_values[(t * n_actions + a) * n_obs + y];
    }
    const double* row(std::size_t t, std::size_t a) const {
        return &values[(t * n_actions + a) * n_obs];
    }
    const double* log_row(std::size_t t, std::size_t a) const {
        return &log_values[(t * n_actions + a) * n_obs];
    }
};

// Clamp a probability row into [gamma, 1-gamma] and renormalize. Repeated
// because renormalization can push entries back across the bound; converges
// geometrically for any row with n_obs*gamma < 1.
inline bool clamp_row(double* row, std::size_t n, double gamma) {
    bool touched = false;
    for (int pass = 0; pass < 64; ++pass) {
        bool dirty = false;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (row[i] < gamma) { row[i] = gamma; dirty = true; }
            else if (row[i] > 1.0 - gamma) { row[i] = 1.0 - gamma; dirty = true; }
            sum += row[i];
        }
        touched = touched || dirty;
        if (std::abs(sum - 1.0) > 1e-15) {
            for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
            dirty = true;
        }
        if (!dirty) break;
    }
    return touched;
}

inline LikelihoodTable make_likelihood_table(std::size_t n_thetas, std::size_t n_actions,
                                             std::size_t n_obs, std::vector<double> raw,
                                             double gamma = kDefaultGamma) {
    if (gamma <= 0.0 || gamma >= 0.5)
        throw std::invalid_argument("gamma must lie in (0, 1/2)");
    if (raw.size() != n_thetas * n_actions * n_obs)
        throw std::invalid_argument("likelihood table size mismatch");
    LikelihoodTable table;
    table.n_thetas = n_thetas;
    table.n_actions = n_actions;
    table.n_obs = n_obs;
    table.gamma = gamma;
    table.values = std::move(raw);
    for (std::size_t t = 0; t < n_thetas; ++t)
        for (std::size_t a = 0; a < n_actions; ++a)
            table.clamped |= clamp_row(&table.values[(t * n_actions + a) * n_obs], n_obs, gamma);
    table.log_values.resize(table.values.size());
    for (std::size_t i = 0; i < table.values.size(); ++i)
        table.log_values[i] = std::log(table.values[i]);
    return table;
}

/// Scalar reward per (action, observation): the value h(x,a) seen through y.
struct RewardMap {
    std::size_t n_actions = 0;
    std::size_t n_obs = 0;
    std::vector<double> reward;  // [a*n_obs + y]

    double at(std::size_t a, std::size_t y) const { return reward[a * n_obs + y]; }
};

struct InstanceDescriptor {
    ParameterGrid grid;
    LikelihoodTable table;
    RewardMap rewards;
    std::size_t truth_index = 0;

    std::size_t n_actions() const { return table.n_actions; }
    std::size_t n_obs() const { return table.n_obs; }
    std::size_t n_thetas() const { return grid.size(); }
};

inline ParameterGrid build_uniform_grid(const std::vector<double>& per_arm_values,
                                        std::size_t n_arms,
                                        std::size_t cap = 1000000) {
    if (per_arm_values.empty())
        throw std::invalid_argument("per_arm_values must be nonempty");
    if (n_arms == 0)
        throw std::invalid_argument("n_arms must be positive");
    for (double v : per_arm_values)
        if (!(v > 0.0 && v < 1.0))
            throw std::domain_error("grid value outside (0,1)");

    double count = 1.0;
    for (std::size_t i = 0; i < n_arms; ++i) {
        count *= static_cast<double>(per_arm_values.size());
        if (count > static_cast<double>(cap))
            throw std::length_error("grid size exceeds cap");
    }
    const std::size_t total = static_cast<std::size_t>(count);

    ParameterGrid grid;
    grid.points.reserve(total);
    std::vector<std::size_t> digits(n_arms, 0);
    for (std::size_t j = 0; j < total; ++j) {
        std::vector<double> pt(n_arms);
        for (std::size_t i = 0; i < n_arms; ++i) pt[i] = per_arm_values[digits[i]];
        grid.points.push_back(std::move(pt));
        // odometer, last arm fastest
        for (std::size_t i = n_arms; i-- > 0;) {
            if (++digits[i] < per_arm_values.size()) break;
            digits[i] = 0;
        }
    }
    grid.prior_weights.assign(total, 1.0 / static_cast<double>(total));
    return grid;
}

inline double expected_reward(const InstanceDescriptor& inst, std::size_t theta_index,
                              std::size_t action) {
    const double* l = inst.table.row(theta_index, action);
    double r = 0.0;
    for (std::size_t y = 0; y < inst.n_obs(); ++y)
        r += l[y] * inst.rewards.at(action, y);
    return r;
}

// argmax over actions; ties broken by lowest action index.
inline std::size_t optimal_action(const InstanceDescriptor& inst, std::size_t theta_index) {
    std::size_t best = 0;
    double best_r = expected_reward(inst, theta_index, 0);
    for (std::size_t a = 1; a < inst.n_actions(); ++a) {
        double r = expected_reward(inst, theta_index, a);
        if (r > best_r) { best_r = r; best = a; }
    }
    return best;
}

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_instance(const InstanceDescriptor& inst) {
    ValidationReport rep;
    const auto& g = inst.grid;
    const auto& tb = inst.table;

    if (g.size() == 0) {
        rep.violations.push_back("empty parameter grid");
        return rep;
    }
    if (inst.truth_index >= g.size())
        rep.violations.push_back("truth_index out of range");

    double wsum = 0.0;
    for (double w : g.prior_weights) {
        if (w < 0.0) rep.violations.push_back("negative prior weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > kWeightTol)
        rep.violations.push_back("prior weights do not sum to 1");

    std::set<std::vector<double>> seen;
    for (const auto& pt : g.points) {
        for (double v : pt)
            if (!(v > 0.0 && v < 1.0)) {
                rep.violations.push_back("grid point coordinate outside (0,1)");
                break;
            }
        if (!seen.insert(pt).second)
            rep.violations.push_back("duplicate grid point");
    }

    for (std::size_t t = 0; t < tb.n_thetas; ++t) {
        for (std::size_t a = 0; a < tb.n_actions; ++a) {
            const double* row = tb.row(t, a);
            double sum = 0.0;
            bool bound_ok = true;
            for (std::size_t y = 0; y < tb.n_obs; ++y) {
                sum += row[y];
                // renormalization can land a hair under gamma; allow fp slack
                if (row[y] < tb.gamma * (1.0 - 1e-9) || row[y] > 1.0 - tb.gamma * (1.0 - 1e-9))
                    bound_ok = false;
            }
            if (std::abs(sum - 1.0) > kWeightTol)
                rep.violations.push_back("likelihood row not normalized at theta=" +
                                         std::to_string(t) + " a=" + std::to_string(a));
            if (!bound_ok)
                rep.violations.push_back("likelihood outside gamma bounds at theta=" +
                                         std::to_string(t) + " a=" + std::to_string(a));
        }
    }

    if (inst.truth_index < g.size()) {
        if (!(g.prior_weights[inst.truth_index] > 0.0))
            rep.violations.push_back("grain of truth violated: zero prior mass on theta*");

        // unique best action under theta*
        std::size_t astar = optimal_action(inst, inst.truth_index);
        double top = expected_reward(inst, inst.truth_index, astar);
        for (std::size_t a = 0; a < inst.n_actions(); ++a) {
            if (a == astar) continue;
            if (std::abs(expected_reward(inst, inst.truth_index, a) - top) <= kWeightTol) {
                rep.violations.push_back("unique best action violated: action " +
                                         std::to_string(a) + " ties a*");
            }
        }
    }
    return rep;
}

}  // namespace cbandit
