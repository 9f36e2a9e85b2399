#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbandit/geometry.hpp"

namespace cbandit {

// chi = (1+eps)/(1-eps) * ln T, the elimination threshold in nats.
inline double chi_threshold(double epsilon, double horizon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("epsilon must be in (0,1)");
    if (!(horizon > 1.0)) throw std::domain_error("horizon must exceed 1");
    return (1.0 + epsilon) / (1.0 - epsilon) * std::log(horizon);
}

inline double binomial_coefficient(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c;
}

struct BruteforceResult {
    double value = 0.0;
    bool feasible = false;
    bool vacuous = false;                 // no suboptimal action has a nonempty S'
    std::vector<std::size_t> dropped;     // actions with empty S', excluded from the search
    std::uint64_t nodes = 0;
};

namespace detail {

struct EliminationProblem {
    std::vector<std::size_t> active;          // suboptimal actions with nonempty S'
    std::vector<std::size_t> dropped;
    std::vector<std::size_t> suboptimal;      // all actions != a*
    // per active action: the D_theta rows of its S' members, restricted to
    // active coordinates, plus the full row for unit-vector checks
    std::vector<std::vector<std::vector<double>>> sprime_active;  // [ai][theta][active coord]
    std::vector<std::vector<std::vector<double>>> sprime_subopt;  // [ai][theta][subopt coord]
    std::vector<double> delta;                // per active action
};

inline EliminationProblem elimination_problem(const DivergenceMatrix& dmatrix,
                                              const DecisionRegions& regions) {
    EliminationProblem p;
    const std::size_t n_actions = dmatrix.n_actions;
    for (std::size_t a = 0; a < n_actions; ++a) {
        if (a == regions.astar) continue;
        p.suboptimal.push_back(a);
        if (regions.s_prime[a].empty())
            p.dropped.push_back(a);
        else
            p.active.push_back(a);
    }
    p.sprime_active.resize(p.active.size());
    p.sprime_subopt.resize(p.active.size());
    p.delta.resize(p.active.size());
    for (std::size_t ai = 0; ai < p.active.size(); ++ai) {
        std::size_t a = p.active[ai];
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t t : regions.s_prime[a]) {
            std::vector<double> ra(p.active.size());
            for (std::size_t j = 0; j < p.active.size(); ++j) ra[j] = dmatrix.at(t, p.active[j]);
            std::vector<double> rs(p.suboptimal.size());
            for (std::size_t j = 0; j < p.suboptimal.size(); ++j)
                rs[j] = dmatrix.at(t, p.suboptimal[j]);
            dmin = std::min(dmin, dmatrix.at(t, a));
            p.sprime_active[ai].push_back(std::move(ra));
            p.sprime_subopt[ai].push_back(std::move(rs));
        }
        if (!(dmin > 1e-15))
            throw std::runtime_error("degenerate geometry: delta_a ~ 0 for action " +
                                     std::to_string(a));
        p.delta[ai] = dmin;
    }
    return p;
}

}  // namespace detail

/// Exact value of the path-based play-count optimization by exhaustive search
/// over elimination orders and integer play-count vectors. Coordinates of
/// actions whose S' is empty are pinned to 0 and excluded from the
/// elimination sequence (no elimination constraint can bind for them).
/// Guarded: throws length_error when the search space exceeds node_budget.
inline BruteforceResult c_log_t_bruteforce(const DivergenceMatrix& dmatrix,
                                           const DecisionRegions& regions, double epsilon,
                                           double horizon,
                                           std::uint64_t node_budget = 50000000) {
    const double chi = chi_threshold(epsilon, horizon);
    auto p = detail::elimination_problem(dmatrix, regions);
    BruteforceResult res;
    res.dropped = p.dropped;
    if (p.active.empty()) {
        res.vacuous = true;
        res.feasible = true;
        return res;
    }
    const std::size_t m = p.active.size();
    if (dmatrix.n_actions > 5)
        throw std::length_error("brute force limited to |A| <= 5; use the relaxation");

    std::vector<std::int64_t> cap(m);
    double space = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
        cap[j] = static_cast<std::int64_t>(std::ceil(2.0 * chi / p.delta[j]));
        space *= static_cast<double>(cap[j] + 1);
    }
    // coarse a-priori size check; the node counter still guards the real walk
    if (space * static_cast<double>(m) > 1e16)
        throw std::length_error("search space too large; use the relaxation");

    std::uint64_t nodes = 0;
    double best = -1.0;

    // index of each active action within the suboptimal list
    std::vector<std::size_t> subopt_index(m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t s = 0; s < p.suboptimal.size(); ++s)
            if (p.suboptimal[s] == p.active[j]) subopt_index[j] = s;

    std::vector<std::int64_t> z(m, 0);
    std::vector<bool> frozen(m, false);

    // boundary check for candidate z_k against S'_{a}: the elimination
    // constraint holds and subtracting any suboptimal unit vector breaks it
    auto boundary_ok = [&](std::size_t ai, const std::vector<std::int64_t>& zz) {
        const auto& rows_a = p.sprime_active[ai];
        const auto& rows_s = p.sprime_subopt[ai];
        double minv = std::numeric_limits<double>::infinity();
        std::vector<double> dots(rows_a.size());
        for (std::size_t r = 0; r < rows_a.size(); ++r) {
            double dot = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                dot += static_cast<double>(zz[j]) * rows_a[r][j];
            dots[r] = dot;
            minv = std::min(minv, dot);
        }
        if (minv < chi) return false;
        for (std::size_t s = 0; s < p.suboptimal.size(); ++s) {
            double mn = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows_s.size(); ++r)
                mn = std::min(mn, dots[r] - rows_s[r][s]);
            if (!(mn < chi)) return false;
        }
        return true;
    };

    // smallest v >= lower for coordinate ai such that min_theta <z,D> >= chi
    // given the other coordinates of zz; -1 when no finite v works
    auto minimal_value = [&](std::size_t ai, std::vector<std::int64_t>& zz,
                             std::int64_t lower) -> std::int64_t {
        std::int64_t need = lower;
        for (std::size_t r = 0; r < p.sprime_active[ai].size(); ++r) {
            const auto& row = p.sprime_active[ai][r];
            double base = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != ai) base += static_cast<double>(zz[j]) * row[j];
            if (base >= chi) continue;
            if (!(row[ai] > 0.0)) return -1;
            double v = std::ceil((chi - base) / row[ai] - 1e-12);
            need = std::max(need, static_cast<std::int64_t>(v));
        }
        return need;
    };

    // DFS over elimination orders; at each step enumerate the free coordinates
    // other than the eliminated one, then the eliminated coordinate is forced
    // to the elimination frontier.
    std::vector<std::size_t> free_list;
    std::function<void(double)> dfs = [&](double acc) {
        bool done = true;
        for (std::size_t j = 0; j < m; ++j)
            if (!frozen[j]) { done = false; break; }
        if (done) {
            best = std::max(best, acc);
            return;
        }
        for (std::size_t ai = 0; ai < m; ++ai) {
            if (frozen[ai]) continue;
            // free coordinates to enumerate (unfrozen, not the eliminated one)
            std::vector<std::size_t> free;
            for (std::size_t j = 0; j < m; ++j)
                if (!frozen[j] && j != ai) free.push_back(j);
            std::vector<std::int64_t> saved(m);
            for (std::size_t j = 0; j < m; ++j) saved[j] = z[j];

            std::function<void(std::size_t)> enumerate = [&](std::size_t fi) {
                if (++nodes > node_budget)
                    throw std::length_error("brute-force node budget exceeded; use the relaxation");
                if (fi == free.size()) {
                    std::int64_t v = minimal_value(ai, z, saved[ai]);
                    if (v < 0 || v > cap[ai]) return;
                    std::int64_t keep = z[ai];
                    z[ai] = v;
                    if (boundary_ok(ai, z)) {
                        frozen[ai] = true;
                        dfs(acc + static_cast<double>(v));
                        frozen[ai] = false;
                    }
                    z[ai] = keep;
                    return;
                }
                std::size_t j = free[fi];
                for (std::int64_t v = saved[j]; v <= cap[j]; ++v) {
                    z[j] = v;
                    enumerate(fi + 1);
                }
                z[j] = saved[j];
            };
            enumerate(0);
            for (std::size_t j = 0; j < m; ++j) z[j] = saved[j];
        }
    };
    dfs(0.0);

    res.nodes = nodes;
    if (best >= 0.0) {
        res.value = best;
        res.feasible = true;
    }
    return res;
}

/// Upper bound on the path-based optimization: maximize the total play count
/// over the box z(a) <= 2*chi/delta_a subject to one coupling constraint
/// min_{theta in S'_a} <z, D_theta> <= 2*chi for some suboptimal a. Solved
/// exactly by enumerating the attaining (a, theta) and water-filling the box.
inline double c_log_t_relaxation(const DivergenceMatrix& dmatrix, const DecisionRegions& regions,
                                 double epsilon, double horizon) {
    const double chi = chi_threshold(epsilon, horizon);
    for (std::size_t t = 0; t < dmatrix.n_thetas; ++t)
        for (std::size_t a = 0; a < dmatrix.n_actions; ++a)
            if (dmatrix.at(t, a) > chi)
                throw std::runtime_error(
                    "relaxation precondition violated: D(theta*||theta) > chi at theta=" +
                    std::to_string(t) + " a=" + std::to_string(a) + "; increase T");

    auto p = detail::elimination_problem(dmatrix, regions);
    if (p.active.empty()) return 0.0;
    const std::size_t m = p.active.size();
    const double budget = 2.0 * chi;

    std::vector<double> cap(m);
    for (std::size_t j = 0; j < m; ++j) cap[j] = budget / p.delta[j];

    double best = 0.0;
    for (std::size_t ai = 0; ai < m; ++ai) {
        for (const auto& row : p.sprime_active[ai]) {
            // maximize sum z_j : sum row_j z_j <= budget, 0 <= z_j <= cap_j
            std::vector<std::size_t> order(m);
            for (std::size_t j = 0; j < m; ++j) order[j] = j;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t x, std::size_t y) { return row[x] < row[y]; });
            double b = budget, total = 0.0;
            for (std::size_t j : order) {
                double take;
                if (row[j] <= 1e-300)
                    take = cap[j];
                else
                    take = std::min(cap[j], b / row[j]);
                total += take;
                b -= row[j] * take;
                if (b <= 0.0) b = 0.0;
            }
            best = std::max(best, total);
        }
    }
    return best;
}

// Proposition-style improvement bound: ((|A|-L)/Delta) * 2(1+eps)/(1-eps) * ln T.
inline double prop2_bound(std::size_t n_actions, std::size_t resolvability, double delta,
                          double epsilon, double horizon) {
    if (resolvability < 1 || resolvability > n_actions - 1)
        throw std::domain_error("resolvability L must satisfy 1 <= L <= |A|-1");
    if (!(delta > 0.0)) throw std::domain_error("delta must be positive");
    return (static_cast<double>(n_actions - resolvability) / delta) * 2.0 *
           chi_threshold(epsilon, horizon);
}

// Full-feedback subset constant: sum_{i=1}^{N-M} 1/D(mu_i || mu_{N-M+1}).
inline double cor2_constant(const std::vector<double>& mu_sorted, std::size_t subset_size) {
    const std::size_t n = mu_sorted.size();
    if (subset_size < 1 || subset_size >= n)
        throw std::domain_error("subset size must satisfy 1 <= M < N");
    for (std::size_t i = 1; i < n; ++i)
        if (mu_sorted[i] < mu_sorted[i - 1])
            throw std::invalid_argument("arm means must be sorted ascending");
    const std::size_t cut = n - subset_size;  // index of mu_{N-M+1} (0-based)
    if (!(mu_sorted[cut - 1] < mu_sorted[cut]))
        throw std::domain_error("cor2 requires a strict gap mu_{N-M} < mu_{N-M+1}");
    double s = 0.0;
    for (std::size_t i = 0; i < cut; ++i) s += 1.0 / bernoulli_kl(mu_sorted[i], mu_sorted[cut]);
    return s;
}

// MAX-feedback subset bound on the geometric grid:
// log2 * (1+eps)/(1-eps) * (1 + C(N-1,M)) * ln T / (mu_min^2 (1-beta)).
// The log-2 factor is kept verbatim from the printed formula; ln T in nats.
inline double cor3_bound(std::size_t n_arms, std::size_t subset_size, double mu_min, double beta,
                         double epsilon, double horizon) {
    if (subset_size < 1) throw std::domain_error("cor3 requires M >= 1");
    if (2 * subset_size > n_arms - 1)
        throw std::domain_error("cor3 requires M <= (N-1)/2");
    if (!(mu_min > 0.0 && mu_min < 1.0)) throw std::domain_error("mu_min must be in (0,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("beta must be in (0,1)");
    return std::log(2.0) * ((1.0 + epsilon) / (1.0 - epsilon)) *
           (1.0 + binomial_coefficient(n_arms - 1, subset_size)) * std::log(horizon) /
           (mu_min * mu_min * (1.0 - beta));
}

struct DecoupledConstant {
    double value = 0.0;
    std::size_t skipped = 0;  // suboptimal actions with empty S'
    bool vacuous = false;
};

// The naive per-action constant sum_{a != a*} 1/delta_a.
inline DecoupledConstant decoupled_constant(const GapSummary& gaps, std::size_t astar) {
    DecoupledConstant out;
    std::size_t used = 0;
    for (std::size_t a = 0; a < gaps.delta_a.size(); ++a) {
        if (a == astar) continue;
        if (std::isnan(gaps.delta_a[a])) {
            ++out.skipped;
            continue;
        }
        out.value += 1.0 / gaps.delta_a[a];
        ++used;
    }
    out.vacuous = (used == 0);
    return out;
}

struct BoundReport {
    double epsilon = 0.1;
    double horizon = 0.0;
    double chi = 0.0;  // (1+eps)/(1-eps) * ln T, nats
    std::optional<double> c_bruteforce;
    bool bruteforce_feasible = true;
    std::string bruteforce_note;
    std::optional<double> c_relaxation;
    std::string relaxation_note;
    std::optional<double> prop2;
    std::optional<double> cor2;
    std::optional<double> cor3;
    double decoupled = 0.0;
    std::size_t decoupled_skipped = 0;
    bool vacuous = false;
    double delta_min = 0.0;
    std::size_t resolvability = 0;
};

}  // namespace cbandit
