#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cbandit/model.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

namespace detail {

// max-shift log-sum-exp; subtracts the result so the weights sum to 1.
inline double normalize_log_weights(std::vector<double>& lw) {
    double mx = *std::max_element(lw.begin(), lw.end());
    double sum = 0.0;
    for (double v : lw) sum += std::exp(v - mx);
    double lse = mx + std::log(sum);
    for (double& v : lw) v -= lse;
    return lse;
}

}  // namespace detail

/// pi_t over the grid, kept in log space. log_weights are normalized after
/// every update (logsumexp == 0); `normalizer` caches the last shift.
struct PosteriorState {
    std::vector<double> log_weights;
    double normalizer = 0.0;

    std::vector<double> weights() const {
        std::vector<double> w(log_weights.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i]);
        return w;
    }
};

inline PosteriorState init_posterior(const ParameterGrid& grid) {
    PosteriorState st;
    st.log_weights.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        st.log_weights[i] = grid.prior_weights[i] > 0.0
                                ? std::log(grid.prior_weights[i])
                                : -std::numeric_limits<double>::infinity();
    st.normalizer = detail::normalize_log_weights(st.log_weights);
    return st;
}

inline void update_inplace(PosteriorState& st, std::size_t action, std::size_t observation,
                           const LikelihoodTable& table) {
    const std::size_t n = st.log_weights.size();
    const std::size_t stride = table.n_actions * table.n_obs;
    const double* logl = &table.log_values[action * table.n_obs + observation];
    for (std::size_t t = 0; t < n; ++t) st.log_weights[t] += logl[t * stride];
    st.normalizer = detail::normalize_log_weights(st.log_weights);
}

inline PosteriorState update(const PosteriorState& st, std::size_t action,
                             std::size_t observation, const LikelihoodTable& table) {
    PosteriorState next = st;
    update_inplace(next, action, observation, table);
    return next;
}

/// Occurrence counts of each (action, observation) pair: N_t(a) and the
/// empirical observation histogram per action.
struct HistoryCounts {
    std::size_t n_actions = 0;
    std::size_t n_obs = 0;
    std::vector<std::int64_t> counts;  // [a*n_obs + y]

    HistoryCounts() = default;
    HistoryCounts(std::size_t na, std::size_t ny)
        : n_actions(na), n_obs(ny), counts(na * ny, 0) {}

    void add(std::size_t a, std::size_t y, std::int64_t k = 1) { counts[a * n_obs + y] += k; }
    std::int64_t at(std::size_t a, std::size_t y) const { return counts[a * n_obs + y]; }
    std::int64_t plays(std::size_t a) const {
        std::int64_t s = 0;
        for (std::size_t y = 0; y < n_obs; ++y) s += counts[a * n_obs + y];
        return s;
    }
    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

// Posterior from history counts in one shot:
// log W_t(theta) = -sum_{a,y} counts(a,y) * log(l(y;a,theta*)/l(y;a,theta)),
// equal to the sequential update applied in any order.
inline PosteriorState exact_from_history(const ParameterGrid& grid, const HistoryCounts& counts,
                                         const LikelihoodTable& table) {
    PosteriorState st = init_posterior(grid);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        double acc = 0.0;
        for (std::size_t a = 0; a < counts.n_actions; ++a)
            for (std::size_t y = 0; y < counts.n_obs; ++y) {
                std::int64_t c = counts.at(a, y);
                if (c != 0) acc += static_cast<double>(c) * table.log_at(t, a, y);
            }
        st.log_weights[t] += acc;
    }
    st.normalizer = detail::normalize_log_weights(st.log_weights);
    return st;
}

// Inverse-CDF draw over the normalized weights with a single uniform.
inline std::size_t sample(const PosteriorState& st, Rng& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < st.log_weights.size(); ++i) {
        acc += std::exp(st.log_weights[i]);
        if (u < acc) return i;
    }
    return st.log_weights.size() - 1;
}

/// Particle approximation of the posterior: grid indices with weights.
struct ParticleCloud {
    std::vector<std::size_t> index;
    std::vector<double> weight;
    double ess = 0.0;

    std::size_t size() const { return index.size(); }

    // aggregated weight per grid point
    std::vector<double> grid_weights(std::size_t n_thetas) const {
        std::vector<double> w(n_thetas, 0.0);
        for (std::size_t i = 0; i < index.size(); ++i) w[index[i]] += weight[i];
        return w;
    }
};

inline ParticleCloud init_particles(const ParameterGrid& grid, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("particle count must be positive");
    ParticleCloud c;
    c.index.resize(n);
    c.weight.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) c.index[i] = sample_index(grid.prior_weights, rng);
    c.ess = static_cast<double>(n);
    return c;
}

inline void systematic_resample(ParticleCloud& cloud, Rng& rng) {
    const std::size_t n = cloud.size();
    std::vector<std::size_t> next(n);
    const double step = 1.0 / static_cast<double>(n);
    double pos = rng.next_double() * step;
    double acc = cloud.weight[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (acc < pos && j + 1 < n) acc += cloud.weight[++j];
        next[i] = cloud.index[j];
        pos += step;
    }
    cloud.index = std::move(next);
    cloud.weight.assign(n, step);
    cloud.ess = static_cast<double>(n);
}

// Importance-reweight by the observation likelihood; systematic resampling
// when ESS drops below n/2. No jitter: the support is the fixed grid.
inline void pf_update(ParticleCloud& cloud, std::size_t action, std::size_t observation,
                      const LikelihoodTable& table, Rng& rng) {
    if (cloud.size() == 0) throw std::invalid_argument("empty particle cloud");
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        cloud.weight[i] *= table.at(cloud.index[i], action, observation);
        sum += cloud.weight[i];
    }
    double sq = 0.0;
    for (double& w : cloud.weight) {
        w /= sum;
        sq += w * w;
    }
    cloud.ess = 1.0 / sq;
    if (cloud.ess < static_cast<double>(cloud.size()) / 2.0) systematic_resample(cloud, rng);
}

inline std::size_t sample(const ParticleCloud& cloud, Rng& rng) {
    return cloud.index[sample_index(cloud.weight, rng)];
}

}  // namespace cbandit
