#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbandit/model.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

enum class EnvKind { mab, full_info, max_subset, makespan };

inline std::string env_kind_name(EnvKind k) {
    switch (k) {
        case EnvKind::mab: return "mab";
        case EnvKind::full_info: return "full_info";
        case EnvKind::max_subset: return "max";
        case EnvKind::makespan: return "makespan";
    }
    return "?";
}

struct EnvironmentSpec {
    EnvKind kind = EnvKind::mab;
    std::size_t n_arms = 0;               // basic arms (jobs, for makespan)
    std::vector<double> per_arm_values;   // shared grid values per arm
    std::vector<double> truth;            // theta*, snapped onto the grid at build
    double gamma = kDefaultGamma;
    std::size_t subset_size = 1;          // M, for subset environments
    std::size_t n_machines = 2;           // K, for makespan
    int duration_lo = 1;                  // job duration support {lo, hi}
    int duration_hi = 2;
    std::size_t grid_cap = 1000000;
};

// All size-M subsets of [0, n) in lexicographic order, each sorted ascending.
inline std::vector<std::vector<int>> enumerate_subsets(std::size_t n, std::size_t m) {
    if (m == 0 || m > n) throw std::invalid_argument("subset size out of range");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(m);
    for (std::size_t i = 0; i < m; ++i) cur[i] = static_cast<int>(i);
    while (true) {
        out.push_back(cur);
        int i = static_cast<int>(m) - 1;
        while (i >= 0 && cur[i] == static_cast<int>(n - m + i)) --i;
        if (i < 0) break;
        ++cur[i];
        for (std::size_t j = i + 1; j < m; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

// Job->machine assignments with machine relabelings deduplicated (machines
// are homogeneous): restricted growth strings with at most k distinct labels,
// lexicographic order.
inline std::vector<std::vector<int>> enumerate_partitions(std::size_t n_jobs, std::size_t k) {
    if (n_jobs == 0 || k == 0) throw std::invalid_argument("empty partition problem");
    std::vector<std::vector<int>> out;
    std::vector<int> a(n_jobs, 0);
    // iterative DFS over positions
    struct Frame { std::size_t pos; int next; int maxseen; };
    std::vector<Frame> stack;
    stack.push_back({0, 0, -1});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.pos == n_jobs) {
            out.push_back(a);
            stack.pop_back();
            continue;
        }
        int limit = std::min<int>(f.maxseen + 1, static_cast<int>(k) - 1);
        if (f.next > limit) {
            stack.pop_back();
            continue;
        }
        a[f.pos] = f.next;
        int nm = std::max(f.maxseen, f.next);
        ++f.next;
        stack.push_back({f.pos + 1, 0, nm});
    }
    return out;
}

/// Dense observation ids with decoded meanings. For subset environments the
/// decoded value is a bit pattern; for makespan it is the integer makespan.
struct ObservationAlphabet {
    std::vector<int> decoded;  // decoded[id]
    std::size_t size() const { return decoded.size(); }
};

// Distribution over 2^|subset| bit-vectors; bit j is the outcome of the j-th
// smallest arm in the subset.
inline std::vector<double> fullinfo_likelihood(const std::vector<double>& theta,
                                               const std::vector<int>& subset) {
    const std::size_t m = subset.size();
    std::vector<double> pmf(std::size_t{1} << m);
    for (std::size_t y = 0; y < pmf.size(); ++y) {
        double p = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            double t = theta[subset[j]];
            p *= ((y >> j) & 1) ? t : (1.0 - t);
        }
        pmf[y] = p;
    }
    return pmf;
}

// P(max over subset = 1) = 1 - prod(1 - theta_i).
inline double max_success_prob(const std::vector<double>& theta,
                               const std::vector<int>& subset) {
    double q = 1.0;
    for (int i : subset) q *= 1.0 - theta[i];
    return 1.0 - q;
}

// Makespan pmf for one partition: per-machine latency by convolution of the
// jobs' {lo,hi} duration pmfs, then the max of independent machine latencies
// via product of CDFs. P(duration = hi) = theta_j. Empty machines have
// latency 0. Keys are makespan values.
inline std::map<int, double> makespan_pmf(const std::vector<int>& partition,
                                          const std::vector<double>& theta,
                                          std::size_t n_machines, int d_lo, int d_hi) {
    std::vector<std::map<int, double>> machine(n_machines);
    for (auto& m : machine) m[0] = 1.0;
    for (std::size_t j = 0; j < partition.size(); ++j) {
        auto& m = machine[partition[j]];
        std::map<int, double> next;
        for (const auto& [lat, p] : m) {
            next[lat + d_lo] += p * (1.0 - theta[j]);
            next[lat + d_hi] += p * theta[j];
        }
        m = std::move(next);
    }
    // support of the max = union of supports; CDF of max = product of CDFs
    std::map<int, double> out;
    std::vector<int> support;
    for (const auto& m : machine)
        for (const auto& [lat, p] : m) support.push_back(lat);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    double prev_cdf = 0.0;
    for (int v : support) {
        double cdf = 1.0;
        for (const auto& m : machine) {
            double c = 0.0;
            for (const auto& [lat, p] : m)
                if (lat <= v) c += p;
            cdf *= c;
        }
        double mass = cdf - prev_cdf;
        if (mass > 0.0) out[v] = mass;
        prev_cdf = cdf;
    }
    return out;
}

/// A fully materialized instance: model tables plus the action decoding
/// needed to simulate observations.
struct BuiltInstance {
    EnvironmentSpec spec;
    InstanceDescriptor instance;
    ObservationAlphabet alphabet;
    std::vector<std::vector<int>> actions;  // subsets (arm ids) or partitions (job->machine)
    double truth_snap_distance = 0.0;       // L-inf distance of raw truth to grid point
};

namespace detail {

inline std::size_t snap_truth(const ParameterGrid& grid, const std::vector<double>& truth,
                              double& snap_dist) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double d = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            d = std::max(d, std::abs(grid.points[j][i] - truth[i]));
        if (d < best_d) { best_d = d; best = j; }
    }
    snap_dist = best_d;
    return best;
}

}  // namespace detail

inline BuiltInstance build_instance(const EnvironmentSpec& spec) {
    if (spec.n_arms == 0) throw std::invalid_argument("n_arms must be positive");
    if (spec.truth.size() != spec.n_arms)
        throw std::invalid_argument("truth vector length must equal n_arms");

    BuiltInstance built;
    built.spec = spec;
    built.instance.grid = build_uniform_grid(spec.per_arm_values, spec.n_arms, spec.grid_cap);
    const ParameterGrid& grid = built.instance.grid;
    const std::size_t n_thetas = grid.size();

    std::size_t n_actions = 0;
    std::size_t n_obs = 0;
    std::vector<double> raw;
    RewardMap rewards;

    switch (spec.kind) {
        case EnvKind::mab: {
            built.actions = enumerate_subsets(spec.n_arms, 1);
            n_actions = built.actions.size();
            n_obs = 2;
            built.alphabet.decoded = {0, 1};
            raw.resize(n_thetas * n_actions * n_obs);
            for (std::size_t t = 0; t < n_thetas; ++t)
                for (std::size_t a = 0; a < n_actions; ++a) {
                    double p = grid.points[t][built.actions[a][0]];
                    raw[(t * n_actions + a) * n_obs + 0] = 1.0 - p;
                    raw[(t * n_actions + a) * n_obs + 1] = p;
                }
            rewards = {n_actions, n_obs, {}};
            rewards.reward.resize(n_actions * n_obs);
            for (std::size_t a = 0; a < n_actions; ++a) {
                rewards.reward[a * n_obs + 0] = 0.0;
                rewards.reward[a * n_obs + 1] = 1.0;
            }
            break;
        }
        case EnvKind::full_info: {
            built.actions = enumerate_subsets(spec.n_arms, spec.subset_size);
            n_actions = built.actions.size();
            if (n_actions > 100000) throw std::length_error("action set exceeds cap");
            n_obs = std::size_t{1} << spec.subset_size;
            if (n_obs > 65536) throw std::length_error("observation alphabet exceeds cap");
            built.alphabet.decoded.resize(n_obs);
            for (std::size_t y = 0; y < n_obs; ++y)
                built.alphabet.decoded[y] = static_cast<int>(y);
            raw.resize(n_thetas * n_actions * n_obs);
            for (std::size_t t = 0; t < n_thetas; ++t)
                for (std::size_t a = 0; a < n_actions; ++a) {
                    auto pmf = fullinfo_likelihood(grid.points[t], built.actions[a]);
                    std::copy(pmf.begin(), pmf.end(), &raw[(t * n_actions + a) * n_obs]);
                }
            rewards = {n_actions, n_obs, {}};
            rewards.reward.resize(n_actions * n_obs);
            for (std::size_t a = 0; a < n_actions; ++a)
                for (std::size_t y = 0; y < n_obs; ++y)
                    rewards.reward[a * n_obs + y] =
                        static_cast<double>(__builtin_popcountll(y));
            break;
        }
        case EnvKind::max_subset: {
            built.actions = enumerate_subsets(spec.n_arms, spec.subset_size);
            n_actions = built.actions.size();
            if (n_actions > 100000) throw std::length_error("action set exceeds cap");
            n_obs = 2;
            built.alphabet.decoded = {0, 1};
            raw.resize(n_thetas * n_actions * n_obs);
            for (std::size_t t = 0; t < n_thetas; ++t)
                for (std::size_t a = 0; a < n_actions; ++a) {
                    double p = max_success_prob(grid.points[t], built.actions[a]);
                    raw[(t * n_actions + a) * n_obs + 0] = 1.0 - p;
                    raw[(t * n_actions + a) * n_obs + 1] = p;
                }
            rewards = {n_actions, n_obs, {}};
            rewards.reward.resize(n_actions * n_obs);
            for (std::size_t a = 0; a < n_actions; ++a) {
                rewards.reward[a * n_obs + 0] = 0.0;
                rewards.reward[a * n_obs + 1] = 1.0;
            }
            break;
        }
        case EnvKind::makespan: {
            built.actions = enumerate_partitions(spec.n_arms, spec.n_machines);
            n_actions = built.actions.size();
            if (n_actions > 100000) throw std::length_error("action set exceeds cap");
            // global alphabet: union of per-action supports; the support
            // depends only on the partition, not on theta
            std::vector<int> support;
            for (std::size_t a = 0; a < n_actions; ++a) {
                auto pmf = makespan_pmf(built.actions[a], grid.points[0], spec.n_machines,
                                        spec.duration_lo, spec.duration_hi);
                for (const auto& [v, p] : pmf) support.push_back(v);
            }
            std::sort(support.begin(), support.end());
            support.erase(std::unique(support.begin(), support.end()), support.end());
            built.alphabet.decoded = support;
            n_obs = support.size();
            if (n_obs > 65536) throw std::length_error("observation alphabet exceeds cap");
            std::map<int, std::size_t> id_of;
            for (std::size_t y = 0; y < n_obs; ++y) id_of[support[y]] = y;

            raw.assign(n_thetas * n_actions * n_obs, 0.0);
            for (std::size_t t = 0; t < n_thetas; ++t)
                for (std::size_t a = 0; a < n_actions; ++a) {
                    auto pmf = makespan_pmf(built.actions[a], grid.points[t], spec.n_machines,
                                            spec.duration_lo, spec.duration_hi);
                    for (const auto& [v, p] : pmf)
                        raw[(t * n_actions + a) * n_obs + id_of[v]] = p;
                }
            rewards = {n_actions, n_obs, {}};
            rewards.reward.resize(n_actions * n_obs);
            for (std::size_t a = 0; a < n_actions; ++a)
                for (std::size_t y = 0; y < n_obs; ++y)
                    rewards.reward[a * n_obs + y] = -static_cast<double>(support[y]);
            break;
        }
    }

    if (n_thetas * n_actions * n_obs > (std::size_t{1} << 26))
        throw std::length_error("likelihood table exceeds size cap");

    built.instance.table =
        make_likelihood_table(n_thetas, n_actions, n_obs, std::move(raw), spec.gamma);
    built.instance.rewards = std::move(rewards);
    built.instance.truth_index =
        detail::snap_truth(grid, spec.truth, built.truth_snap_distance);
    return built;
}

// Draw basic-arm outcomes under theta* (the snapped grid point) and apply the
// feedback function of the environment.
inline std::size_t sample_observation(const BuiltInstance& built, std::size_t action, Rng& rng) {
    const auto& theta = built.instance.grid.points[built.instance.truth_index];
    const auto& act = built.actions[action];
    switch (built.spec.kind) {
        case EnvKind::mab:
            return rng.bernoulli(theta[act[0]]) ? 1 : 0;
        case EnvKind::full_info: {
            std::size_t y = 0;
            for (std::size_t j = 0; j < act.size(); ++j)
                if (rng.bernoulli(theta[act[j]])) y |= std::size_t{1} << j;
            return y;
        }
        case EnvKind::max_subset: {
            for (int i : act)
                if (rng.bernoulli(theta[i])) return 1;
            return 0;
        }
        case EnvKind::makespan: {
            std::vector<int> latency(built.spec.n_machines, 0);
            for (std::size_t j = 0; j < act.size(); ++j)
                latency[act[j]] += rng.bernoulli(theta[j]) ? built.spec.duration_hi
                                                           : built.spec.duration_lo;
            int mk = *std::max_element(latency.begin(), latency.end());
            auto it = std::lower_bound(built.alphabet.decoded.begin(),
                                       built.alphabet.decoded.end(), mk);
            return static_cast<std::size_t>(it - built.alphabet.decoded.begin());
        }
    }
    return 0;
}

// Reward-stack environment mode: each action owns an i.i.d. observation
// stream drawn from l(.;a,theta*); playing an action consumes the next entry
// of its stream. Identical in law to fresh per-step draws.
class RewardStack {
public:
    RewardStack(const BuiltInstance& built, Rng rng) : built_(&built) {
        streams_.reserve(built.instance.n_actions());
        for (std::size_t a = 0; a < built.instance.n_actions(); ++a)
            streams_.push_back(rng.split(a));
    }

    std::size_t draw(std::size_t action) {
        const double* row = built_->instance.table.row(built_->instance.truth_index, action);
        const std::size_t n = built_->instance.n_obs();
        double u = streams_[action].next_double();
        double acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            acc += row[y];
            if (u < acc) return y;
        }
        return n - 1;
    }

private:
    const BuiltInstance* built_;
    std::vector<Rng> streams_;
};

}  // namespace cbandit
