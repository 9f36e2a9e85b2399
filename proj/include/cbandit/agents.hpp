#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbandit/envs.hpp"
#include "cbandit/model.hpp"
#include "cbandit/posterior.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

enum class AgentKind { thompson, ucb1, uniform_random, thompson_decoupled };

inline AgentKind agent_kind_from_name(const std::string& s) {
    if (s == "thompson") return AgentKind::thompson;
    if (s == "ucb1") return AgentKind::ucb1;
    if (s == "random") return AgentKind::uniform_random;
    if (s == "thompson_decoupled" || s == "thompson-decoupled")
        return AgentKind::thompson_decoupled;
    throw std::invalid_argument("unknown agent kind: " + s);
}

inline std::string agent_kind_name(AgentKind k) {
    switch (k) {
        case AgentKind::thompson: return "thompson";
        case AgentKind::ucb1: return "ucb1";
        case AgentKind::uniform_random: return "random";
        case AgentKind::thompson_decoupled: return "thompson_decoupled";
    }
    return "?";
}

// Algorithm step: draw theta_t from the posterior, play a*(theta_t).
inline std::size_t ts_choose(const PosteriorState& posterior, const InstanceDescriptor& inst,
                             Rng& rng) {
    return optimal_action(inst, sample(posterior, rng));
}

/// UCB1 over complex actions, used as a decoupled baseline. Bootstrap plays
/// each action once in index order.
struct Ucb1State {
    std::vector<std::int64_t> plays;
    std::vector<double> reward_sum;

    explicit Ucb1State(std::size_t n_actions)
        : plays(n_actions, 0), reward_sum(n_actions, 0.0) {}

    std::size_t choose(std::int64_t t) const {
        const std::size_t n = plays.size();
        if (static_cast<std::size_t>(t) <= n) return static_cast<std::size_t>(t - 1);
        std::size_t best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n; ++a) {
            double mean = reward_sum[a] / static_cast<double>(plays[a]);
            double v = mean + std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                                        static_cast<double>(plays[a]));
            if (v > best_v) { best_v = v; best = a; }
        }
        return best;
    }

    void record(std::size_t a, double reward) {
        ++plays[a];
        reward_sum[a] += reward;
    }
};

inline std::size_t ucb1_choose(const Ucb1State& state, std::int64_t t) {
    return state.choose(t);
}

namespace detail {

// Exact posterior over a uniform product grid when every action's likelihood
// touches a single arm (standard MAB): the posterior stays a product measure,
// so it is maintained per arm. Identical in law to the full-grid engine.
class FactoredMabPosterior {
public:
    FactoredMabPosterior(const BuiltInstance& built)
        : values_(built.spec.per_arm_values),
          log_w_(built.spec.n_arms,
                 std::vector<double>(built.spec.per_arm_values.size(), 0.0)) {
        log_p_.resize(values_.size());
        log_q_.resize(values_.size());
        for (std::size_t v = 0; v < values_.size(); ++v) {
            log_p_[v] = std::log(values_[v]);
            log_q_[v] = std::log(1.0 - values_[v]);
        }
    }

    static bool applicable(const BuiltInstance& built) {
        return built.spec.kind == EnvKind::mab && !built.instance.table.clamped;
    }

    void update(std::size_t arm, std::size_t y) {
        auto& lw = log_w_[arm];
        const auto& add = y ? log_p_ : log_q_;
        for (std::size_t v = 0; v < lw.size(); ++v) lw[v] += add[v];
        double mx = *std::max_element(lw.begin(), lw.end());
        for (double& x : lw) x -= mx;
    }

    // sample theta_t arm by arm, return argmax coordinate (= a*(theta_t)
    // for the MAB reward map, ties to the lowest index)
    std::size_t choose(Rng& rng) {
        std::size_t best = 0;
        double best_v = -1.0;
        for (std::size_t i = 0; i < log_w_.size(); ++i) {
            double total = 0.0;
            for (double x : log_w_[i]) total += std::exp(x);
            double u = rng.next_double() * total;
            double acc = 0.0;
            std::size_t pick = log_w_[i].size() - 1;
            for (std::size_t v = 0; v < log_w_[i].size(); ++v) {
                acc += std::exp(log_w_[i][v]);
                if (u < acc) { pick = v; break; }
            }
            if (values_[pick] > best_v) { best_v = values_[pick]; best = i; }
        }
        return best;
    }

    // full-grid weights, for posterior dumps; grid order matches
    // build_uniform_grid (last arm fastest)
    std::vector<double> grid_weights() const {
        std::vector<std::vector<double>> w(log_w_.size());
        for (std::size_t i = 0; i < log_w_.size(); ++i) {
            w[i].resize(log_w_[i].size());
            double total = 0.0;
            for (std::size_t v = 0; v < w[i].size(); ++v) {
                w[i][v] = std::exp(log_w_[i][v]);
                total += w[i][v];
            }
            for (double& x : w[i]) x /= total;
        }
        std::size_t n = 1;
        for (const auto& wi : w) n *= wi.size();
        std::vector<double> out(n, 1.0);
        std::vector<std::size_t> digits(w.size(), 0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < w.size(); ++i) out[j] *= w[i][digits[i]];
            for (std::size_t i = w.size(); i-- > 0;) {
                if (++digits[i] < w[i].size()) break;
                digits[i] = 0;
            }
        }
        return out;
    }

private:
    std::vector<double> values_;
    std::vector<double> log_p_, log_q_;
    std::vector<std::vector<double>> log_w_;
};

// Decoupled Thompson baseline: each complex action keeps its own grid
// posterior over candidate marginal observation laws (the distinct rows of
// the likelihood table for that action), updated only from that action's own
// observations. No information flows between actions.
class DecoupledTs {
public:
    DecoupledTs(const BuiltInstance& built) {
        const auto& inst = built.instance;
        rows_.resize(inst.n_actions());
        exp_reward_.resize(inst.n_actions());
        log_w_.resize(inst.n_actions());
        for (std::size_t a = 0; a < inst.n_actions(); ++a) {
            for (std::size_t t = 0; t < inst.n_thetas(); ++t) {
                std::vector<double> row(inst.table.row(t, a),
                                        inst.table.row(t, a) + inst.n_obs());
                bool dup = false;
                for (const auto& r : rows_[a])
                    if (r == row) { dup = true; break; }
                if (!dup) {
                    double er = 0.0;
                    for (std::size_t y = 0; y < inst.n_obs(); ++y)
                        er += row[y] * inst.rewards.at(a, y);
                    rows_[a].push_back(std::move(row));
                    exp_reward_[a].push_back(er);
                }
            }
            log_w_[a].assign(rows_[a].size(), 0.0);
        }
    }

    std::size_t choose(Rng& rng) const {
        std::size_t best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < log_w_.size(); ++a) {
            double total = 0.0;
            for (double x : log_w_[a]) total += std::exp(x);
            double u = rng.next_double() * total;
            double acc = 0.0;
            std::size_t pick = log_w_[a].size() - 1;
            for (std::size_t c = 0; c < log_w_[a].size(); ++c) {
                acc += std::exp(log_w_[a][c]);
                if (u < acc) { pick = c; break; }
            }
            if (exp_reward_[a][pick] > best_v) { best_v = exp_reward_[a][pick]; best = a; }
        }
        return best;
    }

    void update(std::size_t a, std::size_t y) {
        auto& lw = log_w_[a];
        for (std::size_t c = 0; c < lw.size(); ++c) lw[c] += std::log(rows_[a][c][y]);
        double mx = *std::max_element(lw.begin(), lw.end());
        for (double& x : lw) x -= mx;
    }

private:
    std::vector<std::vector<std::vector<double>>> rows_;  // per action: candidate pmfs
    std::vector<std::vector<double>> exp_reward_;
    std::vector<std::vector<double>> log_w_;
};

}  // namespace detail

/// Per-step record of one episode.
struct RegretTrace {
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> action;
    std::vector<std::uint32_t> observation;
    std::vector<double> pseudo_regret;          // expected-reward gap of the played action
    std::vector<double> realized_reward;
    std::vector<std::int64_t> cum_suboptimal;   // running count of plays != a*

    std::size_t length() const { return action.size(); }
};

enum class PosteriorEngine { exact, particle };

struct EpisodeOptions {
    PosteriorEngine engine = PosteriorEngine::exact;
    std::size_t n_particles = 10000;
    bool reward_stack = false;
    std::size_t dump_every = 0;
    std::function<void(std::size_t step, const std::vector<double>& weights)> dump;
};

inline RegretTrace run_episode(const BuiltInstance& built, AgentKind kind, std::size_t horizon,
                               Rng rng, const EpisodeOptions& opt = {}) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const InstanceDescriptor& inst = built.instance;
    const std::size_t n_actions = inst.n_actions();

    Rng agent_rng = rng.split(1);
    Rng env_rng = rng.split(2);

    // true expected rewards, a* and per-action regret gaps
    std::vector<double> gap(n_actions);
    std::size_t astar = optimal_action(inst, inst.truth_index);
    double top = expected_reward(inst, inst.truth_index, astar);
    for (std::size_t a = 0; a < n_actions; ++a)
        gap[a] = top - expected_reward(inst, inst.truth_index, a);

    // a*(theta) per grid point, for the generic Thompson path
    std::vector<std::size_t> opt_of;
    if (kind == AgentKind::thompson) {
        opt_of.resize(inst.n_thetas());
        for (std::size_t t = 0; t < inst.n_thetas(); ++t) opt_of[t] = optimal_action(inst, t);
    }

    PosteriorState posterior;
    ParticleCloud cloud;
    std::unique_ptr<detail::FactoredMabPosterior> factored;
    std::unique_ptr<detail::DecoupledTs> decoupled;
    Ucb1State ucb(n_actions);
    bool use_particles = false;

    if (kind == AgentKind::thompson) {
        if (opt.engine == PosteriorEngine::particle) {
            use_particles = true;
            cloud = init_particles(inst.grid, opt.n_particles, agent_rng);
        } else if (detail::FactoredMabPosterior::applicable(built)) {
            factored = std::make_unique<detail::FactoredMabPosterior>(built);
        } else {
            posterior = init_posterior(inst.grid);
        }
    } else if (kind == AgentKind::thompson_decoupled) {
        decoupled = std::make_unique<detail::DecoupledTs>(built);
    }

    std::unique_ptr<RewardStack> stack;
    if (opt.reward_stack) stack = std::make_unique<RewardStack>(built, env_rng.split(0));

    RegretTrace trace;
    trace.seed = rng.key();
    trace.action.reserve(horizon);
    trace.observation.reserve(horizon);
    trace.pseudo_regret.reserve(horizon);
    trace.realized_reward.reserve(horizon);
    trace.cum_suboptimal.reserve(horizon);

    std::int64_t suboptimal = 0;
    for (std::size_t step = 1; step <= horizon; ++step) {
        std::size_t a;
        switch (kind) {
            case AgentKind::thompson:
                if (use_particles)
                    a = optimal_action(inst, sample(cloud, agent_rng));
                else if (factored)
                    a = factored->choose(agent_rng);
                else
                    a = opt_of[sample(posterior, agent_rng)];
                break;
            case AgentKind::thompson_decoupled:
                a = decoupled->choose(agent_rng);
                break;
            case AgentKind::ucb1:
                a = ucb.choose(static_cast<std::int64_t>(step));
                break;
            case AgentKind::uniform_random:
                a = static_cast<std::size_t>(agent_rng.next_below(n_actions));
                break;
        }

        std::size_t y = stack ? stack->draw(a) : sample_observation(built, a, env_rng);
        double reward = inst.rewards.at(a, y);

        switch (kind) {
            case AgentKind::thompson:
                if (use_particles)
                    pf_update(cloud, a, y, inst.table, agent_rng);
                else if (factored)
                    factored->update(built.actions[a][0], y);
                else
                    update_inplace(posterior, a, y, inst.table);
                break;
            case AgentKind::thompson_decoupled:
                decoupled->update(a, y);
                break;
            case AgentKind::ucb1:
                ucb.record(a, reward);
                break;
            case AgentKind::uniform_random:
                break;
        }

        if (a != astar) ++suboptimal;
        trace.action.push_back(static_cast<std::uint32_t>(a));
        trace.observation.push_back(static_cast<std::uint32_t>(y));
        trace.pseudo_regret.push_back(gap[a]);
        trace.realized_reward.push_back(reward);
        trace.cum_suboptimal.push_back(suboptimal);

        if (opt.dump && opt.dump_every > 0 && step % opt.dump_every == 0) {
            if (use_particles)
                opt.dump(step, cloud.grid_weights(inst.n_thetas()));
            else if (factored)
                opt.dump(step, factored->grid_weights());
            else
                opt.dump(step, posterior.weights());
        }
    }
    return trace;
}

}  // namespace cbandit
