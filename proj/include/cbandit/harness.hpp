#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "cbandit/agents.hpp"
#include "cbandit/bounds.hpp"
#include "cbandit/io.hpp"

namespace cbandit {

// log-spaced checkpoints, 10 per decade, deduplicated, always ending at T
inline std::vector<std::size_t> log_checkpoints(std::size_t horizon) {
    std::vector<std::size_t> cps;
    for (int k = 0;; ++k) {
        double t = std::pow(10.0, static_cast<double>(k) / 10.0);
        if (t > static_cast<double>(horizon)) break;
        std::size_t ti = static_cast<std::size_t>(std::llround(t));
        if (ti < 1) ti = 1;
        if (cps.empty() || cps.back() != ti) cps.push_back(ti);
    }
    if (cps.empty() || cps.back() != horizon) cps.push_back(horizon);
    return cps;
}

inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("degenerate slope window");
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    if (den == 0.0) throw std::invalid_argument("degenerate slope window");
    return num / den;
}

// Least-squares slope of the mean cumulative suboptimal-play count against
// ln t, over checkpoints in the final `window` fraction of the horizon.
inline double estimate_log_slope(const std::vector<RegretTrace>& traces, double window = 0.1) {
    if (traces.empty()) throw std::invalid_argument("no traces");
    const std::size_t horizon = traces[0].length();
    const double t_min = window * static_cast<double>(horizon);
    std::vector<double> xs, ys;
    for (std::size_t t : log_checkpoints(horizon)) {
        if (static_cast<double>(t) < t_min) continue;
        double mean = 0.0;
        for (const auto& tr : traces) mean += static_cast<double>(tr.cum_suboptimal[t - 1]);
        mean /= static_cast<double>(traces.size());
        xs.push_back(std::log(static_cast<double>(t)));
        ys.push_back(mean);
    }
    return least_squares_slope(xs, ys);
}

inline BoundReport evaluate_bounds(const BuiltInstance& built, double epsilon, double horizon,
                                   bool enable_bruteforce) {
    BoundReport r;
    r.epsilon = epsilon;
    r.horizon = horizon;
    r.chi = chi_threshold(epsilon, horizon);

    auto dmatrix = divergence_matrix(built.instance);
    auto regions = decision_regions(built.instance, dmatrix);
    auto gaps = gap_summary(regions, dmatrix);
    r.vacuous = gaps.vacuous;
    r.delta_min = gaps.vacuous ? 0.0 : gaps.delta_min;
    r.resolvability = gaps.resolvability;

    try {
        r.c_relaxation = c_log_t_relaxation(dmatrix, regions, epsilon, horizon);
    } catch (const std::exception& e) {
        r.relaxation_note = e.what();
    }
    if (enable_bruteforce) {
        try {
            auto bf = c_log_t_bruteforce(dmatrix, regions, epsilon, horizon);
            r.c_bruteforce = bf.value;
            r.bruteforce_feasible = bf.feasible;
            if (!bf.dropped.empty())
                r.bruteforce_note = "dropped " + std::to_string(bf.dropped.size()) +
                                    " action(s) with empty S'";
        } catch (const std::exception& e) {
            r.bruteforce_note = e.what();
        }
    }
    if (!gaps.vacuous && gaps.resolvability >= 1)
        r.prop2 = prop2_bound(built.instance.n_actions(), gaps.resolvability, gaps.delta_min,
                              epsilon, horizon);

    auto dec = decoupled_constant(gaps, regions.astar);
    r.decoupled = dec.value;
    r.decoupled_skipped = dec.skipped;

    // closed forms where the environment matches their setting
    const auto& spec = built.spec;
    if (spec.kind == EnvKind::mab || spec.kind == EnvKind::full_info) {
        std::vector<double> mu = built.instance.grid.points[built.instance.truth_index];
        std::sort(mu.begin(), mu.end());
        std::size_t m = spec.kind == EnvKind::mab ? 1 : spec.subset_size;
        try {
            r.cor2 = cor2_constant(mu, m);
        } catch (const std::exception&) {
            // strict-gap precondition not met; constant undefined
        }
    }
    if (spec.kind == EnvKind::max_subset) {
        // cor3 is defined on the geometric grid {1-b^R, ..., 1-b} only
        double beta = 0.0;
        for (double v : spec.per_arm_values) beta = std::max(beta, 1.0 - v);
        bool geometric = beta > 0.0 && beta < 1.0;
        for (double v : spec.per_arm_values) {
            double k = std::log(1.0 - v) / std::log(beta);
            if (std::abs(k - std::round(k)) > 1e-9) geometric = false;
        }
        if (geometric) {
            const auto& mu = built.instance.grid.points[built.instance.truth_index];
            std::vector<double> comp(mu.size());
            for (std::size_t i = 0; i < mu.size(); ++i) comp[i] = 1.0 - mu[i];
            std::sort(comp.begin(), comp.end());  // mu_min = product of M smallest 1-mu_i
            double mu_min = 1.0;
            for (std::size_t i = 0; i < spec.subset_size; ++i) mu_min *= comp[i];
            try {
                r.cor3 = cor3_bound(spec.n_arms, spec.subset_size, mu_min, beta, epsilon,
                                    horizon);
            } catch (const std::exception&) {
            }
        }
    }
    return r;
}

struct AgentSummary {
    std::string agent;
    struct Checkpoint {
        std::size_t t;
        double mean_cum_regret;
        double ci95_half_width;
        double mean_cum_suboptimal;
    };
    std::vector<Checkpoint> checkpoints;  // at T/10, T/2, T
    double log_slope = 0.0;
};

struct SummaryReport {
    json resolved_config;
    std::vector<AgentSummary> agents;
    std::optional<BoundReport> bounds;
};

inline json summary_report_to_json(const SummaryReport& rep) {
    json j;
    j["config"] = rep.resolved_config;
    json agents = json::array();
    for (const auto& a : rep.agents) {
        json aj;
        aj["agent"] = a.agent;
        json cps = json::array();
        for (const auto& cp : a.checkpoints) {
            json cj;
            cj["t"] = cp.t;
            cj["mean_cum_regret"] = round12(cp.mean_cum_regret);
            cj["ci95_half_width"] = round12(cp.ci95_half_width);
            cj["mean_cum_suboptimal"] = round12(cp.mean_cum_suboptimal);
            cps.push_back(cj);
        }
        aj["checkpoints"] = cps;
        aj["log_slope_final_decade"] = round12(a.log_slope);
        agents.push_back(aj);
    }
    j["agents"] = agents;
    if (rep.bounds) j["bounds"] = bound_report_to_json(*rep.bounds);
    return j;
}

// R independent episodes per agent, substream seeds derived from
// (master seed, agent index, replication index). Deterministic byte-for-byte
// given the config.
inline SummaryReport run_experiment(const ExperimentConfig& config,
                                    const std::string& out_dir) {
    BuiltInstance built = build_instance(config.env);
    auto report = validate_instance(built.instance);
    if (!report.ok()) {
        std::string msg = "instance validation failed:";
        for (const auto& v : report.violations) msg += "\n  - " + v;
        throw std::runtime_error(msg);
    }

    std::filesystem::create_directories(out_dir);
    Rng master(Rng::mix64(config.seed + Rng::GOLDEN));

    SummaryReport summary;
    summary.resolved_config = experiment_config_to_json(config);

    const std::size_t horizon = config.horizon;
    std::vector<std::size_t> cps = {std::max<std::size_t>(1, horizon / 10),
                                    std::max<std::size_t>(1, horizon / 2), horizon};

    for (std::size_t ai = 0; ai < config.agents.size(); ++ai) {
        AgentKind kind = config.agents[ai];
        std::string name = agent_kind_name(kind);
        std::vector<RegretTrace> traces;
        traces.reserve(config.replications);

        for (std::size_t rep = 0; rep < config.replications; ++rep) {
            EpisodeOptions opt;
            opt.engine = config.engine;
            opt.n_particles = config.n_particles;
            opt.reward_stack = config.reward_stack;

            std::ofstream dump_file;
            if (config.posterior_dump_every > 0 &&
                (kind == AgentKind::thompson)) {
                std::string dump_path = out_dir + "/posterior_" + name + "_" +
                                        std::to_string(rep) + ".csv";
                dump_file.open(dump_path, std::ios::binary);
                dump_file << "step,grid_index,weight\n";
                opt.dump_every = config.posterior_dump_every;
                opt.dump = [&dump_file](std::size_t step, const std::vector<double>& w) {
                    write_posterior_dump_row(dump_file, step, w);
                };
            }

            RegretTrace trace =
                run_episode(built, kind, horizon, master.split2(ai, rep), opt);

            std::ostringstream csv;
            write_trace_csv(csv, trace, name, rep);
            write_text_file(out_dir + "/trace_" + name + "_" + std::to_string(rep) + ".csv",
                            csv.str());
            traces.push_back(std::move(trace));
        }

        AgentSummary as;
        as.agent = name;
        for (std::size_t t : cps) {
            std::vector<double> regret(traces.size(), 0.0);
            double mean_sub = 0.0;
            for (std::size_t r = 0; r < traces.size(); ++r) {
                double cum = 0.0;
                for (std::size_t i = 0; i < t; ++i) cum += traces[r].pseudo_regret[i];
                regret[r] = cum;
                mean_sub += static_cast<double>(traces[r].cum_suboptimal[t - 1]);
            }
            double mean = std::accumulate(regret.begin(), regret.end(), 0.0) / regret.size();
            double var = 0.0;
            for (double v : regret) var += (v - mean) * (v - mean);
            var = regret.size() > 1 ? var / (regret.size() - 1) : 0.0;
            double ci = 1.96 * std::sqrt(var / static_cast<double>(regret.size()));
            as.checkpoints.push_back({t, mean, ci, mean_sub / traces.size()});
        }
        if (horizon >= 10) as.log_slope = estimate_log_slope(traces, 0.1);
        summary.agents.push_back(std::move(as));
    }

    if (config.evaluate_bounds) {
        summary.bounds = evaluate_bounds(built, config.epsilon,
                                         static_cast<double>(config.horizon),
                                         config.enable_bruteforce);
        write_text_file(out_dir + "/bounds.json",
                        bound_report_to_json(*summary.bounds).dump(2) + "\n");
    }
    write_text_file(out_dir + "/summary.json", summary_report_to_json(summary).dump(2) + "\n");
    return summary;
}

}  // namespace cbandit
