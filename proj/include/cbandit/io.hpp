#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbandit/agents.hpp"
#include "cbandit/bounds.hpp"
#include "cbandit/envs.hpp"
#include "cbandit/geometry.hpp"

namespace cbandit {

using json = nlohmann::json;

// All emitted numbers carry 12 significant decimal digits.
inline std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// round-trips a double through its 12-digit decimal form so JSON output
// matches the documented precision
inline double round12(double x) {
    return std::strtod(fmt12(x).c_str(), nullptr);
}

inline EnvKind env_kind_from_name(const std::string& s) {
    if (s == "mab") return EnvKind::mab;
    if (s == "full_info" || s == "fullinfo") return EnvKind::full_info;
    if (s == "max") return EnvKind::max_subset;
    if (s == "makespan") return EnvKind::makespan;
    throw std::invalid_argument("unknown environment kind: " + s);
}

inline EnvironmentSpec environment_spec_from_json(const json& j) {
    EnvironmentSpec spec;
    spec.kind = env_kind_from_name(j.at("environment").get<std::string>());
    spec.n_arms = j.at("n_arms").get<std::size_t>();
    spec.per_arm_values = j.at("per_arm_values").get<std::vector<double>>();
    spec.truth = j.at("truth").get<std::vector<double>>();
    spec.gamma = j.value("gamma", kDefaultGamma);
    spec.subset_size = j.value("subset_size", std::size_t{1});
    spec.n_machines = j.value("n_machines", std::size_t{2});
    if (j.contains("duration_support")) {
        auto d = j.at("duration_support").get<std::vector<int>>();
        if (d.size() != 2 || d[0] >= d[1])
            throw std::invalid_argument("duration_support must be [lo, hi] with lo < hi");
        spec.duration_lo = d[0];
        spec.duration_hi = d[1];
    }
    if (j.contains("grid_cap")) spec.grid_cap = j.at("grid_cap").get<std::size_t>();
    return spec;
}

struct ExperimentConfig {
    EnvironmentSpec env;
    std::vector<AgentKind> agents;
    std::size_t horizon = 1000;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    bool evaluate_bounds = false;
    bool enable_bruteforce = false;
    PosteriorEngine engine = PosteriorEngine::exact;
    std::size_t n_particles = 10000;
    bool reward_stack = false;
    std::size_t posterior_dump_every = 0;
};

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    c.env = environment_spec_from_json(j.at("instance"));
    for (const auto& name : j.value("agents", std::vector<std::string>{"thompson"}))
        c.agents.push_back(agent_kind_from_name(name));
    c.horizon = j.value("horizon", std::size_t{1000});
    c.replications = j.value("replications", std::size_t{1});
    c.seed = j.value("seed", std::uint64_t{0});
    c.epsilon = j.value("epsilon", 0.1);
    c.evaluate_bounds = j.value("evaluate_bounds", false);
    c.enable_bruteforce = j.value("enable_bruteforce", false);
    c.n_particles = j.value("n_particles", std::size_t{10000});
    c.reward_stack = j.value("reward_stack", false);
    c.posterior_dump_every = j.value("posterior_dump_every", std::size_t{0});
    std::string engine = j.value("posterior_engine", std::string("exact"));
    if (engine == "exact")
        c.engine = PosteriorEngine::exact;
    else if (engine == "particle")
        c.engine = PosteriorEngine::particle;
    else
        throw std::invalid_argument("unknown posterior engine: " + engine);
    if (c.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (c.replications < 1) throw std::invalid_argument("replications must be >= 1");
    return c;
}

inline json environment_spec_to_json(const EnvironmentSpec& spec) {
    json j;
    j["environment"] = env_kind_name(spec.kind);
    j["n_arms"] = spec.n_arms;
    j["per_arm_values"] = spec.per_arm_values;
    j["truth"] = spec.truth;
    j["gamma"] = spec.gamma;
    if (spec.kind == EnvKind::full_info || spec.kind == EnvKind::max_subset)
        j["subset_size"] = spec.subset_size;
    if (spec.kind == EnvKind::makespan) {
        j["n_machines"] = spec.n_machines;
        j["duration_support"] = std::vector<int>{spec.duration_lo, spec.duration_hi};
    }
    return j;
}

inline json experiment_config_to_json(const ExperimentConfig& c) {
    json j;
    j["instance"] = environment_spec_to_json(c.env);
    std::vector<std::string> agents;
    for (auto k : c.agents) agents.push_back(agent_kind_name(k));
    j["agents"] = agents;
    j["horizon"] = c.horizon;
    j["replications"] = c.replications;
    j["seed"] = c.seed;
    j["epsilon"] = c.epsilon;
    j["evaluate_bounds"] = c.evaluate_bounds;
    j["enable_bruteforce"] = c.enable_bruteforce;
    j["posterior_engine"] = c.engine == PosteriorEngine::exact ? "exact" : "particle";
    j["n_particles"] = c.n_particles;
    j["reward_stack"] = c.reward_stack;
    j["posterior_dump_every"] = c.posterior_dump_every;
    return j;
}

inline json bound_report_to_json(const BoundReport& r) {
    json j;
    j["epsilon"] = r.epsilon;
    j["horizon"] = r.horizon;
    j["chi_nats"] = round12(r.chi);
    if (r.c_bruteforce)
        j["c_bruteforce"] = round12(*r.c_bruteforce);
    j["bruteforce_feasible"] = r.bruteforce_feasible;
    if (!r.bruteforce_note.empty()) j["bruteforce_note"] = r.bruteforce_note;
    if (r.c_relaxation)
        j["c_relaxation"] = round12(*r.c_relaxation);
    if (!r.relaxation_note.empty()) j["relaxation_note"] = r.relaxation_note;
    if (r.prop2) j["prop2_bound"] = round12(*r.prop2);
    if (r.cor2) j["cor2_constant"] = round12(*r.cor2);
    if (r.cor3) j["cor3_bound"] = round12(*r.cor3);
    j["decoupled_constant"] = round12(r.decoupled);
    j["decoupled_skipped"] = r.decoupled_skipped;
    j["vacuous"] = r.vacuous;
    j["delta_min_nats"] = round12(r.delta_min);
    j["resolvability_L"] = r.resolvability;
    return j;
}

inline json geometry_report_to_json(const BuiltInstance& built, const DivergenceMatrix& dmatrix,
                                    const DecisionRegions& regions, const GapSummary& gaps,
                                    std::size_t dmatrix_cap = 10000) {
    json j;
    j["n_thetas"] = dmatrix.n_thetas;
    j["n_actions"] = dmatrix.n_actions;
    j["astar"] = regions.astar;
    j["truth_snap_distance"] = round12(built.truth_snap_distance);

    if (dmatrix.n_thetas * dmatrix.n_actions <= dmatrix_cap) {
        json rows = json::array();
        for (std::size_t t = 0; t < dmatrix.n_thetas; ++t) {
            json row = json::array();
            for (std::size_t a = 0; a < dmatrix.n_actions; ++a)
                row.push_back(round12(dmatrix.at(t, a)));
            rows.push_back(row);
        }
        j["dmatrix_nats"] = rows;
    } else {
        j["dmatrix_nats"] = "elided (size above cap)";
    }

    json regions_j = json::array();
    for (std::size_t a = 0; a < dmatrix.n_actions; ++a) {
        std::size_t in_region = 0;
        for (std::size_t t = 0; t < dmatrix.n_thetas; ++t)
            if (regions.region_of[t] == a) ++in_region;
        json rj;
        rj["action"] = a;
        rj["region_size"] = in_region;
        rj["s_prime_size"] = regions.s_prime[a].size();
        rj["s_double_prime_size"] = regions.s_double_prime[a].size();
        if (!std::isnan(gaps.delta_a[a])) rj["delta_a_nats"] = round12(gaps.delta_a[a]);
        if (std::isfinite(gaps.xi_per_action[a]))
            rj["xi_a_nats"] = round12(gaps.xi_per_action[a]);
        regions_j.push_back(rj);
    }
    j["regions"] = regions_j;
    if (std::isfinite(gaps.xi_global)) j["xi_nats"] = round12(gaps.xi_global);
    if (std::isfinite(gaps.delta_min)) j["delta_min_nats"] = round12(gaps.delta_min);
    j["resolvability_L"] = gaps.resolvability;
    j["resolvability_threshold_nats"] = round12(gaps.threshold);
    j["vacuous"] = gaps.vacuous;
    return j;
}

constexpr const char* kTraceSchema =
    "step,action,observation,pseudo_regret,reward,cum_suboptimal";

inline void write_trace_csv(std::ostream& os, const RegretTrace& trace,
                            const std::string& agent, std::size_t replication) {
    os << "# cbandit trace v1\n";
    os << "# agent=" << agent << " replication=" << replication << " seed=" << trace.seed
       << "\n";
    os << kTraceSchema << "\n";
    for (std::size_t i = 0; i < trace.length(); ++i) {
        os << (i + 1) << ',' << trace.action[i] << ',' << trace.observation[i] << ','
           << fmt12(trace.pseudo_regret[i]) << ',' << fmt12(trace.realized_reward[i]) << ','
           << trace.cum_suboptimal[i] << "\n";
    }
}

inline void write_posterior_dump_row(std::ostream& os, std::size_t step,
                                     const std::vector<double>& weights) {
    for (std::size_t i = 0; i < weights.size(); ++i)
        os << step << ',' << i << ',' << fmt12(weights[i]) << "\n";
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace cbandit
