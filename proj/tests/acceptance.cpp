// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cbandit/harness.hpp"

using namespace cbandit;
namespace fs = std::filesystem;

#ifndef CONFIG_DIR
#define CONFIG_DIR "configs"
#endif

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s  criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// random small instance: <= 3 arms, <= 3 grid values per arm
BuiltInstance random_small_instance(Rng& rng, int kind_cycle) {
    const double pool[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    EnvironmentSpec spec;
    spec.n_arms = 1 + rng.next_below(3);
    std::size_t n_values = 2 + rng.next_below(2);
    std::vector<double> vals;
    while (vals.size() < n_values) {
        double v = pool[rng.next_below(9)];
        if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
    }
    std::sort(vals.begin(), vals.end());
    spec.per_arm_values = vals;
    spec.truth.resize(spec.n_arms);
    for (auto& t : spec.truth) t = vals[rng.next_below(vals.size())];
    switch (kind_cycle % 3) {
        case 0: spec.kind = EnvKind::mab; break;
        case 1:
            spec.kind = EnvKind::full_info;
            spec.subset_size = 1 + rng.next_below(spec.n_arms);
            break;
        default:
            spec.kind = EnvKind::max_subset;
            spec.subset_size = 1 + rng.next_below(spec.n_arms);
            break;
    }
    return build_instance(spec);
}

using History = std::vector<std::pair<std::size_t, std::size_t>>;

History random_history(const BuiltInstance& built, std::size_t steps, Rng& rng) {
    History h;
    for (std::size_t i = 0; i < steps; ++i) {
        std::size_t a = rng.next_below(built.instance.n_actions());
        h.push_back({a, sample_observation(built, a, rng)});
    }
    return h;
}

PosteriorState sequential(const BuiltInstance& built, const History& h) {
    auto st = init_posterior(built.instance.grid);
    for (auto [a, y] : h) update_inplace(st, a, y, built.instance.table);
    return st;
}

double max_weight_diff(const PosteriorState& a, const PosteriorState& b) {
    auto wa = a.weights(), wb = b.weights();
    double d = 0.0;
    for (std::size_t i = 0; i < wa.size(); ++i) d = std::max(d, std::abs(wa[i] - wb[i]));
    return d;
}

void criterion1() {
    Timer timer;
    Rng rng(101);
    double worst = 0.0;
    for (int it = 0; it < 200; ++it) {
        auto built = random_small_instance(rng, it);
        auto h = random_history(built, 50, rng);
        auto seq = sequential(built, h);
        HistoryCounts counts(built.instance.n_actions(), built.instance.n_obs());
        for (auto [a, y] : h) counts.add(a, y);
        auto batch = exact_from_history(built.instance.grid, counts, built.instance.table);
        worst = std::max(worst, max_weight_diff(seq, batch));
    }
    report(1, "posterior oracle equivalence", worst <= 1e-10,
           "max weight diff " + fmt(worst) + " over 200 instances, " + fmt(timer.secs()) + "s");
}

void criterion2() {
    Timer timer;
    Rng rng(202);
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
        auto built = random_small_instance(rng, it);
        auto h = random_history(built, 50, rng);
        auto ref = sequential(built, h);
        // Fisher-Yates permutation of the history
        for (std::size_t i = h.size(); i > 1; --i)
            std::swap(h[i - 1], h[rng.next_below(i)]);
        worst = std::max(worst, max_weight_diff(ref, sequential(built, h)));
    }
    report(2, "permutation invariance", worst <= 1e-12,
           "max weight diff " + fmt(worst) + " over 100 histories, " + fmt(timer.secs()) + "s");
}

void criterion3() {
    Timer timer;
    Rng rng(303);

    EnvironmentSpec fi;
    fi.kind = EnvKind::full_info;
    fi.n_arms = 4;
    fi.subset_size = 2;
    fi.per_arm_values = {0.3, 0.6};
    fi.truth = {0.3, 0.6, 0.3, 0.6};
    auto bfi = build_instance(fi);
    const auto& mu_fi = bfi.instance.grid.points[bfi.instance.truth_index];
    double worst_fi = 0.0;
    for (int it = 0; it < 1000; ++it) {
        std::size_t t = rng.next_below(bfi.instance.n_thetas());
        std::size_t a = rng.next_below(bfi.instance.n_actions());
        double sum = 0.0;
        for (int i : bfi.actions[a])
            sum += bernoulli_kl(mu_fi[i], bfi.instance.grid.points[t][i]);
        double d = marginal_kl(bfi.instance.table, bfi.instance.truth_index, t, a);
        worst_fi = std::max(worst_fi, std::abs(d - sum));
    }

    EnvironmentSpec mx;
    mx.kind = EnvKind::max_subset;
    mx.n_arms = 4;
    mx.subset_size = 2;
    mx.per_arm_values = {0.5, 0.75};
    mx.truth = {0.5, 0.5, 0.75, 0.75};
    auto bmx = build_instance(mx);
    const auto& mu_mx = bmx.instance.grid.points[bmx.instance.truth_index];
    double worst_mx = 0.0;
    for (int it = 0; it < 1000; ++it) {
        std::size_t t = rng.next_below(bmx.instance.n_thetas());
        std::size_t a = rng.next_below(bmx.instance.n_actions());
        double expect = bernoulli_kl(max_success_prob(mu_mx, bmx.actions[a]),
                                     max_success_prob(bmx.instance.grid.points[t],
                                                      bmx.actions[a]));
        double d = marginal_kl(bmx.instance.table, bmx.instance.truth_index, t, a);
        worst_mx = std::max(worst_mx, std::abs(d - expect));
    }

    report(3, "KL structure identities", worst_fi <= 1e-10 && worst_mx <= 1e-10,
           "additivity diff " + fmt(worst_fi) + ", max-reduction diff " + fmt(worst_mx) + ", " +
               fmt(timer.secs()) + "s");
}

void criterion4() {
    Timer timer;

    EnvironmentSpec mx;
    mx.kind = EnvKind::max_subset;
    mx.n_arms = 2;
    mx.subset_size = 2;
    mx.per_arm_values = {0.5, 0.75};
    mx.truth = {0.5, 0.75};
    auto built = build_instance(mx);
    Rng rng(404);
    int ones = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (sample_observation(built, 0, rng) == 1) ++ones;
    double freq = static_cast<double>(ones) / n;
    bool max_ok = std::abs(freq - 0.875) <= 0.01;

    // makespan: convolution/CDF pmf vs joint enumeration, J = 4
    const std::vector<double> theta{0.2, 0.4, 0.6, 0.9};
    const int lo = 1, hi = 3;
    double worst = 0.0;
    for (const auto& part : enumerate_partitions(4, 2)) {
        auto pmf = makespan_pmf(part, theta, 2, lo, hi);
        std::map<int, double> oracle;
        for (int mask = 0; mask < 16; ++mask) {
            double p = 1.0;
            int lat[2] = {0, 0};
            for (int j = 0; j < 4; ++j) {
                bool high = (mask >> j) & 1;
                p *= high ? theta[j] : 1.0 - theta[j];
                lat[part[j]] += high ? hi : lo;
            }
            oracle[std::max(lat[0], lat[1])] += p;
        }
        if (pmf.size() != oracle.size()) worst = 1.0;
        for (const auto& [v, p] : oracle)
            worst = std::max(worst, std::abs((pmf.count(v) ? pmf.at(v) : 0.0) - p));
    }
    bool ms_ok = worst <= 1e-12;

    report(4, "environment fidelity", max_ok && ms_ok,
           "MAX freq " + fmt(freq) + " vs 0.875, makespan pmf diff " + fmt(worst) + ", " +
               fmt(timer.secs()) + "s");
}

void criterion5() {
    Timer timer;
    Rng rng(505);
    int used = 0, attempts = 0;
    bool ok = true;
    std::string why;
    while (used < 100 && attempts < 1000) {
        ++attempts;
        // synthetic |A|=3 geometry: theta 0 truth, up to 9 suboptimal thetas
        DivergenceMatrix dm;
        DecisionRegions regions;
        std::size_t per_action = 1 + rng.next_below(3);
        std::size_t n_thetas = 1 + 2 * per_action + rng.next_below(3);  // <= 10
        dm.n_actions = 3;
        dm.n_thetas = n_thetas;
        dm.d.assign(n_thetas * 3, 0.0);
        regions.astar = 0;
        regions.region_of.assign(n_thetas, 0);
        regions.s_prime.resize(3);
        regions.s_double_prime.resize(3);
        for (std::size_t t = 1; t < n_thetas; ++t) {
            std::size_t a = 1 + rng.next_below(2);
            dm.d[t * 3 + 1] = 0.05 + 0.4 * rng.next_double();
            dm.d[t * 3 + 2] = 0.05 + 0.4 * rng.next_double();
            regions.region_of[t] = a;
            regions.s_prime[a].push_back(t);
        }
        if (regions.s_prime[1].empty() || regions.s_prime[2].empty()) continue;

        double prev = -1.0;
        bool feasible_all = true;
        for (double T : {100.0, 1000.0, 10000.0}) {
            auto brute = c_log_t_bruteforce(dm, regions, 0.1, T);
            if (!brute.feasible) { feasible_all = false; break; }
            double relax = c_log_t_relaxation(dm, regions, 0.1, T);
            if (brute.value > relax + 1e-9) {
                ok = false;
                why = "bruteforce " + fmt(brute.value) + " > relaxation " + fmt(relax);
            }
            if (brute.value < prev - 1e-9) {
                ok = false;
                why = "bruteforce not monotone in T";
            }
            prev = brute.value;
        }
        if (feasible_all) ++used;
    }
    if (used < 100) {
        ok = false;
        why = "only " + std::to_string(used) + " feasible instances in " +
              std::to_string(attempts) + " attempts";
    }
    report(5, "bound ordering", ok,
           (why.empty() ? std::to_string(used) + " instances checked" : why) + ", " +
               fmt(timer.secs()) + "s");
}

void criterion6() {
    Timer timer;
    bool ok = true;
    std::string why;

    // cor2 at M=1 equals the decoupled constant on-grid
    EnvironmentSpec spec;
    spec.kind = EnvKind::mab;
    spec.n_arms = 5;
    spec.per_arm_values = {0.1, 0.2, 0.3, 0.4, 0.5};
    spec.truth = {0.1, 0.2, 0.3, 0.4, 0.5};
    auto built = build_instance(spec);
    auto dm = divergence_matrix(built.instance);
    auto regions = decision_regions(built.instance, dm);
    auto gaps = gap_summary(regions, dm);
    double dec = decoupled_constant(gaps, regions.astar).value;
    double c2 = cor2_constant(spec.per_arm_values, 1);
    if (std::abs(dec - c2) > 1e-9) {
        ok = false;
        why = "cor2 " + fmt(c2) + " vs decoupled " + fmt(dec);
    }

    // binomial ratio identity for N <= 12
    for (std::size_t n = 3; n <= 12 && ok; ++n)
        for (std::size_t m = 1; 2 * m <= n - 1 && ok; ++m) {
            double a = cor3_bound(n, m, 0.3, 0.5, 0.1, 1000.0);
            double dec_form = std::log(2.0) * (1.1 / 0.9) *
                              (1.0 + binomial_coefficient(n, m)) * std::log(1000.0) /
                              (0.3 * 0.3 * 0.5);
            double lhs = a / dec_form;
            double rhs = (1.0 + binomial_coefficient(n - 1, m)) /
                         (1.0 + binomial_coefficient(n, m));
            if (std::abs(lhs - rhs) > 1e-12 * rhs) {
                ok = false;
                why = "cor3 ratio mismatch at N=" + std::to_string(n) +
                      " M=" + std::to_string(m);
            }
        }

    // the |A|=2 brute-force worked example
    DivergenceMatrix dm2;
    dm2.n_actions = 2;
    dm2.n_thetas = 2;
    dm2.d = {0.0, 0.0, 0.0, 0.5};
    DecisionRegions r2;
    r2.astar = 0;
    r2.region_of = {0, 1};
    r2.s_prime = {{}, {1}};
    r2.s_double_prime = {{}, {}};
    auto brute = c_log_t_bruteforce(dm2, r2, 0.1, 1000.0);
    if (!brute.feasible || std::abs(brute.value - 17.0) > 1e-12) {
        ok = false;
        why = "worked example gave " + fmt(brute.value) + " not 17";
    }
    report(6, "closed-form cross-checks", ok,
           (why.empty() ? "cor2/cor3/bruteforce all match" : why) + ", " + fmt(timer.secs()) +
               "s");
}

// mean cumulative suboptimal plays at step t (1-based) across traces
double mean_sub(const std::vector<RegretTrace>& traces, std::size_t t) {
    double s = 0.0;
    for (const auto& tr : traces) s += static_cast<double>(tr.cum_suboptimal[t - 1]);
    return s / static_cast<double>(traces.size());
}

double mean_cum_regret(const std::vector<RegretTrace>& traces, std::size_t t) {
    double s = 0.0;
    for (const auto& tr : traces)
        for (std::size_t i = 0; i < t; ++i) s += tr.pseudo_regret[i];
    return s / static_cast<double>(traces.size());
}

// episodes with the same substream derivation as the harness
std::vector<RegretTrace> run_agent(const ExperimentConfig& cfg, const BuiltInstance& built,
                                   std::size_t agent_index) {
    Rng master(Rng::mix64(cfg.seed + Rng::GOLDEN));
    std::vector<RegretTrace> traces;
    for (std::size_t rep = 0; rep < cfg.replications; ++rep)
        traces.push_back(run_episode(built, cfg.agents[agent_index], cfg.horizon,
                                     master.split2(agent_index, rep)));
    return traces;
}

void criterion7() {
    Timer timer;
    auto cfg = experiment_config_from_json(load_json_file(std::string(CONFIG_DIR) +
                                                          "/mab_n5.json"));
    auto built = build_instance(cfg.env);
    auto traces = run_agent(cfg, built, 0);
    double slope = estimate_log_slope(traces, 0.1);
    double c2 = cor2_constant({0.1, 0.2, 0.3, 0.4, 0.5}, 1);
    const std::size_t T = cfg.horizon;
    double inc_first = mean_sub(traces, T / 8) - mean_sub(traces, T / 16);
    double inc_last = mean_sub(traces, T) - mean_sub(traces, T / 2);
    bool ok = slope > 0.0 && std::isfinite(slope) && slope <= 3.0 * c2 &&
              inc_last < inc_first;
    report(7, "logarithmic regret scaling", ok,
           "slope " + fmt(slope) + " vs cap " + fmt(3.0 * c2) + ", doubling-window increments " +
               fmt(inc_first) + " -> " + fmt(inc_last) + ", " + fmt(timer.secs()) + "s");
}

void criterion8() {
    Timer timer;
    auto check = [&](const std::string& file, double ratio_cap, std::string& detail) {
        auto cfg = experiment_config_from_json(load_json_file(std::string(CONFIG_DIR) + "/" +
                                                              file));
        auto built = build_instance(cfg.env);
        auto coupled = run_agent(cfg, built, 0);
        auto decoupled = run_agent(cfg, built, 1);
        double rc = mean_cum_regret(coupled, cfg.horizon);
        double rd = mean_cum_regret(decoupled, cfg.horizon);
        detail += file + " ratio " + fmt(rc / rd) + " (cap " + fmt(ratio_cap) + "); ";
        return rc < ratio_cap * rd;
    };
    std::string detail;
    bool fi_ok = check("fullinfo_n6_m2.json", 0.5, detail);
    bool mx_ok = check("max_n5_m2.json", 0.8, detail);
    report(8, "coupling advantage", fi_ok && mx_ok, detail + fmt(timer.secs()) + "s");
}

void criterion9() {
    Timer timer;
    auto cfg = experiment_config_from_json(load_json_file(std::string(CONFIG_DIR) +
                                                          "/mab_small.json"));
    fs::path base = fs::temp_directory_path() / "cbandit_acceptance";
    fs::remove_all(base);
    run_experiment(cfg, (base / "a").string());
    run_experiment(cfg, (base / "b").string());
    bool ok = true;
    std::string why;
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
        if (entry.path().extension() != ".csv") continue;
        ++compared;
        std::ifstream fa(entry.path(), std::ios::binary);
        std::ifstream fb(base / "b" / entry.path().filename(), std::ios::binary);
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str()) {
            ok = false;
            why = "mismatch in " + entry.path().filename().string();
        }
    }
    if (compared == 0) {
        ok = false;
        why = "no CSV traces found";
    }
    fs::remove_all(base);
    report(9, "determinism", ok,
           (why.empty() ? std::to_string(compared) + " CSVs byte-identical" : why) + ", " +
               fmt(timer.secs()) + "s");
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
