#pragma once

// Experiment drivers shared by `repdl reproduce` and the acceptance runner.
// Each driver returns a Report: a list of named checks with a verdict and a
// one-line detail, plus free-form notes for quantities that are only reported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "repdl/repdl.hpp"

namespace repdl::reproduce {

struct Check {
    std::string label;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string criterion;
    std::vector<Check> checks;
    std::vector<std::string> notes;
    double seconds = 0;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
    void check(std::string label, bool ok, std::string detail = {}) {
        checks.push_back({std::move(label), ok, std::move(detail)});
    }
    void note(std::string text) { notes.push_back(std::move(text)); }
};

struct Options {
    std::uint32_t table_runs = 100000;
    std::uint32_t envelope_runs = 1000;
    std::uint32_t ensemble_samples = 10000;
    std::uint32_t large_runs = 1000;
    std::uint64_t seed = 1;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

inline std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

inline std::string str(const ExactRational& r) {
    return numerator(r).str() + (denominator(r) == 1 ? "" : "/" + denominator(r).str());
}

// ---------------------------------------------------------------------------
// Policies

/// Command-line style policy description.
struct PolicySpec {
    std::string scheduler = "ud";      ///< sif | ud | random | ranked | mdp
    std::optional<ServerId> pushback;  ///< nonadaptive only
    RankKind rank = RankKind::Harmonic;
    TieBreak tie = TieBreak::LowestIndex;
    std::string init = "ud";           ///< ranked tie priority: ud | sif | none
};

inline SchedulerPolicy make_policy(const StorageScheme& scheme, const PolicySpec& spec) {
    if (spec.scheduler == "sif" || spec.scheduler == "ud") {
        auto order = spec.scheduler == "sif" ? smallest_index_first(scheme) : uniform_diversity(scheme);
        std::string name = spec.scheduler;
        if (spec.pushback) {
            order = pushback(order, scheme, *spec.pushback);
            name += "+pb" + std::to_string(*spec.pushback);
        }
        return SchedulerPolicy::nonadaptive(std::move(order), name);
    }
    if (spec.scheduler == "random") return SchedulerPolicy::random_work_conserving();
    if (spec.scheduler == "ranked") {
        std::optional<PlacementOrder> init;
        if (spec.init == "ud") init = uniform_diversity(scheme);
        else if (spec.init == "sif") init = smallest_index_first(scheme);
        else if (spec.init != "none") detail::fail(ErrorCode::InvalidParams, "unknown init order '" + spec.init + "'");
        return SchedulerPolicy::ranked(scheme, spec.rank, spec.tie, std::move(init), init ? spec.init : "");
    }
    if (spec.scheduler == "mdp") return SchedulerPolicy::mdp(mdp_solve<double>(scheme).table);
    detail::fail(ErrorCode::InvalidParams, "unknown scheduler '" + spec.scheduler + "'");
}

/// Every implemented policy family on `scheme`; the MDP table is added when
/// the scheme is small enough to solve.
inline std::vector<SchedulerPolicy> all_policies(const StorageScheme& scheme, std::uint32_t mdp_cap = 14) {
    std::vector<SchedulerPolicy> out;
    for (const char* s : {"sif", "ud"}) {
        out.push_back(make_policy(scheme, {s, std::nullopt}));
        out.push_back(make_policy(scheme, {s, ServerId{1}}));
    }
    out.push_back(make_policy(scheme, {"ranked", {}, RankKind::Greedy, TieBreak::LowestIndex, "none"}));
    out.push_back(make_policy(scheme, {"ranked", {}, RankKind::Harmonic, TieBreak::LowestIndex, "none"}));
    out.push_back(make_policy(scheme, {"ranked", {}, RankKind::Harmonic, TieBreak::LowestIndex, "ud"}));
    out.push_back(make_policy(scheme, {"ranked", {}, RankKind::Harmonic, TieBreak::SeededRandom, "none"}));
    out.push_back(make_policy(scheme, {"ranked", {}, RankKind::Greedy, TieBreak::SeededRandom, "none"}));
    out.push_back(SchedulerPolicy::random_work_conserving());
    if (scheme.fragments() <= mdp_cap) out.push_back(SchedulerPolicy::mdp(mdp_solve<double>(scheme).table));
    return out;
}

namespace impl {
template <class F>
Report timed(const std::string& name, F&& body) {
    Report r;
    r.criterion = name;
    const auto t0 = std::chrono::steady_clock::now();
    body(r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}
} // namespace impl

// ---------------------------------------------------------------------------
// Criteria

/// Exact mean completion times of the two four-fragment configurations under
/// uniform random work-conserving scheduling.
inline Report appendix_means(const Options& = {}) {
    return impl::timed("appendix-means", [](Report& r) {
        const auto random = SchedulerPolicy::random_work_conserving();
        const auto a = scheme_from_fragment_sets({{1, 2}, {2, 3}, {3, 4}, {4, 1}});
        const auto b = scheme_from_fragment_sets({{1, 3}, {2, 4}, {1, 3}, {2, 4}});
        const auto ma = exact_mean_download<ExactRational>(a, random, 1.0).mean_download_time;
        const auto mb = exact_mean_download<ExactRational>(b, random, 1.0).mean_download_time;
        r.check("config A", ma == ExactRational(21, 16), "E[D_V] = " + str(ma) + " (expected 21/16)");
        r.check("config B", mb == ExactRational(11, 8), "E[D_V] = " + str(mb) + " (expected 11/8)");
    });
}

struct TableRow {
    std::string label;
    double reference = 0;
    SimulationSummary summary;
};

/// Mean download times on the q = 11 plane and the 133-fragment cyclic scheme.
inline Report table_download_times(const Options& opt = {}, std::vector<TableRow>* rows_out = nullptr) {
    return impl::timed("table-download-times", [&](Report& r) {
        const double mu = 1e-5;
        const auto pp = projective_plane(11, mu);
        const auto cyc = cyclic_shift(133, 12, mu);
        MonteCarloConfig cfg;
        cfg.runs = opt.table_runs;
        cfg.seed = opt.seed;
        cfg.mu = mu;
        cfg.threads = opt.threads;

        std::vector<TableRow> rows;
        auto run = [&](const std::string& label, const StorageScheme& s, const SchedulerPolicy& p, double ref) {
            rows.push_back({label, ref, monte_carlo(s, p, cfg)});
        };
        run("ud+pushback", pp, make_policy(pp, {"ud", ServerId{1}}), 121678.81);
        run("sif", pp, make_policy(pp, {"sif", std::nullopt}), 122378.76);
        run("harmonic(ud init)", pp, make_policy(pp, {"ranked", {}, RankKind::Harmonic, TieBreak::LowestIndex, "ud"}),
            120886.04);
        run("cyclic ud", cyc, make_policy(cyc, {"ud", std::nullopt}), 139629.39);

        for (const auto& row : rows) {
            const double mean = row.summary.mean_download_time;
            const double rel = (mean - row.reference) / row.reference;
            r.check(row.label, std::abs(rel) <= 0.015,
                    fmt("mean %.2f", mean) + fmt(" +- %.2f", row.summary.stderr_download_time) +
                        fmt(" vs %.2f", row.reference) + fmt(" (%+.3f%%)", 100 * rel));
        }
        const double ud = rows[0].summary.mean_download_time, sif = rows[1].summary.mean_download_time,
                     harm = rows[2].summary.mean_download_time, cyclic = rows[3].summary.mean_download_time;
        r.check("design beats cyclic", std::max({ud, sif, harm}) < cyclic,
                fmt("worst plane policy %.2f", std::max({ud, sif, harm})) + fmt(" < cyclic %.2f", cyclic));
        r.check("adaptive <= nonadaptive", harm <= std::min(ud, sif),
                fmt("harmonic %.2f", harm) + fmt(" <= min(ud+pb, sif) %.2f", std::min(ud, sif)));
        r.note("runs=" + std::to_string(cfg.runs) + " seed=" + std::to_string(cfg.seed) + " mu=1e-5");
        if (rows_out) *rows_out = std::move(rows);
    });
}

namespace impl {
/// Standard error used for the per-l comparison. When every sample agrees the
/// sample variance is 0; then the bound Var(N) <= B (B - E[N]) for 0 <= N <= B
/// stands in for the unobserved spread.
inline double ensemble_se(double sample_se, double B, double expected, std::uint32_t samples) {
    if (sample_se > 0) return sample_se;
    return std::sqrt(std::max(0.0, B * (B - expected)) / samples);
}
} // namespace impl

inline Report ensemble_closed_forms(const Options& opt = {}) {
    return impl::timed("ensemble-closed-forms", [&](Report& r) {
        const std::uint32_t B = 20, V = 50, R = 5;
        for (auto kind : {EnsembleKind::Replication, EnsembleKind::Mds}) {
            const bool rep = kind == EnsembleKind::Replication;
            const auto mc = ensemble_monte_carlo(B, V, R, kind, OrderMode::FragmentUniform, opt.ensemble_samples,
                                                 opt.seed);
            const auto cf = rep ? random_rep_expected(B, V, R) : random_mds_expected(B, V, R);
            double worst = 0;
            std::uint32_t worst_l = 0;
            for (std::uint32_t l = 0; l < V; ++l) {
                const double se = impl::ensemble_se(mc.stderr_useful[l], B, cf.expected_useful[l], mc.samples);
                const double z = se > 0 ? std::abs(mc.mean_useful[l] - cf.expected_useful[l]) / se
                                        : (mc.mean_useful[l] == cf.expected_useful[l] ? 0.0 : INFINITY);
                if (z > worst) {
                    worst = z;
                    worst_l = l;
                }
            }
            const std::string name = rep ? "replication" : "mds";
            r.check(name + " per-l within 3 se", worst <= 3.0,
                    fmt("max |z| = %.2f", worst) + " at l=" + std::to_string(worst_l));
            const double rel = (mc.aggregate - cf.aggregate) / cf.aggregate;
            r.check(name + " aggregate within 0.5%", std::abs(rel) <= 0.005,
                    fmt("mc %.6f", mc.aggregate) + fmt(" vs closed form %.6f", cf.aggregate) +
                        fmt(" (%+.4f%%)", 100 * rel));
        }
    });
}

struct ModeMeans {
    Fraction fragment_uniform;
    Fraction server_uniform;
};

/// E[N(I_1)] of the coded ensemble by enumerating all B^(VR) placements and
/// every first download under each ordering model.
inline ModeMeans mds_first_step_exact(std::uint32_t B, std::uint32_t V, std::uint32_t R) {
    const std::uint32_t n = V * R;
    std::uint64_t placements = 1;
    for (std::uint32_t i = 0; i < n; ++i) placements *= B;
    Fraction fu, su;
    RandomMdsPlacement p;
    p.B = B;
    p.V = V;
    p.R = R;
    p.chi.resize(n);
    for (std::uint64_t code = 0; code < placements; ++code) {
        std::uint64_t c = code;
        for (auto& s : p.chi) {
            s = static_cast<ServerId>(c % B) + 1;
            c /= B;
        }
        const auto scheme = p.scheme();
        const DownloadState start(scheme);
        for (FragmentId v = 1; v <= n; ++v)
            fu += Fraction(advance_state(start, v).n_useful(), std::int64_t{n} * static_cast<std::int64_t>(placements));
        const auto useful = start.useful_servers();
        for (ServerId b : useful) {
            const auto left = start.residual(b);
            for (FragmentId v : left)
                su += Fraction(advance_state(start, v).n_useful(),
                               static_cast<std::int64_t>(placements * useful.size() * left.size()));
        }
    }
    return {fu, su};
}

inline Report mode_gap(const Options& opt = {}) {
    return impl::timed("mode-gap", [&](Report& r) {
        const auto m = mds_first_step_exact(2, 2, 2);
        r.check("fragment-uniform", m.fragment_uniform == Fraction(7, 4),
                "E[N(I_1)] = " + m.fragment_uniform.str() + " (expected 7/4)");
        r.check("server-uniform", m.server_uniform == Fraction(13, 8),
                "E[N(I_1)] = " + m.server_uniform.str() + " (expected 13/8)");
        for (auto mode : {OrderMode::FragmentUniform, OrderMode::ServerUniform}) {
            const auto mc = ensemble_monte_carlo(2, 2, 2, EnsembleKind::Mds, mode, opt.ensemble_samples, opt.seed);
            r.note(std::string(mode == OrderMode::FragmentUniform ? "fragment" : "server") +
                   fmt("-uniform sampled E[N(I_1)] = %.4f", mc.mean_useful[1]) +
                   fmt(" +- %.4f", mc.stderr_useful[1]));
        }
    });
}

/// Trajectory envelope over schemes x policies.
inline Report bound_envelope(const Options& opt = {}) {
    return impl::timed("bound-envelope", [&](Report& r) {
        struct Case {
            std::string name;
            StorageScheme scheme;
        };
        const std::vector<Case> cases{{"pp2", projective_plane(2)},
                                      {"pp3", projective_plane(3)},
                                      {"pp11", projective_plane(11)},
                                      {"cyclic133", cyclic_shift(133, 12)}};
        std::uint64_t upper_viol = 0, lower_viol = 0, ceiling_viol = 0, profile_ceiling_viol = 0, trajectories = 0;
        double worst_ratio = 0;
        std::string worst_case;
        for (const auto& c : cases) {
            const auto& s = c.scheme;
            const auto& p = s.params();
            const auto ub = useful_upper_bound(p.B, p.V, p.R);
            const auto lb = design_lb_profile(s);
            const double ceiling = ub.remark_normalized_sum.to_double();
            const double profile_ceiling = ub.profile_normalized_sum.to_double();
            MonteCarloConfig cfg;
            cfg.runs = opt.envelope_runs;
            cfg.seed = opt.seed;
            cfg.threads = opt.threads;
            for (const auto& pol : all_policies(s)) {
                const auto mc = monte_carlo(s, pol, cfg);
                trajectories += mc.runs;
                for (std::uint32_t l = 0; l < p.V; ++l) {
                    upper_viol += mc.max_useful[l] > ub.profile[l];
                    lower_viol += mc.min_useful[l] < std::max(lb.design[l], lb.general[l]);
                }
                // Extremes over trajectories decide whether any single one breaks a ceiling.
                ceiling_viol += mc.max_trajectory_aggregate > ceiling + 1e-12;
                profile_ceiling_viol += mc.max_trajectory_aggregate > profile_ceiling + 1e-12;
                if (mc.min_trajectory_aggregate - ceiling > worst_ratio) {
                    worst_ratio = mc.min_trajectory_aggregate - ceiling;
                    worst_case = c.name + " " + pol.describe();
                }
            }
            r.note(c.name + ": aggregate ceiling 1-(m+1)/(2V) = " + ub.remark_normalized_sum.str() +
                   fmt(" = %.6f", ceiling) + ", profile sum = " + ub.profile_normalized_sum.str() +
                   fmt(" = %.6f", profile_ceiling));
        }
        r.check("upper profile", upper_viol == 0, std::to_string(upper_viol) + " (scheme, policy, l) violations");
        r.check("lower profiles", lower_viol == 0, std::to_string(lower_viol) + " (scheme, policy, l) violations");
        r.check("aggregate <= 1-(m+1)/(2V)", ceiling_viol == 0,
                std::to_string(ceiling_viol) + " (scheme, policy) cells exceed it" +
                    (worst_case.empty() ? "" : fmt("; even the smallest aggregate exceeds it by %.4f in ", worst_ratio) +
                                                   worst_case));
        r.note("aggregate <= upper-profile sum: " + std::to_string(profile_ceiling_viol) + " violations");
        r.note(std::to_string(trajectories) + " trajectories");
    });
}

/// Small schemes used for the exhaustive policy comparison.
inline std::vector<std::pair<std::string, StorageScheme>> small_schemes(std::uint32_t max_v = 8) {
    std::vector<std::pair<std::string, StorageScheme>> out;
    out.emplace_back("pp2", projective_plane(2));
    out.emplace_back("affine2", affine_plane(2));
    for (std::uint32_t V = 2; V <= max_v; ++V)
        for (std::uint32_t R = 1; R <= V; ++R)
            out.emplace_back("cyclic" + std::to_string(V) + "/" + std::to_string(R), cyclic_shift(V, R));
    out.emplace_back("four-a", scheme_from_fragment_sets({{1, 2}, {2, 3}, {3, 4}, {4, 1}}));
    out.emplace_back("four-b", scheme_from_fragment_sets({{1, 3}, {2, 4}, {1, 3}, {2, 4}}));
    return out;
}

inline Report mdp_gap(const Options& = {}) {
    return impl::timed("mdp-gap", [](Report& r) {
        const auto pp = projective_plane(2);
        const auto sol = mdp_solve<ExactRational>(pp);
        const auto harm = policy_evaluate_exact<ExactRational>(pp, SchedulerPolicy::ranked(pp, RankKind::Harmonic))
                              .aggregate_reward;
        const ExactRational gap = (sol.optimal_value - harm) / sol.optimal_value;
        r.check("pp 3/7 optimum >= harmonic", sol.optimal_value >= harm,
                "optimal " + str(sol.optimal_value) + ", harmonic " + str(harm) + ", relative gap " + str(gap));

        std::uint64_t evaluated = 0, beaten = 0, penultimate_bad = 0, penultimate_checked = 0;
        std::string first_beaten;
        for (const auto& [name, s] : small_schemes()) {
            const auto opt = mdp_solve<ExactRational>(s);
            for (const auto& p : all_policies(s, 0)) {
                const auto v = policy_evaluate_exact<ExactRational>(s, p).aggregate_reward;
                ++evaluated;
                if (v > opt.optimal_value) {
                    ++beaten;
                    if (first_beaten.empty()) first_beaten = name + " " + p.describe();
                }
            }
            const auto V = s.fragments();
            if (V < 2) continue;
            const ExactRational expect(s.params().R, V);
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << V); ++m)
                if (std::popcount(m) == static_cast<int>(V) - 2) {
                    ++penultimate_checked;
                    penultimate_bad += opt.reward_to_go[m] != expect;
                }
        }
        r.check("optimum >= every policy (V <= 8)", beaten == 0,
                std::to_string(evaluated) + " (scheme, policy) pairs, " + std::to_string(beaten) + " exceed the optimum" +
                    (first_beaten.empty() ? "" : " (first: " + first_beaten + ")"));
        r.check("penultimate value = R/V", penultimate_bad == 0,
                std::to_string(penultimate_checked) + " (V-2)-subsets, " + std::to_string(penultimate_bad) + " mismatches");
    });
}

inline Report design_integrity(const Options& = {}) {
    return impl::timed("design-integrity", [](Report& r) {
        for (std::uint32_t q : {2u, 3u, 5u, 7u, 11u}) {
            const auto d = scheme_to_design(projective_plane(q));
            const auto lambda = verify_t_design(d, 2);
            const auto laws = conservation_check(d, 2, 1);
            r.check("pp q=" + std::to_string(q), lambda == std::optional<std::uint64_t>(1) && laws.incidence_law &&
                                                      laws.subset_law == std::optional<bool>(true),
                    "2-(" + std::to_string(d.points) + "," + std::to_string(q + 1) + ",lambda=" +
                        (lambda ? std::to_string(*lambda) : std::string("none")) + "), conservation " +
                        (laws.incidence_law && laws.subset_law.value_or(false) ? "ok" : "fails"));
        }
        for (std::uint32_t q : {2u, 3u, 5u}) {
            const auto s = affine_plane(q);
            const auto d = scheme_to_design(s);
            const auto lambda = verify_t_design(d, 2);
            const bool shape = d.points == q * q && s.params().K == q && s.params().completely_utilizing;
            r.check("affine q=" + std::to_string(q), shape && lambda == std::optional<std::uint64_t>(1),
                    "2-(" + std::to_string(d.points) + "," + std::to_string(s.params().K) + ",lambda=" +
                        (lambda ? std::to_string(*lambda) : std::string("none")) + ")");
        }
    });
}

inline Report large_storage(const Options& opt = {}) {
    return impl::timed("large-storage", [&](Report& r) {
        std::uint64_t states = 0, bad_states = 0, exact_runs = 0, bad_exact = 0;
        for (std::uint32_t V = 1; V <= 6; ++V)
            for (std::uint32_t B = 1; B <= 4; ++B)
                for (std::uint32_t K = V; K <= 2 * V; ++K) {
                    if ((B * K) % V != 0) continue;
                    const auto p = large_storage_scheme(V, B, K);
                    // Every trajectory of every work-conserving policy visits only these subsets.
                    for (std::uint64_t m = 0; m + 1 < (std::uint64_t{1} << V); ++m) {
                        std::vector<FragmentId> seq;
                        for (FragmentId v = 1; v <= V; ++v)
                            if (m >> (v - 1) & 1u) seq.push_back(v);
                        ++states;
                        bad_states += DownloadState::after(p.scheme, seq).n_useful() != B;
                    }
                    for (const auto& pol : all_policies(p.scheme)) {
                        ++exact_runs;
                        const auto e = policy_evaluate_exact<ExactRational>(p.scheme, pol);
                        for (const auto& n : e.expected_useful) bad_exact += n != ExactRational(B);
                    }
                }
        r.check("exhaustive V <= 6", bad_states == 0 && bad_exact == 0,
                std::to_string(states) + " states, " + std::to_string(exact_runs) + " exact policy evaluations, " +
                    std::to_string(bad_states + bad_exact) + " with N < B");

        std::uint64_t sampled = 0, bad_sampled = 0;
        MonteCarloConfig cfg;
        cfg.runs = opt.large_runs;
        cfg.seed = opt.seed;
        cfg.threads = opt.threads;
        for (auto [V, B, K] : {std::tuple{7u, 3u, 7u}, std::tuple{8u, 4u, 10u}, std::tuple{12u, 5u, 12u},
                               std::tuple{20u, 6u, 30u}}) {
            const auto p = large_storage_scheme(V, B, K);
            for (const auto& pol : all_policies(p.scheme)) {
                const auto mc = monte_carlo(p.scheme, pol, cfg);
                sampled += mc.runs;
                for (auto n : mc.min_useful) bad_sampled += n != B;
            }
        }
        r.check("sampled V > 6", bad_sampled == 0,
                std::to_string(sampled) + " trajectories, " + std::to_string(bad_sampled) + " (l, policy) minima below B");
    });
}

struct Target {
    const char* name;
    std::function<Report(const Options&)> run;
};

inline const std::vector<Target>& targets() {
    static const std::vector<Target> t{
        {"appendix-means", [](const Options& o) { return appendix_means(o); }},
        {"table-download-times", [](const Options& o) { return table_download_times(o); }},
        {"ensemble-closed-forms", [](const Options& o) { return ensemble_closed_forms(o); }},
        {"mode-gap", [](const Options& o) { return mode_gap(o); }},
        {"bound-envelope", [](const Options& o) { return bound_envelope(o); }},
        {"mdp-gap", [](const Options& o) { return mdp_gap(o); }},
        {"design-integrity", [](const Options& o) { return design_integrity(o); }},
        {"large-storage", [](const Options& o) { return large_storage(o); }},
    };
    return t;
}

inline void print_report(std::FILE* out, const Report& r) {
    for (const auto& c : r.checks)
        std::fprintf(out, "  %s %s: %s\n", c.pass ? "ok  " : "FAIL", c.label.c_str(), c.detail.c_str());
    for (const auto& n : r.notes) std::fprintf(out, "  note %s\n", n.c_str());
}

} // namespace repdl::reproduce
