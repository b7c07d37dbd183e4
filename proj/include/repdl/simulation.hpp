#pragma once

// Monte Carlo over the download process. With i.i.d. exponential fragment
// times and instant cancellation, the process is a jump chain: the next
// download arrives after Exp(N(I_l) mu) and comes from a server drawn
// uniformly from U(I_l), which downloads its scheduled fragment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "repdl/download_state.hpp"
#include "repdl/policy.hpp"
#include "repdl/random.hpp"

namespace repdl {

struct TrajectoryRecord {
    std::vector<double> download_instants;      ///< D_0 = 0, ..., D_V
    std::vector<FragmentId> fragment_order;     ///< v_1, ..., v_V
    std::vector<std::uint32_t> useful_profile;  ///< N(I_0), ..., N(I_{V-1})

    double completion_time() const noexcept { return download_instants.back(); }
};

inline TrajectoryRecord simulate_run(const StorageScheme& scheme, const SchedulerPolicy& policy, double mu,
                                     CounterRng& rng) {
    const std::uint32_t V = scheme.fragments();
    TrajectoryRecord rec;
    rec.download_instants.reserve(V + 1);
    rec.fragment_order.reserve(V);
    rec.useful_profile.reserve(V);
    rec.download_instants.push_back(0.0);

    DownloadState state(scheme);
    double now = 0.0;
    while (!state.complete()) {
        const std::uint32_t n = state.n_useful();
        rec.useful_profile.push_back(n);
        now += rng.exponential(n * mu);
        const ServerId winner = state.useful_view()[rng.uniform_index(n)];
        const FragmentId v = policy.decide(state, winner, rng);
        state.advance(v);
        rec.fragment_order.push_back(v);
        rec.download_instants.push_back(now);
    }
    return rec;
}

/// Validation mode: every useful server runs its own exponential clock on its
/// scheduled fragment. A server keeps its clock while its decision is
/// unchanged and restarts it otherwise.
inline TrajectoryRecord simulate_run_clocks(const StorageScheme& scheme, const SchedulerPolicy& policy, double mu,
                                            CounterRng& rng) {
    const std::uint32_t B = scheme.servers();
    const std::uint32_t V = scheme.fragments();
    constexpr double kIdle = std::numeric_limits<double>::infinity();
    TrajectoryRecord rec;
    rec.download_instants.push_back(0.0);
    rec.fragment_order.reserve(V);

    DownloadState state(scheme);
    std::vector<FragmentId> job(B + 1, 0);
    std::vector<double> finish(B + 1, kIdle);
    double now = 0.0;
    auto reschedule = [&] {
        for (ServerId b = 1; b <= B; ++b) {
            if (!state.is_useful(b)) {
                job[b] = 0;
                finish[b] = kIdle;
                continue;
            }
            const FragmentId d = policy.decide(state, b, rng);
            if (d != job[b]) {
                job[b] = d;
                finish[b] = now + rng.exponential(mu);
            }
        }
    };
    reschedule();
    while (!state.complete()) {
        rec.useful_profile.push_back(state.n_useful());
        ServerId winner = 1;
        for (ServerId b = 2; b <= B; ++b)
            if (finish[b] < finish[winner]) winner = b;
        now = finish[winner];
        const FragmentId v = job[winner];
        state.advance(v);
        rec.fragment_order.push_back(v);
        rec.download_instants.push_back(now);
        reschedule();
    }
    return rec;
}

struct MonteCarloConfig {
    std::uint32_t runs = 1000;
    std::uint64_t seed = 1;
    double mu = 1.0;
    unsigned threads = 1;
    bool per_server_clocks = false;
};

struct SimulationSummary {
    double mean_download_time = 0;
    double stderr_download_time = std::numeric_limits<double>::quiet_NaN();
    double ci95_lo = std::numeric_limits<double>::quiet_NaN();
    double ci95_hi = std::numeric_limits<double>::quiet_NaN();
    bool ci_reliable = false; ///< false below 30 runs

    std::vector<double> mean_useful;       ///< mean N(I_l)
    std::vector<double> normalized_useful; ///< mean N(I_l) / B
    double normalized_aggregate = 0;       ///< sum over l of mean N(I_l) / (BV)

    // Extremes over all trajectories, for envelope checks.
    std::vector<std::uint32_t> min_useful;
    std::vector<std::uint32_t> max_useful;
    double min_trajectory_aggregate = 0;
    double max_trajectory_aggregate = 0;

    std::vector<double> download_times; ///< D_V per run, in run order
    std::uint32_t runs = 0;
    std::uint64_t seed = 0;
    double mu = 1.0;
    std::string policy;
    std::string scheme_hash;
};

/// Run i draws from CounterRng(seed, i) only, so the summary does not depend
/// on the thread count.
inline SimulationSummary monte_carlo(const StorageScheme& scheme, const SchedulerPolicy& policy,
                                     const MonteCarloConfig& cfg) {
    if (cfg.runs == 0) detail::fail(ErrorCode::InvalidParams, "runs must be at least 1");
    if (!(cfg.mu > 0)) detail::fail(ErrorCode::InvalidParams, "mu must be positive");
    const std::uint32_t V = scheme.fragments();
    const std::uint32_t B = scheme.servers();

    struct Partial {
        std::vector<std::uint64_t> sum;
        std::vector<std::uint32_t> lo, hi;
        std::uint64_t agg_lo = std::numeric_limits<std::uint64_t>::max(), agg_hi = 0;
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, cfg.runs));
    std::vector<Partial> parts(threads);
    std::vector<double> times(cfg.runs);

    auto work = [&](unsigned t) {
        Partial& p = parts[t];
        p.sum.assign(V, 0);
        p.lo.assign(V, std::numeric_limits<std::uint32_t>::max());
        p.hi.assign(V, 0);
        const std::uint32_t begin = static_cast<std::uint32_t>(std::uint64_t{cfg.runs} * t / threads);
        const std::uint32_t end = static_cast<std::uint32_t>(std::uint64_t{cfg.runs} * (t + 1) / threads);
        for (std::uint32_t i = begin; i < end; ++i) {
            CounterRng rng(cfg.seed, i);
            const auto rec = cfg.per_server_clocks ? simulate_run_clocks(scheme, policy, cfg.mu, rng)
                                                   : simulate_run(scheme, policy, cfg.mu, rng);
            times[i] = rec.completion_time();
            std::uint64_t agg = 0;
            for (std::uint32_t l = 0; l < V; ++l) {
                const auto n = rec.useful_profile[l];
                p.sum[l] += n;
                p.lo[l] = std::min(p.lo[l], n);
                p.hi[l] = std::max(p.hi[l], n);
                agg += n;
            }
            p.agg_lo = std::min(p.agg_lo, agg);
            p.agg_hi = std::max(p.agg_hi, agg);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }

    SimulationSummary s;
    s.runs = cfg.runs;
    s.seed = cfg.seed;
    s.mu = cfg.mu;
    s.policy = policy.describe();
    s.scheme_hash = scheme_hash(scheme);
    s.mean_useful.assign(V, 0.0);
    s.normalized_useful.assign(V, 0.0);
    s.min_useful.assign(V, std::numeric_limits<std::uint32_t>::max());
    s.max_useful.assign(V, 0);
    std::vector<std::uint64_t> sum(V, 0);
    std::uint64_t agg_lo = std::numeric_limits<std::uint64_t>::max(), agg_hi = 0;
    for (const auto& p : parts) {
        if (p.sum.empty()) continue;
        for (std::uint32_t l = 0; l < V; ++l) {
            sum[l] += p.sum[l];
            s.min_useful[l] = std::min(s.min_useful[l], p.lo[l]);
            s.max_useful[l] = std::max(s.max_useful[l], p.hi[l]);
        }
        agg_lo = std::min(agg_lo, p.agg_lo);
        agg_hi = std::max(agg_hi, p.agg_hi);
    }
    const double bv = static_cast<double>(B) * V;
    for (std::uint32_t l = 0; l < V; ++l) {
        s.mean_useful[l] = static_cast<double>(sum[l]) / cfg.runs;
        s.normalized_useful[l] = s.mean_useful[l] / B;
    }
    s.normalized_aggregate =
        static_cast<double>(std::accumulate(sum.begin(), sum.end(), std::uint64_t{0})) / cfg.runs / bv;
    s.min_trajectory_aggregate = static_cast<double>(agg_lo) / bv;
    s.max_trajectory_aggregate = static_cast<double>(agg_hi) / bv;

    double total = 0;
    for (double t : times) total += t;
    s.mean_download_time = total / cfg.runs;
    if (cfg.runs > 1) {
        double ss = 0;
        for (double t : times) ss += (t - s.mean_download_time) * (t - s.mean_download_time);
        s.stderr_download_time = std::sqrt(ss / (cfg.runs - 1) / cfg.runs);
        s.ci95_lo = s.mean_download_time - 1.959963984540054 * s.stderr_download_time;
        s.ci95_hi = s.mean_download_time + 1.959963984540054 * s.stderr_download_time;
    }
    s.ci_reliable = cfg.runs >= 30;
    s.download_times = std::move(times);
    return s;
}

/// Jensen bound on E[D_V]: V^2 / (mu * sum of E[N(I_l)]).
inline double mean_download_lower_bound(const std::vector<double>& expected_useful, double mu) {
    if (expected_useful.empty()) detail::fail(ErrorCode::EmptyProfile, "empty useful-server profile");
    double total = 0;
    for (double n : expected_useful) {
        if (!(n > 0)) detail::fail(ErrorCode::InvalidParams, "profile entries must be positive");
        total += n;
    }
    const double V = static_cast<double>(expected_useful.size());
    return V * V / (mu * total);
}

} // namespace repdl
