#pragma once

// Useful-server profiles of random placements under two download models:
//  - ServerUniform: the physical chain. The next download comes from a
//    uniformly chosen useful server, which serves a uniformly chosen
//    remaining fragment of its own.
//  - FragmentUniform: the next download is a uniformly chosen remaining
//    fragment (distinct fragment for replication, coded fragment for MDS),
//    independent of the placement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "repdl/download_state.hpp"
#include "repdl/ensembles.hpp"
#include "repdl/random.hpp"

namespace repdl {

enum class OrderMode { ServerUniform, FragmentUniform };
enum class EnsembleKind { Replication, Mds };

namespace detail {

/// Walks `steps` downloads over `scheme` and returns N before each one.
inline std::vector<std::uint32_t> ensemble_walk(const StorageScheme& scheme, std::uint32_t steps, OrderMode mode,
                                                CounterRng& rng) {
    std::vector<std::uint32_t> profile;
    profile.reserve(steps);
    DownloadState state(scheme);
    std::vector<FragmentId> remaining(scheme.fragments());
    for (FragmentId v = 1; v <= scheme.fragments(); ++v) remaining[v - 1] = v;
    for (std::uint32_t l = 0; l < steps; ++l) {
        profile.push_back(state.n_useful());
        FragmentId v = 0;
        if (mode == OrderMode::FragmentUniform) {
            const std::size_t k = rng.uniform_index(remaining.size());
            v = remaining[k];
            remaining[k] = remaining.back();
            remaining.pop_back();
        } else {
            const ServerId b = state.useful_view()[rng.uniform_index(state.n_useful())];
            auto k = rng.uniform_index(state.residual_size(b));
            for (FragmentId w : scheme.fragment_set(b))
                if (!state.is_downloaded(w) && k-- == 0) {
                    v = w;
                    break;
                }
        }
        state.advance(v);
    }
    return profile;
}

} // namespace detail

inline std::vector<std::uint32_t> simulate_ensemble_profile(const RandomReplicationPlacement& placement,
                                                            OrderMode mode, CounterRng& rng) {
    return detail::ensemble_walk(placement.scheme(), placement.V, mode, rng);
}

/// The file completes after V coded downloads, so the profile has V entries.
inline std::vector<std::uint32_t> simulate_ensemble_profile(const RandomMdsPlacement& placement, OrderMode mode,
                                                            CounterRng& rng) {
    return detail::ensemble_walk(placement.scheme(), placement.V, mode, rng);
}

struct EnsembleSummary {
    std::vector<double> mean_useful;   ///< per l
    std::vector<double> stderr_useful; ///< per l
    double aggregate = 0;              ///< sum over l of mean N / (BV)
    double aggregate_stderr = 0;
    double duplicate_frequency = 0;    ///< replication only: fraction of fragments with a repeated server
    double duplicate_stderr = 0;
    std::uint32_t samples = 0;
};

/// Sample s uses placement seed CounterRng(seed, domain).at(s) and walk
/// generator CounterRng(seed, s), so results are reproducible per sample.
inline EnsembleSummary ensemble_monte_carlo(std::uint32_t B, std::uint32_t V, std::uint32_t R, EnsembleKind kind,
                                            OrderMode mode, std::uint32_t samples, std::uint64_t seed) {
    if (samples == 0) detail::fail(ErrorCode::InvalidParams, "samples must be at least 1");
    const CounterRng placement_seeds(seed, 0xE45EB1Eull << 32);
    std::vector<std::uint64_t> sum(V, 0), sum_sq(V, 0);
    double agg_sum = 0, agg_sq = 0, dup_sum = 0, dup_sq = 0;
    const double bv = static_cast<double>(B) * V;

    for (std::uint32_t s = 0; s < samples; ++s) {
        CounterRng rng(seed, s);
        const std::uint64_t pseed = placement_seeds.at(s);
        std::vector<std::uint32_t> profile;
        if (kind == EnsembleKind::Replication) {
            const auto p = sample_random_replication(B, V, R, pseed);
            profile = simulate_ensemble_profile(p, mode, rng);
            const double d = p.duplicate_fraction();
            dup_sum += d;
            dup_sq += d * d;
        } else {
            profile = simulate_ensemble_profile(sample_random_mds(B, V, R, pseed), mode, rng);
        }
        std::uint64_t total = 0;
        for (std::uint32_t l = 0; l < V; ++l) {
            sum[l] += profile[l];
            sum_sq[l] += std::uint64_t{profile[l]} * profile[l];
            total += profile[l];
        }
        const double a = static_cast<double>(total) / bv;
        agg_sum += a;
        agg_sq += a * a;
    }

    auto sem = [samples](double mean, double mean_sq) {
        if (samples < 2) return 0.0;
        const double var = std::max(0.0, (mean_sq - mean * mean) * samples / (samples - 1.0));
        return std::sqrt(var / samples);
    };
    EnsembleSummary out;
    out.samples = samples;
    out.mean_useful.resize(V);
    out.stderr_useful.resize(V);
    for (std::uint32_t l = 0; l < V; ++l) {
        const double m = static_cast<double>(sum[l]) / samples;
        out.mean_useful[l] = m;
        out.stderr_useful[l] = sem(m, static_cast<double>(sum_sq[l]) / samples);
    }
    out.aggregate = agg_sum / samples;
    out.aggregate_stderr = sem(out.aggregate, agg_sq / samples);
    if (kind == EnsembleKind::Replication) {
        out.duplicate_frequency = dup_sum / samples;
        out.duplicate_stderr = sem(out.duplicate_frequency, dup_sq / samples);
    }
    return out;
}

} // namespace repdl
