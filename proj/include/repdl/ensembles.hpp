#pragma once

// Random placements. Each replica position is an independent uniform server,
// computed directly from (seed, fragment, replica) so samples can be drawn in
// any order.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "repdl/fraction.hpp"
#include "repdl/random.hpp"
#include "repdl/scheme.hpp"

namespace repdl {

namespace detail {
inline constexpr std::uint64_t kReplicationDomain = 0x5245504cull << 32; // "REPL"
inline constexpr std::uint64_t kMdsDomain = 0x4d445321ull << 32;         // "MDS!"

inline void check_ensemble_params(std::uint32_t B, std::uint32_t V, std::uint32_t R) {
    if (B == 0 || V == 0 || R == 0) fail(ErrorCode::InvalidParams, "B, V and R must be at least 1");
}
} // namespace detail

struct RandomReplicationPlacement {
    std::uint32_t B = 0, V = 0, R = 0;
    std::vector<std::vector<ServerId>> theta;      ///< theta[v-1][r-1], with repeats
    std::vector<std::vector<ServerId>> occupancy;  ///< deduplicated, sorted
    std::vector<Fraction> alpha_per_server;        ///< replicas on b divided by V

    /// Replicas of fragment v held by server b.
    std::uint32_t multiplicity(FragmentId v, ServerId b) const {
        std::uint32_t n = 0;
        for (ServerId s : theta.at(v - 1)) n += s == b;
        return n;
    }
    bool has_duplicate(FragmentId v) const { return occupancy.at(v - 1).size() < R; }
    double duplicate_fraction() const {
        std::uint32_t n = 0;
        for (FragmentId v = 1; v <= V; ++v) n += has_duplicate(v);
        return static_cast<double>(n) / V;
    }
    /// The deduplicated placement as a scheme on all B servers (some may be empty).
    StorageScheme scheme(double mu = 1.0) const { return StorageScheme(occupancy, mu, B); }
};

inline ServerId replication_server(std::uint64_t seed, std::uint32_t B, FragmentId v, std::uint32_t r) {
    const CounterRng rng(seed, detail::kReplicationDomain | v);
    return static_cast<ServerId>(CounterRng::scale_index(rng.at(r - 1), B) + 1);
}

inline RandomReplicationPlacement sample_random_replication(std::uint32_t B, std::uint32_t V, std::uint32_t R,
                                                            std::uint64_t seed) {
    detail::check_ensemble_params(B, V, R);
    RandomReplicationPlacement p;
    p.B = B;
    p.V = V;
    p.R = R;
    p.theta.assign(V, {});
    p.occupancy.assign(V, {});
    std::vector<std::int64_t> count(B, 0);
    for (FragmentId v = 1; v <= V; ++v) {
        auto& row = p.theta[v - 1];
        for (std::uint32_t r = 1; r <= R; ++r) {
            row.push_back(replication_server(seed, B, v, r));
            ++count[row.back() - 1];
        }
        auto& phi = p.occupancy[v - 1];
        phi = row;
        std::sort(phi.begin(), phi.end());
        phi.erase(std::unique(phi.begin(), phi.end()), phi.end());
    }
    for (auto c : count) p.alpha_per_server.emplace_back(c, V);
    return p;
}

struct RandomMdsPlacement {
    std::uint32_t B = 0, V = 0, R = 0;
    std::vector<ServerId> chi;              ///< server of coded fragment c, c = 1..VR
    std::vector<Fraction> alpha_per_server; ///< coded fragments on b divided by V

    std::uint32_t distinct_servers() const {
        std::vector<bool> seen(B + 1, false);
        std::uint32_t n = 0;
        for (ServerId b : chi)
            if (!seen[b]) {
                seen[b] = true;
                ++n;
            }
        return n;
    }
    /// Coded fragments as singleton-occupancy "fragments" on B servers.
    StorageScheme scheme(double mu = 1.0) const {
        std::vector<std::vector<ServerId>> occ;
        occ.reserve(chi.size());
        for (ServerId b : chi) occ.push_back({b});
        return StorageScheme(std::move(occ), mu, B);
    }
};

inline RandomMdsPlacement sample_random_mds(std::uint32_t B, std::uint32_t V, std::uint32_t R, std::uint64_t seed) {
    detail::check_ensemble_params(B, V, R);
    RandomMdsPlacement p;
    p.B = B;
    p.V = V;
    p.R = R;
    const CounterRng rng(seed, detail::kMdsDomain);
    const std::uint64_t total = std::uint64_t{V} * R;
    p.chi.reserve(total);
    std::vector<std::int64_t> count(B, 0);
    for (std::uint64_t c = 0; c < total; ++c) {
        p.chi.push_back(static_cast<ServerId>(CounterRng::scale_index(rng.at(c), B) + 1));
        ++count[p.chi.back() - 1];
    }
    for (auto c : count) p.alpha_per_server.emplace_back(c, V);
    return p;
}

} // namespace repdl
