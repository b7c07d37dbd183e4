#pragma once

// Storage-scheme data model: occupancy sets Phi_v (servers holding fragment v)
// and the derived fragment sets S_b (fragments held by server b). All ids are
// 1-based, matching the [V] / [B] convention used in file formats and output.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repdl/error.hpp"
#include "repdl/fraction.hpp"

namespace repdl {

using FragmentId = std::uint32_t;
using ServerId = std::uint32_t;

struct SystemParams {
    std::uint32_t B = 0; ///< servers
    std::uint32_t V = 0; ///< fragments
    std::uint32_t R = 0; ///< replication factor (max |Phi_v| when non-uniform)
    std::uint32_t K = 0; ///< per-server load (max |S_b| when non-uniform)
    Fraction alpha;      ///< K / V
    double mu = 1.0;     ///< per-fragment download rate
    bool completely_utilizing = false;

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

class StorageScheme {
public:
    StorageScheme() = default;

    /// Validates and indexes an occupancy list; see build_scheme.
    StorageScheme(std::vector<std::vector<ServerId>> occupancy, double mu, std::optional<std::uint32_t> servers = {}) {
        if (occupancy.empty()) detail::fail(ErrorCode::EmptyOccupancy, "no fragments given");
        std::uint32_t max_server = 0;
        for (std::size_t i = 0; i < occupancy.size(); ++i) {
            auto& phi = occupancy[i];
            if (phi.empty())
                detail::fail(ErrorCode::EmptyOccupancy, "fragment " + std::to_string(i + 1) + " is stored nowhere");
            std::sort(phi.begin(), phi.end());
            for (std::size_t j = 0; j < phi.size(); ++j) {
                if (phi[j] == 0)
                    detail::fail(ErrorCode::IdOutOfRange,
                                 "fragment " + std::to_string(i + 1) + " lists server id 0 (ids are 1-based)");
                if (j > 0 && phi[j] == phi[j - 1])
                    detail::fail(ErrorCode::DuplicateReplicaOnServer,
                                 "fragment " + std::to_string(i + 1) + " has two replicas on server " +
                                     std::to_string(phi[j]));
            }
            max_server = std::max(max_server, phi.back());
        }
        std::uint32_t B = max_server;
        if (servers) {
            if (*servers < max_server)
                detail::fail(ErrorCode::IdOutOfRange, "server id " + std::to_string(max_server) +
                                                          " exceeds declared B=" + std::to_string(*servers));
            B = *servers;
        }

        occupancy_ = std::move(occupancy);
        fragment_sets_.assign(B, {});
        for (std::size_t i = 0; i < occupancy_.size(); ++i)
            for (ServerId b : occupancy_[i]) fragment_sets_[b - 1].push_back(static_cast<FragmentId>(i + 1));

        params_.B = B;
        params_.V = static_cast<std::uint32_t>(occupancy_.size());
        params_.mu = mu;
        bool uniform_r = true, uniform_k = true;
        const auto r0 = occupancy_.front().size();
        const auto k0 = fragment_sets_.front().size();
        for (const auto& phi : occupancy_) {
            params_.R = std::max<std::uint32_t>(params_.R, static_cast<std::uint32_t>(phi.size()));
            uniform_r = uniform_r && phi.size() == r0;
        }
        for (const auto& s : fragment_sets_) {
            params_.K = std::max<std::uint32_t>(params_.K, static_cast<std::uint32_t>(s.size()));
            uniform_k = uniform_k && s.size() == k0;
        }
        params_.alpha = Fraction(params_.K, params_.V);
        params_.completely_utilizing = uniform_r && uniform_k && k0 > 0 &&
                                       std::uint64_t{params_.V} * params_.R == std::uint64_t{params_.B} * params_.K;
    }

    const SystemParams& params() const noexcept { return params_; }
    std::uint32_t servers() const noexcept { return params_.B; }
    std::uint32_t fragments() const noexcept { return params_.V; }

    /// Phi_v, sorted ascending.
    std::span<const ServerId> occupancy(FragmentId v) const { return occupancy_.at(v - 1); }
    /// S_b, sorted ascending.
    std::span<const FragmentId> fragment_set(ServerId b) const { return fragment_sets_.at(b - 1); }

    const std::vector<std::vector<ServerId>>& occupancy_sets() const noexcept { return occupancy_; }
    const std::vector<std::vector<FragmentId>>& fragment_sets() const noexcept { return fragment_sets_; }

    bool stores(ServerId b, FragmentId v) const {
        const auto s = fragment_set(b);
        return std::binary_search(s.begin(), s.end(), v);
    }

    friend bool operator==(const StorageScheme& a, const StorageScheme& b) {
        return a.params_ == b.params_ && a.occupancy_ == b.occupancy_;
    }

private:
    SystemParams params_;
    std::vector<std::vector<ServerId>> occupancy_;
    std::vector<std::vector<FragmentId>> fragment_sets_;
};

/// Builds a scheme from occupancy sets. B defaults to the largest server id present.
inline StorageScheme build_scheme(std::vector<std::vector<ServerId>> occupancy, double mu = 1.0,
                                  std::optional<std::uint32_t> servers = {}) {
    return StorageScheme(std::move(occupancy), mu, servers);
}

/// Builds a scheme from fragment sets S_b (server b = index + 1).
inline StorageScheme scheme_from_fragment_sets(const std::vector<std::vector<FragmentId>>& sets, double mu = 1.0) {
    FragmentId v_max = 0;
    for (const auto& s : sets)
        for (FragmentId v : s) {
            if (v == 0) detail::fail(ErrorCode::IdOutOfRange, "fragment id 0 (ids are 1-based)");
            v_max = std::max(v_max, v);
        }
    std::vector<std::vector<ServerId>> occupancy(v_max);
    for (std::size_t b = 0; b < sets.size(); ++b)
        for (FragmentId v : sets[b]) occupancy[v - 1].push_back(static_cast<ServerId>(b + 1));
    return StorageScheme(std::move(occupancy), mu, static_cast<std::uint32_t>(sets.size()));
}

struct OverlapProfile {
    std::uint32_t tau_max = 0;    ///< max |S_a ∩ S_b|, a != b
    std::uint32_t lambda_max = 0; ///< max |Phi_v ∩ Phi_w|, v != w
    std::map<std::uint32_t, std::uint64_t> tau_histogram;
    std::map<std::uint32_t, std::uint64_t> lambda_histogram;
};

namespace detail {
inline std::uint32_t sorted_intersection_size(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    std::uint32_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}
} // namespace detail

/// Exact pairwise overlaps. Empty pair sets (V = 1 or B = 1) report a maximum of 0.
inline OverlapProfile overlap_profile(const StorageScheme& scheme) {
    OverlapProfile out;
    const auto& S = scheme.fragment_sets();
    for (std::size_t a = 0; a < S.size(); ++a)
        for (std::size_t b = a + 1; b < S.size(); ++b) {
            const auto n = detail::sorted_intersection_size(S[a], S[b]);
            ++out.tau_histogram[n];
            out.tau_max = std::max(out.tau_max, n);
        }
    const auto& Phi = scheme.occupancy_sets();
    for (std::size_t v = 0; v < Phi.size(); ++v)
        for (std::size_t w = v + 1; w < Phi.size(); ++w) {
            const auto n = detail::sorted_intersection_size(Phi[v], Phi[w]);
            ++out.lambda_histogram[n];
            out.lambda_max = std::max(out.lambda_max, n);
        }
    return out;
}

/// FNV-1a over (B, V, occupancy). Stable across runs and platforms.
inline std::string scheme_hash(const StorageScheme& scheme) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    };
    mix(scheme.servers());
    mix(scheme.fragments());
    for (const auto& phi : scheme.occupancy_sets()) {
        mix(phi.size());
        for (ServerId b : phi) mix(b);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace repdl
