#pragma once

// Combinatorial designs and their correspondence with storage schemes:
// points are fragments, blocks are server fragment sets S_b.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "repdl/scheme.hpp"

namespace repdl {

struct Design {
    std::uint32_t points = 0;                       ///< V
    std::vector<std::vector<std::uint32_t>> blocks; ///< may repeat; each sorted, nonempty
    std::optional<std::uint32_t> t;                 ///< strength, once verified
    std::optional<std::uint64_t> lambda;            ///< index, once verified

    std::uint32_t block_count() const noexcept { return static_cast<std::uint32_t>(blocks.size()); }
};

/// Validates and normalizes (sorts) blocks.
inline Design make_design(std::uint32_t points, std::vector<std::vector<std::uint32_t>> blocks) {
    if (blocks.empty()) detail::fail(ErrorCode::EmptyDesign, "design has no blocks");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        auto& blk = blocks[i];
        if (blk.empty()) detail::fail(ErrorCode::EmptyDesign, "block " + std::to_string(i + 1) + " is empty");
        std::sort(blk.begin(), blk.end());
        if (blk.front() == 0 || blk.back() > points)
            detail::fail(ErrorCode::IdOutOfRange, "block " + std::to_string(i + 1) + " has a point outside [V]");
        if (std::adjacent_find(blk.begin(), blk.end()) != blk.end())
            detail::fail(ErrorCode::DuplicateReplicaOnServer,
                         "block " + std::to_string(i + 1) + " repeats a point");
    }
    Design d;
    d.points = points;
    d.blocks = std::move(blocks);
    return d;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<std::uint64_t>(r);
}

/// Returns lambda if all blocks have equal size and every t-subset of points
/// lies in exactly lambda blocks; nullopt otherwise.
inline std::optional<std::uint64_t> verify_t_design(const Design& design, std::uint32_t t) {
    if (design.blocks.empty() || t == 0 || design.points < t) return std::nullopt;
    const std::size_t k = design.blocks.front().size();
    for (const auto& blk : design.blocks)
        if (blk.size() != k) return std::nullopt;
    if (k < t) return std::nullopt;

    // Count every t-subset of every block, indexed by its colex rank.
    const std::uint64_t subsets = binomial(design.points, t);
    if (subsets > (std::uint64_t{1} << 28))
        detail::fail(ErrorCode::InvalidParams, "too many t-subsets to verify");
    std::vector<std::uint32_t> count(subsets, 0);
    std::vector<std::uint32_t> idx(t);
    for (const auto& blk : design.blocks) {
        for (std::uint32_t i = 0; i < t; ++i) idx[i] = i;
        while (true) {
            std::uint64_t rank = 0;
            for (std::uint32_t i = 0; i < t; ++i) rank += binomial(blk[idx[i]] - 1, i + 1);
            ++count[rank];
            int i = static_cast<int>(t) - 1;
            while (i >= 0 && idx[i] == k - t + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (std::uint32_t j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    const std::uint32_t lambda = count.front();
    if (std::any_of(count.begin(), count.end(), [lambda](std::uint32_t c) { return c != lambda; }))
        return std::nullopt;
    return lambda;
}

struct ConservationResult {
    bool incidence_law = false;      ///< B K == V R
    std::optional<bool> subset_law;  ///< B C(K,t) == lambda C(V,t); absent when the first law fails
};

inline ConservationResult conservation_check(std::uint64_t B, std::uint64_t K, std::uint64_t V, std::uint64_t R,
                                             std::uint32_t t, std::uint64_t lambda) {
    ConservationResult r;
    r.incidence_law = B * K == V * R;
    if (r.incidence_law) {
        const unsigned __int128 lhs = static_cast<unsigned __int128>(B) * binomial(K, t);
        const unsigned __int128 rhs = static_cast<unsigned __int128>(lambda) * binomial(V, t);
        r.subset_law = lhs == rhs;
    }
    return r;
}

/// Both conservation laws for a design with equal block sizes and constant point replication.
inline ConservationResult conservation_check(const Design& design, std::uint32_t t, std::uint64_t lambda) {
    if (design.blocks.empty()) detail::fail(ErrorCode::EmptyDesign, "design has no blocks");
    const std::size_t k = design.blocks.front().size();
    std::vector<std::uint64_t> replication(design.points + 1, 0);
    for (const auto& blk : design.blocks) {
        if (blk.size() != k) detail::fail(ErrorCode::NonUniformDesign, "block sizes differ");
        for (auto p : blk) ++replication[p];
    }
    const std::uint64_t r = replication[1];
    for (std::uint32_t p = 1; p <= design.points; ++p)
        if (replication[p] != r) detail::fail(ErrorCode::NonUniformDesign, "point replication differs");
    return conservation_check(design.block_count(), k, design.points, r, t, lambda);
}

/// Points are fragments, blocks are the fragment sets S_1..S_B in server order.
inline Design scheme_to_design(const StorageScheme& scheme) {
    return make_design(scheme.fragments(), scheme.fragment_sets());
}

/// Block j becomes server j. With `require_uniform`, rejects designs whose
/// block sizes or point replications vary (those cannot be completely utilizing).
inline StorageScheme design_to_scheme(const Design& design, double mu = 1.0, bool require_uniform = false) {
    if (design.blocks.empty()) detail::fail(ErrorCode::EmptyDesign, "design has no blocks");
    if (require_uniform) conservation_check(design, 1, 0); // throws NonUniformDesign
    std::vector<std::vector<ServerId>> occupancy(design.points);
    for (std::size_t j = 0; j < design.blocks.size(); ++j)
        for (auto p : design.blocks[j]) occupancy.at(p - 1).push_back(static_cast<ServerId>(j + 1));
    return StorageScheme(std::move(occupancy), mu, design.block_count());
}

} // namespace repdl
