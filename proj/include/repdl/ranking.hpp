#pragma once

// Adaptive ranks over remaining fragments. A ranked scheduler gives each
// useful server its lowest-ranked residual fragment.

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "repdl/download_state.hpp"
#include "repdl/fraction.hpp"
#include "repdl/placement_order.hpp"
#include "repdl/random.hpp"

namespace repdl {

/// Wide enough for lcm(1..K) scaled harmonic ranks.
using RankValue = unsigned __int128;

enum class RankKind { Greedy, Harmonic };
enum class TieBreak { LowestIndex, SeededRandom };

namespace detail {
inline void require_remaining(const DownloadState& state, FragmentId v) {
    if (v == 0 || v > state.scheme().fragments())
        fail(ErrorCode::IdOutOfRange, "fragment " + std::to_string(v) + " not in scheme");
    if (state.is_downloaded(v))
        fail(ErrorCode::FragmentAlreadyDownloaded, "fragment " + std::to_string(v) + " already downloaded");
}
} // namespace detail

/// Number of servers hosting v whose only remaining fragment is v.
inline std::uint32_t greedy_rank(const DownloadState& state, FragmentId v) {
    detail::require_remaining(state, v);
    std::uint32_t n = 0;
    for (ServerId b : state.scheme().occupancy(v)) n += state.residual_size(b) == 1;
    return n;
}

/// Sum over servers hosting v of 1 / (remaining fragments on that server).
inline Fraction harmonic_rank(const DownloadState& state, FragmentId v) {
    detail::require_remaining(state, v);
    Fraction r;
    for (ServerId b : state.scheme().occupancy(v)) r += Fraction(1, state.residual_size(b));
    return r;
}

/// Integer-valued rank evaluator that orders fragments exactly like the
/// rational ranks: harmonic terms are scaled by lcm(1..K).
class RankEvaluator {
public:
    RankEvaluator(const StorageScheme& scheme, RankKind kind) : kind_(kind) {
        if (kind == RankKind::Harmonic) {
            RankValue l = 1;
            for (std::uint64_t k = 2; k <= scheme.params().K; ++k) {
                l = l / std::gcd(static_cast<std::uint64_t>(l % k), k) * k;
                if (l > (RankValue{1} << 100))
                    detail::fail(ErrorCode::InvalidParams, "server load too large for exact harmonic ranks");
            }
            scale_ = l;
        }
    }

    RankKind kind() const noexcept { return kind_; }

    RankValue operator()(const DownloadState& state, FragmentId v) const {
        RankValue r = 0;
        for (ServerId b : state.scheme().occupancy(v)) {
            const std::uint32_t left = state.residual_size(b);
            if (kind_ == RankKind::Greedy) r += left == 1;
            else r += scale_ / left;
        }
        return r;
    }

private:
    RankKind kind_;
    RankValue scale_ = 1;
};

namespace detail {
/// Residual fragments of b that attain the minimum rank, in tie-break priority order.
inline void rank_argmin(const RankEvaluator& rank, const DownloadState& state, ServerId b,
                        const PlacementOrder* init, std::vector<FragmentId>& out) {
    out.clear();
    RankValue best = ~RankValue{0};
    auto consider = [&](FragmentId v) {
        if (state.is_downloaded(v)) return;
        const auto r = rank(state, v);
        if (r < best) {
            best = r;
            out.clear();
        }
        if (r == best) out.push_back(v);
    };
    if (init) {
        for (FragmentId v : init->sequence(b)) consider(v);
    } else {
        for (FragmentId v : state.scheme().fragment_set(b)) consider(v);
    }
}
} // namespace detail

/// Decision of every useful server (keyed by server id). With LowestIndex
/// ties go to the earliest fragment in `init`, or to the lowest id without
/// one; with SeededRandom they are drawn uniformly from `rng`.
inline std::map<ServerId, FragmentId> ranked_decide(const DownloadState& state, RankKind kind, TieBreak tie,
                                                    CounterRng* rng = nullptr, const PlacementOrder* init = nullptr) {
    if (tie == TieBreak::SeededRandom && rng == nullptr)
        detail::fail(ErrorCode::InvalidParams, "seeded tie-breaking needs a generator");
    const RankEvaluator rank(state.scheme(), kind);
    std::map<ServerId, FragmentId> out;
    std::vector<FragmentId> best;
    for (ServerId b : state.useful_servers()) {
        detail::rank_argmin(rank, state, b, init, best);
        out[b] = tie == TieBreak::LowestIndex ? best.front() : best[rng->uniform_index(best.size())];
    }
    return out;
}

} // namespace repdl
