#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "repdl/download_state.hpp"
#include "repdl/mdp.hpp"
#include "repdl/placement_order.hpp"
#include "repdl/random.hpp"
#include "repdl/ranking.hpp"

namespace repdl {

struct NonadaptivePolicy {
    PlacementOrder order;
    std::string name = "order";
};

struct RankedPolicy {
    RankEvaluator rank;
    TieBreak tie = TieBreak::LowestIndex;
    std::optional<PlacementOrder> init; ///< tie priority for LowestIndex
    std::string init_name;
};

struct RandomWorkConservingPolicy {};

struct MdpTablePolicy {
    std::shared_ptr<const MdpDecisionTable> table;
};

/// A work-conserving scheduler: for every useful server it names one of that
/// server's remaining fragments. Every policy here can be written as a uniform
/// choice over a per-(state, server) candidate set; deterministic policies
/// have a single candidate.
class SchedulerPolicy {
public:
    using Variant = std::variant<NonadaptivePolicy, RankedPolicy, RandomWorkConservingPolicy, MdpTablePolicy>;

    explicit SchedulerPolicy(Variant v) : v_(std::move(v)) {}

    static SchedulerPolicy nonadaptive(PlacementOrder order, std::string name) {
        return SchedulerPolicy(NonadaptivePolicy{std::move(order), std::move(name)});
    }
    static SchedulerPolicy ranked(const StorageScheme& scheme, RankKind kind, TieBreak tie = TieBreak::LowestIndex,
                                  std::optional<PlacementOrder> init = {}, std::string init_name = {}) {
        return SchedulerPolicy(RankedPolicy{RankEvaluator(scheme, kind), tie, std::move(init), std::move(init_name)});
    }
    static SchedulerPolicy random_work_conserving() { return SchedulerPolicy(RandomWorkConservingPolicy{}); }
    static SchedulerPolicy mdp(std::shared_ptr<const MdpDecisionTable> table) {
        return SchedulerPolicy(MdpTablePolicy{std::move(table)});
    }

    const Variant& variant() const noexcept { return v_; }

    /// True when some decision depends on random draws.
    bool randomized() const noexcept {
        if (std::holds_alternative<RandomWorkConservingPolicy>(v_)) return true;
        if (const auto* r = std::get_if<RankedPolicy>(&v_)) return r->tie == TieBreak::SeededRandom;
        return false;
    }

    /// Fragments server b may be assigned in `state`, each equally likely.
    void candidates(const DownloadState& state, ServerId b, std::vector<FragmentId>& out) const {
        out.clear();
        if (!state.is_useful(b))
            detail::fail(ErrorCode::ServerUseless, "server " + std::to_string(b) + " has no remaining fragment");
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, NonadaptivePolicy>) {
                    out.push_back(nonadaptive_decide(p.order, state, b));
                } else if constexpr (std::is_same_v<P, RankedPolicy>) {
                    detail::rank_argmin(p.rank, state, b, p.init ? &*p.init : nullptr, out);
                    if (p.tie == TieBreak::LowestIndex) out.resize(1);
                } else if constexpr (std::is_same_v<P, RandomWorkConservingPolicy>) {
                    for (FragmentId v : state.scheme().fragment_set(b))
                        if (!state.is_downloaded(v)) out.push_back(v);
                } else {
                    out.push_back(mdp_lookup(p, state, b));
                }
            },
            v_);
    }

    /// The fragment server b downloads next. Draws from `rng` only for randomized choices.
    FragmentId decide(const DownloadState& state, ServerId b, CounterRng& rng) const {
        if (const auto* p = std::get_if<NonadaptivePolicy>(&v_)) return nonadaptive_decide(p->order, state, b);
        if (const auto* p = std::get_if<MdpTablePolicy>(&v_)) {
            if (!state.is_useful(b))
                detail::fail(ErrorCode::ServerUseless, "server " + std::to_string(b) + " has no remaining fragment");
            return mdp_lookup(*p, state, b);
        }
        if (std::holds_alternative<RandomWorkConservingPolicy>(v_)) {
            const std::uint32_t left = state.residual_size(b);
            if (left == 0)
                detail::fail(ErrorCode::ServerUseless, "server " + std::to_string(b) + " has no remaining fragment");
            auto k = rng.uniform_index(left);
            for (FragmentId v : state.scheme().fragment_set(b))
                if (!state.is_downloaded(v) && k-- == 0) return v;
        }
        thread_local std::vector<FragmentId> buf;
        candidates(state, b, buf);
        return buf.size() == 1 ? buf.front() : buf[rng.uniform_index(buf.size())];
    }

    std::string describe() const {
        return std::visit(
            [](const auto& p) -> std::string {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, NonadaptivePolicy>) {
                    return "nonadaptive(" + p.name + ")";
                } else if constexpr (std::is_same_v<P, RankedPolicy>) {
                    std::string s = p.rank.kind() == RankKind::Greedy ? "ranked(greedy" : "ranked(harmonic";
                    s += p.tie == TieBreak::LowestIndex ? ",low" : ",seeded";
                    if (p.init) s += ",init=" + (p.init_name.empty() ? std::string("custom") : p.init_name);
                    return s + ")";
                } else if constexpr (std::is_same_v<P, RandomWorkConservingPolicy>) {
                    return "random";
                } else {
                    return "mdp";
                }
            },
            v_);
    }

private:
    static FragmentId mdp_lookup(const MdpTablePolicy& p, const DownloadState& state, ServerId b) {
        if (state.scheme().fragments() != p.table->V || state.scheme().servers() != p.table->B)
            detail::fail(ErrorCode::InvalidParams, "MDP table was solved for a different scheme");
        return p.table->decision(state.mask(), b);
    }

    Variant v_;
};

} // namespace repdl
