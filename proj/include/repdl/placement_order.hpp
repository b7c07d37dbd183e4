#pragma once

// Nonadaptive scheduling: each server walks a fixed permutation of its
// fragment set and always serves the first entry not yet downloaded.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <tuple>
#include <vector>

#include "repdl/download_state.hpp"
#include "repdl/scheme.hpp"

namespace repdl {

class PlacementOrder {
public:
    PlacementOrder() = default;

    /// `orders[b-1]` must be a permutation of S_b.
    PlacementOrder(const StorageScheme& scheme, std::vector<std::vector<FragmentId>> orders)
        : orders_(std::move(orders)) {
        if (orders_.size() != scheme.servers())
            detail::fail(ErrorCode::InvalidParams, "placement order needs one sequence per server");
        for (ServerId b = 1; b <= scheme.servers(); ++b) {
            auto sorted = orders_[b - 1];
            std::sort(sorted.begin(), sorted.end());
            const auto s = scheme.fragment_set(b);
            if (!std::equal(sorted.begin(), sorted.end(), s.begin(), s.end()))
                detail::fail(ErrorCode::InvalidParams,
                             "order for server " + std::to_string(b) + " is not a permutation of its fragment set");
        }
        perfect_ = compute_perfect();
    }

    std::uint32_t servers() const noexcept { return static_cast<std::uint32_t>(orders_.size()); }
    std::span<const FragmentId> sequence(ServerId b) const { return orders_.at(b - 1); }
    const std::vector<std::vector<FragmentId>>& sequences() const noexcept { return orders_; }

    std::uint32_t layers() const noexcept {
        std::size_t k = 0;
        for (const auto& o : orders_) k = std::max(k, o.size());
        return static_cast<std::uint32_t>(k);
    }
    /// Entry r (1-based) of every server's order; 0 where a server holds fewer than r fragments.
    std::vector<FragmentId> layer(std::uint32_t r) const {
        std::vector<FragmentId> row;
        row.reserve(orders_.size());
        for (const auto& o : orders_) row.push_back(r >= 1 && r <= o.size() ? o[r - 1] : 0);
        return row;
    }

    /// True when no fragment repeats within any layer.
    bool perfect() const noexcept { return perfect_; }

    /// Position of v within server b's order, or the order's size when absent.
    std::size_t position(ServerId b, FragmentId v) const {
        const auto& o = orders_.at(b - 1);
        return static_cast<std::size_t>(std::find(o.begin(), o.end(), v) - o.begin());
    }

    friend bool operator==(const PlacementOrder& a, const PlacementOrder& b) { return a.orders_ == b.orders_; }

private:
    bool compute_perfect() const {
        const std::uint32_t k = layers();
        for (std::uint32_t r = 1; r <= k; ++r) {
            auto row = layer(r);
            row.erase(std::remove(row.begin(), row.end(), 0u), row.end());
            std::sort(row.begin(), row.end());
            if (std::adjacent_find(row.begin(), row.end()) != row.end()) return false;
        }
        return true;
    }

    std::vector<std::vector<FragmentId>> orders_;
    bool perfect_ = true;
};

inline PlacementOrder smallest_index_first(const StorageScheme& scheme) {
    return PlacementOrder(scheme, scheme.fragment_sets());
}

namespace detail {

/// Sorted S_b rotated to start at the smallest fragment id >= b.
inline std::vector<FragmentId> rotated_preference(const StorageScheme& scheme, ServerId b) {
    std::vector<FragmentId> s(scheme.fragment_set(b).begin(), scheme.fragment_set(b).end());
    const auto it = std::lower_bound(s.begin(), s.end(), b);
    std::rotate(s.begin(), it, s.end());
    return s;
}

/// Repeated maximum matchings, one per layer. Returns false if some layer
/// cannot give every server with remaining fragments a distinct fragment.
inline bool layered_matching(const StorageScheme& scheme, std::vector<std::vector<FragmentId>>& orders) {
    const std::uint32_t B = scheme.servers();
    const std::uint32_t V = scheme.fragments();
    std::vector<std::vector<FragmentId>> pref(B);
    for (ServerId b = 1; b <= B; ++b) pref[b - 1] = rotated_preference(scheme, b);
    orders.assign(B, {});
    std::vector<std::vector<bool>> used(B);
    for (ServerId b = 1; b <= B; ++b) used[b - 1].assign(pref[b - 1].size(), false);

    const std::uint32_t K = scheme.params().K;
    for (std::uint32_t r = 0; r < K; ++r) {
        std::vector<ServerId> owner(V + 1, 0);       // fragment -> server in this layer
        std::vector<std::size_t> choice(B, SIZE_MAX); // server -> index into pref
        std::vector<std::uint32_t> seen(V + 1, 0);
        std::uint32_t stamp = 0;

        std::function<bool(ServerId)> augment = [&](ServerId b) -> bool {
            const auto& p = pref[b - 1];
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (used[b - 1][i]) continue;
                const FragmentId v = p[i];
                if (seen[v] == stamp) continue;
                seen[v] = stamp;
                if (owner[v] == 0 || augment(owner[v])) {
                    owner[v] = b;
                    choice[b - 1] = i;
                    return true;
                }
            }
            return false;
        };

        for (ServerId b = 1; b <= B; ++b) {
            if (pref[b - 1].size() <= r) continue;
            ++stamp;
            if (!augment(b)) return false;
        }
        for (ServerId b = 1; b <= B; ++b) {
            if (pref[b - 1].size() <= r) continue;
            used[b - 1][choice[b - 1]] = true;
            orders[b - 1].push_back(pref[b - 1][choice[b - 1]]);
        }
    }
    return true;
}

/// Proper edge colouring of the server/fragment incidence graph with K colours
/// by alternating-path recolouring. Requires every server degree to equal K and
/// every fragment degree to be at most K; colour c then forms layer c.
inline bool edge_colour_layers(const StorageScheme& scheme, std::vector<std::vector<FragmentId>>& orders) {
    const std::uint32_t B = scheme.servers();
    const std::uint32_t V = scheme.fragments();
    const std::uint32_t K = scheme.params().K;
    if (scheme.params().R > K) return false;
    for (ServerId b = 1; b <= B; ++b)
        if (scheme.fragment_set(b).size() != K) return false;

    // at_server[b][c] = fragment coloured c at b (0 = free); at_frag[v][c] likewise.
    std::vector<std::vector<FragmentId>> at_server(B + 1, std::vector<FragmentId>(K, 0));
    std::vector<std::vector<ServerId>> at_frag(V + 1, std::vector<ServerId>(K, 0));
    auto free_colour = [K](const auto& row) {
        for (std::uint32_t c = 0; c < K; ++c)
            if (row[c] == 0) return c;
        return K;
    };

    for (ServerId b = 1; b <= B; ++b)
        for (FragmentId v : scheme.fragment_set(b)) {
            const std::uint32_t a = free_colour(at_server[b]);
            const std::uint32_t c = free_colour(at_frag[v]);
            if (at_frag[v][a] != 0) {
                // Swap colours a and c along the alternating path leaving v on colour a.
                std::vector<std::tuple<ServerId, FragmentId, std::uint32_t>> edges;
                FragmentId frag = v;
                while (true) {
                    const ServerId srv = at_frag[frag][a];
                    if (srv == 0) break;
                    edges.emplace_back(srv, frag, a);
                    const FragmentId nf = at_server[srv][c];
                    if (nf == 0) break;
                    edges.emplace_back(srv, nf, c);
                    frag = nf;
                }
                for (auto& [s, f, cc] : edges) {
                    at_server[s][cc] = 0;
                    at_frag[f][cc] = 0;
                }
                for (auto& [s, f, cc] : edges) {
                    const std::uint32_t nc = cc == a ? c : a;
                    at_server[s][nc] = f;
                    at_frag[f][nc] = s;
                }
            }
            at_server[b][a] = v;
            at_frag[v][a] = b;
        }

    orders.assign(B, {});
    for (ServerId b = 1; b <= B; ++b)
        for (std::uint32_t c = 0; c < K; ++c) {
            if (at_server[b][c] == 0) return false;
            orders[b - 1].push_back(at_server[b][c]);
        }
    return true;
}

/// Per layer: a maximum matching first, then unmatched servers take their
/// least-repeated remaining fragment.
inline void greedy_layers(const StorageScheme& scheme, std::vector<std::vector<FragmentId>>& orders) {
    const std::uint32_t B = scheme.servers();
    const std::uint32_t V = scheme.fragments();
    std::vector<std::vector<FragmentId>> remaining(B);
    for (ServerId b = 1; b <= B; ++b) remaining[b - 1] = rotated_preference(scheme, b);
    orders.assign(B, {});
    while (true) {
        bool any = false;
        std::vector<ServerId> owner(V + 1, 0);
        std::vector<std::uint32_t> seen(V + 1, 0);
        std::vector<std::size_t> choice(B, SIZE_MAX);
        std::uint32_t stamp = 0;
        std::function<bool(ServerId)> augment = [&](ServerId b) -> bool {
            const auto& p = remaining[b - 1];
            for (std::size_t i = 0; i < p.size(); ++i) {
                const FragmentId v = p[i];
                if (seen[v] == stamp) continue;
                seen[v] = stamp;
                if (owner[v] == 0 || augment(owner[v])) {
                    owner[v] = b;
                    choice[b - 1] = i;
                    return true;
                }
            }
            return false;
        };
        for (ServerId b = 1; b <= B; ++b)
            if (!remaining[b - 1].empty()) {
                any = true;
                ++stamp;
                augment(b);
            }
        if (!any) break;
        // Fix matched choices by owner, since augmenting paths may reassign.
        std::fill(choice.begin(), choice.end(), SIZE_MAX);
        std::vector<std::uint32_t> load(V + 1, 0);
        for (FragmentId v = 1; v <= V; ++v)
            if (owner[v] != 0) {
                const auto& p = remaining[owner[v] - 1];
                choice[owner[v] - 1] = static_cast<std::size_t>(std::find(p.begin(), p.end(), v) - p.begin());
                ++load[v];
            }
        for (ServerId b = 1; b <= B; ++b) {
            auto& p = remaining[b - 1];
            if (p.empty()) continue;
            if (choice[b - 1] == SIZE_MAX) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < p.size(); ++i)
                    if (load[p[i]] < load[p[best]]) best = i;
                choice[b - 1] = best;
                ++load[p[best]];
            }
            orders[b - 1].push_back(p[choice[b - 1]]);
            p.erase(p.begin() + static_cast<std::ptrdiff_t>(choice[b - 1]));
        }
    }
}

} // namespace detail

/// Orders each server's fragments so that every layer (the r-th entries of
/// all servers) holds distinct fragments when the incidence structure allows
/// it. Falls back to a best-effort layering otherwise; check perfect().
inline PlacementOrder uniform_diversity(const StorageScheme& scheme) {
    std::vector<std::vector<FragmentId>> orders;
    if (detail::layered_matching(scheme, orders) || detail::edge_colour_layers(scheme, orders))
        return PlacementOrder(scheme, std::move(orders));
    detail::greedy_layers(scheme, orders);
    return PlacementOrder(scheme, std::move(orders));
}

/// Moves the fragments shared with server `pushed` to the end of every other
/// server's order, keeping relative order on both sides.
inline PlacementOrder pushback(const PlacementOrder& order, const StorageScheme& scheme, ServerId pushed) {
    if (pushed == 0 || pushed > scheme.servers())
        detail::fail(ErrorCode::IdOutOfRange, "pushback server " + std::to_string(pushed) + " not in scheme");
    auto seqs = order.sequences();
    for (ServerId a = 1; a <= scheme.servers(); ++a) {
        if (a == pushed) continue;
        auto& s = seqs[a - 1];
        std::stable_partition(s.begin(), s.end(), [&](FragmentId v) { return !scheme.stores(pushed, v); });
    }
    return PlacementOrder(scheme, std::move(seqs));
}

/// First fragment of server b's order that has not been downloaded yet.
inline FragmentId nonadaptive_decide(const PlacementOrder& order, const DownloadState& state, ServerId b) {
    if (b == 0 || b > order.servers())
        detail::fail(ErrorCode::IdOutOfRange, "server " + std::to_string(b) + " not in scheme");
    for (FragmentId v : order.sequence(b))
        if (!state.is_downloaded(v)) return v;
    detail::fail(ErrorCode::ServerUseless, "server " + std::to_string(b) + " has no remaining fragment");
}

} // namespace repdl
