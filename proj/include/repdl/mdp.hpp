#pragma once

// Finite-horizon MDP over downloaded subsets. The state after l downloads is
// the set I_l (a bitmask), the stage reward is N(I_l)/V, and the scheduler
// picks one remaining fragment per useful server. Backward induction over
// masks in decreasing numeric order visits every superset before its subsets.

#include <bit>
#include <cstdint>
#include <memory>
#include <vector>

#include "repdl/scheme.hpp"

namespace repdl {

inline constexpr std::uint32_t kDefaultMdpCap = 20;

namespace detail {

/// Server fragment sets as bitmasks over fragments (bit v-1).
struct SubsetIndex {
    std::uint32_t V = 0, B = 0;
    std::vector<std::uint64_t> server_mask; // index b-1

    explicit SubsetIndex(const StorageScheme& scheme) : V(scheme.fragments()), B(scheme.servers()) {
        server_mask.assign(B, 0);
        for (ServerId b = 1; b <= B; ++b)
            for (FragmentId v : scheme.fragment_set(b)) server_mask[b - 1] |= std::uint64_t{1} << (v - 1);
    }

    std::uint64_t full() const noexcept { return V == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << V) - 1; }

    std::uint32_t n_useful(std::uint64_t mask) const noexcept {
        std::uint32_t n = 0;
        for (auto s : server_mask) n += (s & ~mask) != 0;
        return n;
    }
};

inline void check_cap(std::uint32_t V, std::uint32_t cap) {
    if (V > cap)
        fail(ErrorCode::TooManyFragments,
             "V=" + std::to_string(V) + " exceeds the subset-state cap of " + std::to_string(cap));
}

} // namespace detail

/// Optimal per-(subset, server) decisions, shared by the solution and the policy built from it.
struct MdpDecisionTable {
    std::uint32_t V = 0;
    std::uint32_t B = 0;
    std::vector<std::uint8_t> decisions; ///< [mask * B + (b-1)], 0 where b is not useful

    FragmentId decision(std::uint64_t mask, ServerId b) const { return decisions.at(mask * B + (b - 1)); }
};

template <class Scalar>
struct MdpSolution {
    /// reward_to_go[mask]: expected sum of N(I_k)/V over the downloads still to come.
    std::vector<Scalar> reward_to_go;
    std::shared_ptr<const MdpDecisionTable> table;
    Scalar optimal_value{};

    FragmentId decision(std::uint64_t mask, ServerId b) const { return table->decision(mask, b); }
};

/// Exact backward induction. Ties between equally good fragments go to the lowest id.
template <class Scalar = double>
MdpSolution<Scalar> mdp_solve(const StorageScheme& scheme, std::uint32_t cap = kDefaultMdpCap) {
    detail::check_cap(scheme.fragments(), std::min<std::uint32_t>(cap, 30));
    const detail::SubsetIndex idx(scheme);
    const std::uint32_t V = idx.V, B = idx.B;
    const std::uint64_t states = std::uint64_t{1} << V;

    std::vector<std::uint16_t> n_useful(states);
    for (std::uint64_t m = 0; m < states; ++m) n_useful[m] = static_cast<std::uint16_t>(idx.n_useful(m));

    auto table = std::make_shared<MdpDecisionTable>();
    table->V = V;
    table->B = B;
    table->decisions.assign(states * B, 0);

    MdpSolution<Scalar> sol;
    sol.reward_to_go.assign(states, Scalar(0));
    const Scalar v_count(V);
    for (std::uint64_t m = states - 1; m-- > 0;) {
        Scalar total(0);
        for (ServerId b = 1; b <= B; ++b) {
            std::uint64_t left = idx.server_mask[b - 1] & ~m;
            if (left == 0) continue;
            Scalar best(0);
            FragmentId arg = 0;
            for (; left != 0; left &= left - 1) {
                const int bit = std::countr_zero(left);
                const std::uint64_t next = m | (std::uint64_t{1} << bit);
                Scalar value = Scalar(n_useful[next]) / v_count + sol.reward_to_go[next];
                if (arg == 0 || value > best) {
                    best = std::move(value);
                    arg = static_cast<FragmentId>(bit + 1);
                }
            }
            table->decisions[m * B + (b - 1)] = static_cast<std::uint8_t>(arg);
            total += best;
        }
        sol.reward_to_go[m] = total / Scalar(n_useful[m]);
    }
    sol.optimal_value = sol.reward_to_go[0];
    sol.table = std::move(table);
    return sol;
}

} // namespace repdl
