#pragma once

// Exact forward propagation of subset probabilities through the download
// chain: from I, server b wins with probability 1/N(I) and downloads one of
// its candidates uniformly.

#include <bit>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "repdl/mdp.hpp"
#include "repdl/policy.hpp"

namespace repdl {

using ExactRational = boost::multiprecision::cpp_rational;

inline constexpr std::uint32_t kFloatSubsetCap = 24;
inline constexpr std::uint32_t kExactSubsetCap = 16;

template <class Scalar>
constexpr std::uint32_t default_subset_cap() {
    return std::is_floating_point_v<Scalar> ? kFloatSubsetCap : kExactSubsetCap;
}

template <class Scalar>
struct ExactEvaluation {
    std::vector<Scalar> expected_useful; ///< E[N(I_l)], l = 0..V-1
    Scalar aggregate_reward{};           ///< sum over l = 1..V-1 of E[N(I_l)]/V (the MDP objective)
    Scalar normalized_aggregate{};       ///< sum over l = 0..V-1 of E[N(I_l)]/(BV)
    Scalar expected_inverse_useful{};    ///< sum over l of E[1/N(I_l)], i.e. E[D_V] at mu = 1
};

template <class Scalar = double>
ExactEvaluation<Scalar> policy_evaluate_exact(const StorageScheme& scheme, const SchedulerPolicy& policy,
                                              std::uint32_t cap = default_subset_cap<Scalar>()) {
    detail::check_cap(scheme.fragments(), std::min<std::uint32_t>(cap, 30));
    const detail::SubsetIndex idx(scheme);
    const std::uint32_t V = idx.V;
    const std::uint64_t full = idx.full();

    std::vector<Scalar> prob(full + 1, Scalar(0));
    prob[0] = Scalar(1);
    ExactEvaluation<Scalar> out;
    out.expected_useful.assign(V, Scalar(0));

    std::vector<FragmentId> members, cand;
    for (std::uint64_t m = 0; m < full; ++m) {
        if (prob[m] == Scalar(0)) continue;
        members.clear();
        for (std::uint64_t bits = m; bits != 0; bits &= bits - 1)
            members.push_back(static_cast<FragmentId>(std::countr_zero(bits) + 1));
        const DownloadState state = DownloadState::after(scheme, members);
        const std::uint32_t n = state.n_useful();
        const Scalar p = prob[m];
        out.expected_useful[members.size()] += p * Scalar(n);
        out.expected_inverse_useful += p / Scalar(n);
        for (ServerId b : state.useful_view()) {
            policy.candidates(state, b, cand);
            const Scalar share = p / Scalar(std::uint64_t{n} * cand.size());
            for (FragmentId v : cand) prob[m | (std::uint64_t{1} << (v - 1))] += share;
        }
    }

    for (std::uint32_t l = 1; l < V; ++l) out.aggregate_reward += out.expected_useful[l] / Scalar(V);
    for (std::uint32_t l = 0; l < V; ++l)
        out.normalized_aggregate += out.expected_useful[l] / Scalar(std::uint64_t{scheme.servers()} * V);
    return out;
}

template <class Scalar>
struct ExactMeanDownload {
    Scalar mean_download_time{};         ///< E[D_V] = sum over l of E[1/(N(I_l) mu)]
    std::vector<Scalar> expected_useful; ///< E[N(I_l)], l = 0..V-1
};

/// E[D_V] for the given policy. In exact mode mu is converted from its
/// binary double value without rounding.
template <class Scalar = double>
ExactMeanDownload<Scalar> exact_mean_download(const StorageScheme& scheme, const SchedulerPolicy& policy, double mu,
                                              std::uint32_t cap = default_subset_cap<Scalar>()) {
    if (!(mu > 0)) detail::fail(ErrorCode::InvalidParams, "mu must be positive");
    auto eval = policy_evaluate_exact<Scalar>(scheme, policy, cap);
    ExactMeanDownload<Scalar> out;
    out.mean_download_time = eval.expected_inverse_useful / Scalar(mu);
    out.expected_useful = std::move(eval.expected_useful);
    return out;
}

} // namespace repdl
