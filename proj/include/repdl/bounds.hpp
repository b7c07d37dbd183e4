#pragma once

// Closed-form bounds on the number of useful servers N(I_l), and expected
// profiles of the random replication and random MDS ensembles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "repdl/fraction.hpp"
#include "repdl/scheme.hpp"

namespace repdl {

struct UpperBound {
    std::vector<std::uint32_t> profile; ///< l = 0..V-1
    Fraction profile_normalized_sum;    ///< (1/BV) * sum of the profile
    /// The closed form 1 - (m+1)/(2V). Stated for integral B/R; evaluated for any B, R.
    Fraction remark_normalized_sum;
};

/// N(I_l) <= B while l <= V - m, else (V - l) R, with m = ceil(B / R).
inline UpperBound useful_upper_bound(std::uint32_t B, std::uint32_t V, std::uint32_t R) {
    if (B == 0 || V == 0 || R == 0) detail::fail(ErrorCode::InvalidParams, "B, V and R must be at least 1");
    const std::uint32_t m = (B + R - 1) / R;
    UpperBound ub;
    std::uint64_t total = 0;
    for (std::uint32_t l = 0; l < V; ++l) {
        const std::uint64_t n = std::int64_t{l} <= std::int64_t{V} - m ? B : std::uint64_t{V - l} * R;
        ub.profile.push_back(static_cast<std::uint32_t>(std::min<std::uint64_t>(n, B)));
        total += ub.profile.back();
    }
    ub.profile_normalized_sum = Fraction(static_cast<std::int64_t>(total), std::int64_t{B} * V);
    ub.remark_normalized_sum = Fraction(2 * std::int64_t{V} - m - 1, 2 * std::int64_t{V});
    return ub;
}

/// Early-download bound: at most i servers are useless after l downloads when
/// l < iK - i(i-1)tau/2 and i <= floor(K/tau) + 1. Returns B - i for the
/// smallest such i, B at l = 0, and 0 when no i qualifies.
inline std::uint32_t useful_lower_bound_early(std::uint32_t B, std::uint32_t K, std::uint32_t tau, std::uint64_t l) {
    if (l == 0) return B;
    if (K == 0) return 0;
    if (tau == 0) {
        const std::uint64_t i = l / K + 1;
        return i >= B ? 0 : static_cast<std::uint32_t>(B - i);
    }
    const std::uint64_t i_max = K / tau + 1;
    for (std::uint64_t i = 1; i <= i_max && i <= B; ++i) {
        const std::int64_t covered = static_cast<std::int64_t>(i * K) - static_cast<std::int64_t>(i * (i - 1) * tau / 2);
        if (static_cast<std::int64_t>(l) < covered) return static_cast<std::uint32_t>(B - i);
    }
    return 0;
}

/// Late-download bound with i = V - l fragments left: iR - i(i-1)lambda/2,
/// valid for i <= floor(R/lambda) + 1; 0 outside that range.
inline std::uint32_t useful_lower_bound_late(std::uint32_t R, std::uint32_t lambda, std::uint32_t V, std::uint64_t l) {
    if (l >= V) return 0;
    const std::uint64_t i = V - l;
    if (lambda > 0 && i > R / lambda + 1) return 0;
    const std::int64_t n = static_cast<std::int64_t>(i * R) - static_cast<std::int64_t>(i * (i - 1) * lambda / 2);
    return n > 0 ? static_cast<std::uint32_t>(n) : 0;
}

struct LowerBoundProfile {
    std::vector<std::uint32_t> general; ///< max of the early and late bounds
    std::vector<std::uint32_t> design;  ///< adds the tau = 1 recursion where it applies
};

/// Lower profiles for a scheme, using its overlaps and its smallest server
/// load and replication. With tau = 1 and K >= 2 the recursion
/// N(l) >= N(l-1) - floor((l-1)/(K-1)) is chained from the previous bound and
/// combined pointwise with the other regimes.
inline LowerBoundProfile design_lb_profile(const StorageScheme& scheme) {
    const auto ov = overlap_profile(scheme);
    const std::uint32_t V = scheme.fragments();
    std::uint32_t B = 0, K = UINT32_MAX, R = UINT32_MAX;
    for (const auto& s : scheme.fragment_sets())
        if (!s.empty()) {
            ++B;
            K = std::min<std::uint32_t>(K, static_cast<std::uint32_t>(s.size()));
        }
    for (const auto& phi : scheme.occupancy_sets()) R = std::min<std::uint32_t>(R, static_cast<std::uint32_t>(phi.size()));

    LowerBoundProfile out;
    const bool recursion = ov.tau_max <= 1 && K >= 2;
    for (std::uint32_t l = 0; l < V; ++l) {
        const std::uint32_t general = std::min(
            B, std::max(useful_lower_bound_early(B, K, ov.tau_max, l), useful_lower_bound_late(R, ov.lambda_max, V, l)));
        out.general.push_back(general);
        std::uint32_t design = general;
        if (recursion && l > 0) {
            const std::int64_t chained =
                static_cast<std::int64_t>(out.design.back()) - static_cast<std::int64_t>((l - 1) / (K - 1));
            design = std::max<std::int64_t>(design, std::max<std::int64_t>(chained, 0));
        }
        out.design.push_back(std::min(design, B));
    }
    return out;
}

struct EnsembleExpectation {
    std::vector<double> expected_useful; ///< E[N(I_l)], l = 0..V-1
    double aggregate = 0;                ///< (1/BV) sum of the profile, closed form
};

/// Random replication ensemble: E[N(I_l)] = B[1 - (1-1/B)^{R(V-l)}]. The
/// aggregate is 1 - y^R (1 - y^{RV}) / (V (1 - y^R)) with y = 1 - 1/B, which
/// is the exact sum of the per-l terms (B = 1 gives y = 0 and aggregate 1).
inline EnsembleExpectation random_rep_expected(std::uint32_t B, std::uint32_t V, std::uint32_t R) {
    if (B == 0 || V == 0 || R == 0) detail::fail(ErrorCode::InvalidParams, "B, V and R must be at least 1");
    const double y = 1.0 - 1.0 / B;
    EnsembleExpectation e;
    for (std::uint32_t l = 0; l < V; ++l)
        e.expected_useful.push_back(B * (1.0 - std::pow(y, static_cast<double>(R) * (V - l))));
    const double yr = std::pow(y, R);
    e.aggregate = 1.0 - yr * (1.0 - std::pow(y, static_cast<double>(R) * V)) / (V * (1.0 - yr));
    return e;
}

/// Random MDS ensemble: E[N(I_l)] = B[1 - (1-1/B)^{RV-l}], aggregate
/// 1 - (B/V) y^{(R-1)V+1} (1 - y^V).
inline EnsembleExpectation random_mds_expected(std::uint32_t B, std::uint32_t V, std::uint32_t R) {
    if (B == 0 || V == 0 || R == 0) detail::fail(ErrorCode::InvalidParams, "B, V and R must be at least 1");
    const double y = 1.0 - 1.0 / B;
    EnsembleExpectation e;
    for (std::uint32_t l = 0; l < V; ++l)
        e.expected_useful.push_back(B * (1.0 - std::pow(y, static_cast<double>(R) * V - l)));
    e.aggregate = 1.0 - static_cast<double>(B) / V * std::pow(y, (R - 1.0) * V + 1.0) * (1.0 - std::pow(y, V));
    return e;
}

struct MdsBounds {
    std::uint32_t lower = 0;
    std::uint32_t upper = 0;
    /// 1 - (1/(2R))(1 - 1/V), stated for code rate 1/R <= V/(B+V).
    std::optional<double> aggregate_lower;
    double aggregate_upper = 1.0;
};

/// Per-download bounds for a completely utilizing MDS placement: at most
/// floor(l/K) servers can be exhausted and at most VR - l coded fragments remain.
inline MdsBounds mds_useful_bounds(std::uint32_t B, std::uint32_t V, std::uint32_t R, std::uint32_t K,
                                   std::uint64_t l) {
    if (B == 0 || V == 0 || R == 0 || K == 0) detail::fail(ErrorCode::InvalidParams, "B, V, R and K must be positive");
    if (l >= V) detail::fail(ErrorCode::InvalidParams, "MDS bounds need l < V");
    MdsBounds m;
    const std::uint64_t dead = l / K;
    m.lower = dead >= B ? 0 : static_cast<std::uint32_t>(B - dead);
    m.upper = static_cast<std::uint32_t>(std::min<std::uint64_t>(B, std::uint64_t{V} * R - l));
    if (std::uint64_t{B} + V <= std::uint64_t{R} * V) m.aggregate_lower = 1.0 - (1.0 - 1.0 / V) / (2.0 * R);
    return m;
}

/// Lower bound on the probability that a randomly replicated fragment has two
/// replicas on one server: 1 - exp(-alpha (R-1) / 2).
inline double duplicate_prob_lb(double alpha, std::uint32_t R) {
    if (!(alpha > 0) || R == 0) detail::fail(ErrorCode::InvalidParams, "alpha must be positive and R >= 1");
    return 1.0 - std::exp(-alpha * (R - 1.0) / 2.0);
}

struct AsymptoticComparison {
    double x = 0;             ///< 1 / (1 - 1/B)
    double alpha = 0;         ///< R / B
    double rep_aggregate = 0;
    double mds_aggregate = 0;
    double rep_log = 0;       ///< (1/V) ln(1 - rep aggregate)
    double mds_log = 0;       ///< (1/V) ln(1 - mds aggregate)
    double rep_approx = 0;    ///< -alpha + ln(VR)/V
    double mds_approx = 0;    ///< -alpha + ln(V)/V
    double log_gap = 0;       ///< rep_log - mds_log
    double log_gap_closed = 0;///< (1/V)[ln((x^{VR}-1)/(x^R-1)) - ln((x^V-1)/(x-1))]
    double aggregate_gap = 0; ///< mds aggregate - rep aggregate
};

namespace detail {
/// ln(x^n - 1) for x > 1 without overflow.
inline double log_pow_minus_one(double x, double n) {
    const double a = n * std::log(x);
    return a + std::log1p(-std::exp(-a));
}
} // namespace detail

inline AsymptoticComparison asymptotic_compare(std::uint32_t B, std::uint32_t V, std::uint32_t R) {
    if (B < 2) detail::fail(ErrorCode::InvalidParams, "asymptotic comparison needs B >= 2");
    AsymptoticComparison c;
    c.x = 1.0 / (1.0 - 1.0 / B);
    c.alpha = static_cast<double>(R) / B;
    c.rep_aggregate = random_rep_expected(B, V, R).aggregate;
    c.mds_aggregate = random_mds_expected(B, V, R).aggregate;
    c.rep_log = std::log(1.0 - c.rep_aggregate) / V;
    c.mds_log = std::log(1.0 - c.mds_aggregate) / V;
    c.rep_approx = -c.alpha + std::log(static_cast<double>(V) * R) / V;
    c.mds_approx = -c.alpha + std::log(static_cast<double>(V)) / V;
    c.log_gap = c.rep_log - c.mds_log;
    using detail::log_pow_minus_one;
    c.log_gap_closed = (log_pow_minus_one(c.x, static_cast<double>(V) * R) - log_pow_minus_one(c.x, R) -
                        log_pow_minus_one(c.x, V) + std::log(c.x - 1.0)) /
                       V;
    c.aggregate_gap = c.mds_aggregate - c.rep_aggregate;
    return c;
}

} // namespace repdl
