#pragma once

// Deterministic storage schemes: projective and affine planes over a prime
// field, the cyclic-shift scheme, and the K >= V "large storage" placement.

#include <array>
#include <cstdint>
#include <vector>

#include "repdl/scheme.hpp"

namespace repdl {

inline bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

/// Arithmetic modulo a prime q.
class PrimeField {
public:
    explicit PrimeField(std::uint32_t q) : q_(q) {
        if (!is_prime(q))
            detail::fail(ErrorCode::NotPrime, std::to_string(q) + " is not prime (prime powers are unsupported)");
    }

    std::uint32_t order() const noexcept { return q_; }
    std::uint32_t add(std::uint32_t a, std::uint32_t b) const noexcept { return (a + b) % q_; }
    std::uint32_t neg(std::uint32_t a) const noexcept { return (q_ - a % q_) % q_; }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept {
        return static_cast<std::uint32_t>(std::uint64_t{a} * b % q_);
    }
    /// Multiplicative inverse by Fermat: a^(q-2).
    std::uint32_t inv(std::uint32_t a) const {
        if (a % q_ == 0) throw std::domain_error("inverse of zero");
        std::uint64_t result = 1, base = a % q_;
        for (std::uint32_t e = q_ - 2; e > 0; e >>= 1) {
            if (e & 1u) result = result * base % q_;
            base = base * base % q_;
        }
        return static_cast<std::uint32_t>(result);
    }

private:
    std::uint32_t q_;
};

namespace detail {

using Vec3 = std::array<std::uint32_t, 3>;

/// Canonical representatives of the 1-dimensional subspaces of F_q^3
/// (first nonzero coordinate equal to 1), in lexicographic order.
inline std::vector<Vec3> projective_points(std::uint32_t q) {
    std::vector<Vec3> pts;
    pts.reserve(q * q + q + 1);
    for (std::uint32_t x = 0; x < q; ++x)
        for (std::uint32_t y = 0; y < q; ++y)
            for (std::uint32_t z = 0; z < q; ++z) {
                const Vec3 p{x, y, z};
                const auto first = p[0] != 0 ? p[0] : p[1] != 0 ? p[1] : p[2];
                if (first == 1) pts.push_back(p);
            }
    return pts;
}

/// Lines of the plane: line j holds the points orthogonal to canonical vector j.
inline std::vector<std::vector<FragmentId>> projective_lines(const PrimeField& f) {
    const auto pts = projective_points(f.order());
    std::vector<std::vector<FragmentId>> lines(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j)
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto dot =
                f.add(f.add(f.mul(pts[i][0], pts[j][0]), f.mul(pts[i][1], pts[j][1])), f.mul(pts[i][2], pts[j][2]));
            if (dot == 0) lines[j].push_back(static_cast<FragmentId>(i + 1));
        }
    return lines;
}

} // namespace detail

/// Symmetric 2-(q^2+q+1, q+1, 1) scheme: fragments are points, servers are lines.
inline StorageScheme projective_plane(std::uint32_t q, double mu = 1.0) {
    const PrimeField field(q);
    return scheme_from_fragment_sets(detail::projective_lines(field), mu);
}

/// 2-(q^2, q, 1) scheme: the projective plane with the line orthogonal to
/// (0,0,1) removed, together with its points. Remaining points keep their
/// relative order.
inline StorageScheme affine_plane(std::uint32_t q, double mu = 1.0) {
    const PrimeField field(q);
    const auto pts = detail::projective_points(q);
    const auto lines = detail::projective_lines(field);
    // (0,0,1) is the lexicographically first canonical vector, so its line is lines[0].
    std::vector<bool> at_infinity(pts.size() + 1, false);
    for (FragmentId p : lines.front()) at_infinity[p] = true;
    std::vector<FragmentId> renumber(pts.size() + 1, 0);
    FragmentId next = 0;
    for (FragmentId p = 1; p <= pts.size(); ++p)
        if (!at_infinity[p]) renumber[p] = ++next;

    std::vector<std::vector<FragmentId>> sets;
    for (std::size_t j = 1; j < lines.size(); ++j) {
        std::vector<FragmentId> s;
        for (FragmentId p : lines[j])
            if (!at_infinity[p]) s.push_back(renumber[p]);
        sets.push_back(std::move(s));
    }
    return scheme_from_fragment_sets(sets, mu);
}

/// B = V servers with S_b = {b, b+1, ..., b+R-1} taken mod V.
inline StorageScheme cyclic_shift(std::uint32_t V, std::uint32_t R, double mu = 1.0) {
    if (V == 0 || R == 0 || R > V)
        detail::fail(ErrorCode::InvalidParams, "cyclic_shift needs 1 <= R <= V");
    std::vector<std::vector<FragmentId>> sets(V);
    for (std::uint32_t b = 0; b < V; ++b)
        for (std::uint32_t j = 0; j < R; ++j) sets[b].push_back((b + j) % V + 1);
    return scheme_from_fragment_sets(sets, mu);
}

/// Placement for K >= V where servers may hold several replicas of a fragment.
struct LargeStoragePlacement {
    std::uint32_t B = 0, V = 0, K = 0, R = 0;
    std::vector<std::vector<FragmentId>> slots; ///< per server, K fragment ids with repeats
    StorageScheme scheme;                       ///< deduplicated view: every Phi_v = [B]

    std::uint32_t multiplicity(FragmentId v, ServerId b) const {
        std::uint32_t n = 0;
        for (FragmentId w : slots.at(b - 1)) n += (w == v);
        return n;
    }
};

/// Every server first receives one replica of every fragment; the remaining
/// (R-B)V replicas fill the B(K-V) leftover slots server by server, taking
/// fragments in the order 1..V, 1..V, ...
inline LargeStoragePlacement large_storage_scheme(std::uint32_t V, std::uint32_t B, std::uint32_t K,
                                                  double mu = 1.0) {
    if (V == 0 || B == 0 || K < V)
        detail::fail(ErrorCode::CapacityMismatch, "large storage needs K >= V >= 1 and B >= 1");
    const std::uint64_t total = std::uint64_t{B} * K;
    if (total % V != 0) detail::fail(ErrorCode::CapacityMismatch, "B*K is not a multiple of V");

    LargeStoragePlacement out;
    out.B = B;
    out.V = V;
    out.K = K;
    out.R = static_cast<std::uint32_t>(total / V);
    out.slots.assign(B, {});
    std::uint64_t extra = 0;
    for (std::uint32_t b = 0; b < B; ++b) {
        for (FragmentId v = 1; v <= V; ++v) out.slots[b].push_back(v);
        for (std::uint32_t s = V; s < K; ++s) out.slots[b].push_back(static_cast<FragmentId>(extra++ % V + 1));
    }
    std::vector<std::vector<ServerId>> occupancy(V);
    for (auto& phi : occupancy)
        for (ServerId b = 1; b <= B; ++b) phi.push_back(b);
    out.scheme = StorageScheme(std::move(occupancy), mu, B);
    return out;
}

} // namespace repdl
