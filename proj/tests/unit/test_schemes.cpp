#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "repdl/constructions.hpp"
#include "repdl/design.hpp"
#include "repdl/placement_order.hpp"
#include "test_schemes.hpp"

using namespace repdl;

namespace {

std::vector<FragmentId> span_vec(std::span<const FragmentId> s) { return {s.begin(), s.end()}; }

bool is_code(ErrorCode code, const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

} // namespace

TEST(PrimeField, Arithmetic) {
    const PrimeField f(7);
    EXPECT_EQ(f.add(5, 4), 2u);
    EXPECT_EQ(f.neg(3), 4u);
    EXPECT_EQ(f.mul(3, 5), 1u);
    for (std::uint32_t a = 1; a < 7; ++a) EXPECT_EQ(f.mul(a, f.inv(a)), 1u);
    EXPECT_TRUE(is_code(ErrorCode::NotPrime, [] { PrimeField(9); }));
    EXPECT_TRUE(is_code(ErrorCode::NotPrime, [] { projective_plane(4); }));
    EXPECT_TRUE(is_code(ErrorCode::NotPrime, [] { affine_plane(1); }));
}

TEST(ProjectivePlane, OrderTwoIncidence) {
    const auto s = projective_plane(2);
    EXPECT_EQ(s.servers(), 7u);
    EXPECT_EQ(s.fragments(), 7u);
    const std::vector<std::vector<FragmentId>> expected{{2, 4, 6}, {1, 4, 5}, {3, 4, 7}, {1, 2, 3},
                                                        {2, 5, 7}, {1, 6, 7}, {3, 5, 6}};
    for (ServerId b = 1; b <= 7; ++b) EXPECT_EQ(span_vec(s.fragment_set(b)), expected[b - 1]);
}

class ProjectiveByOrder : public ::testing::TestWithParam<std::uint32_t> {};

TEST_P(ProjectiveByOrder, IsSymmetricTwoDesign) {
    const auto q = GetParam();
    const auto s = projective_plane(q);
    const std::uint32_t n = q * q + q + 1;
    EXPECT_EQ(s.servers(), n);
    EXPECT_EQ(s.fragments(), n);
    EXPECT_EQ(s.params().R, q + 1);
    EXPECT_EQ(s.params().K, q + 1);
    EXPECT_TRUE(s.params().completely_utilizing);
    const auto d = scheme_to_design(s);
    EXPECT_EQ(verify_t_design(d, 2), std::optional<std::uint64_t>(1));
    const auto o = overlap_profile(s);
    EXPECT_EQ(o.tau_max, 1u);
    EXPECT_EQ(o.lambda_max, 1u);
    EXPECT_EQ(o.tau_histogram.size(), 1u);
}

INSTANTIATE_TEST_SUITE_P(Orders, ProjectiveByOrder, ::testing::Values(2u, 3u, 5u, 7u, 11u));

class AffineByOrder : public ::testing::TestWithParam<std::uint32_t> {};

TEST_P(AffineByOrder, IsTwoDesign) {
    const auto q = GetParam();
    const auto s = affine_plane(q);
    EXPECT_EQ(s.fragments(), q * q);
    EXPECT_EQ(s.servers(), q * q + q);
    EXPECT_EQ(s.params().K, q);
    EXPECT_EQ(s.params().R, q + 1);
    EXPECT_TRUE(s.params().completely_utilizing);
    const auto d = scheme_to_design(s);
    EXPECT_EQ(verify_t_design(d, 2), std::optional<std::uint64_t>(1));
    EXPECT_EQ(verify_t_design(d, 2), oracle::brute_lambda(d.blocks, q * q, 2));
    // Parallel lines are disjoint, so some server pairs share nothing.
    EXPECT_GT(overlap_profile(s).tau_histogram.at(0), 0u);
}

INSTANTIATE_TEST_SUITE_P(Orders, AffineByOrder, ::testing::Values(2u, 3u, 5u));

TEST(CyclicShift, ConsecutiveWindows) {
    const auto s = cyclic_shift(7, 3);
    EXPECT_EQ(span_vec(s.fragment_set(1)), (std::vector<FragmentId>{1, 2, 3}));
    EXPECT_EQ(span_vec(s.fragment_set(6)), (std::vector<FragmentId>{1, 6, 7}));
    EXPECT_EQ(span_vec(s.fragment_set(7)), (std::vector<FragmentId>{1, 2, 7}));
    EXPECT_TRUE(s.params().completely_utilizing);
    EXPECT_EQ(s.params().R, 3u);

    const auto big = cyclic_shift(133, 12);
    EXPECT_EQ(big.params().K, 12u);
    EXPECT_EQ(big.params().R, 12u);
    EXPECT_EQ(overlap_profile(big).tau_max, 11u);

    EXPECT_TRUE(is_code(ErrorCode::InvalidParams, [] { cyclic_shift(0, 1); }));
    EXPECT_TRUE(is_code(ErrorCode::InvalidParams, [] { cyclic_shift(5, 6); }));
    EXPECT_TRUE(is_code(ErrorCode::InvalidParams, [] { cyclic_shift(5, 0); }));
}

TEST(LargeStorage, SlotFill) {
    const auto p = large_storage_scheme(3, 2, 6);
    EXPECT_EQ(p.R, 4u);
    EXPECT_EQ(p.slots[0], (std::vector<FragmentId>{1, 2, 3, 1, 2, 3}));
    EXPECT_EQ(p.slots[1], (std::vector<FragmentId>{1, 2, 3, 1, 2, 3}));
    EXPECT_EQ(p.multiplicity(2, 1), 2u);
    for (FragmentId v = 1; v <= 3; ++v) EXPECT_EQ(p.scheme.occupancy(v).size(), 2u);

    EXPECT_TRUE(is_code(ErrorCode::CapacityMismatch, [] { large_storage_scheme(4, 3, 6); }));
    EXPECT_TRUE(is_code(ErrorCode::CapacityMismatch, [] { large_storage_scheme(4, 3, 3); }));
    EXPECT_TRUE(is_code(ErrorCode::CapacityMismatch, [] { large_storage_scheme(4, 3, 5); }));
}

TEST(LargeStorage, EveryFragmentGetsReplicationFactor) {
    for (std::uint32_t V = 1; V <= 6; ++V)
        for (std::uint32_t B = 1; B <= 6; ++B)
            for (std::uint32_t K = V; K <= 2 * V + 1; ++K) {
                if ((B * K) % V != 0) continue;
                const auto p = large_storage_scheme(V, B, K);
                for (FragmentId v = 1; v <= V; ++v) {
                    std::uint32_t total = 0;
                    for (ServerId b = 1; b <= B; ++b) {
                        EXPECT_GE(p.multiplicity(v, b), 1u);
                        total += p.multiplicity(v, b);
                    }
                    EXPECT_EQ(total, p.R);
                }
                for (const auto& slots : p.slots) EXPECT_EQ(slots.size(), K);
            }
}

TEST(PlacementOrder, SmallestIndexFirstIsSorted) {
    const auto s = testing_schemes::table_pp();
    const auto o = smallest_index_first(s);
    EXPECT_EQ(o.layer(1), (std::vector<FragmentId>{1, 3, 1, 1, 2, 3, 2}));
    EXPECT_FALSE(o.perfect());
}

TEST(PlacementOrder, RejectsNonPermutations) {
    const auto s = testing_schemes::config_a();
    EXPECT_TRUE(is_code(ErrorCode::InvalidParams, [&] { PlacementOrder(s, {{1, 2}, {2, 3}, {3, 4}}); }));
    EXPECT_TRUE(is_code(ErrorCode::InvalidParams, [&] { PlacementOrder(s, {{1, 2}, {2, 3}, {3, 4}, {4, 2}}); }));
    EXPECT_NO_THROW(PlacementOrder(s, {{2, 1}, {3, 2}, {4, 3}, {1, 4}}));
}

TEST(UniformDiversity, PerfectOnProjectivePlanes) {
    for (std::uint32_t q : {2u, 3u, 5u, 7u, 11u}) {
        const auto s = projective_plane(q);
        const auto o = uniform_diversity(s);
        EXPECT_TRUE(o.perfect()) << q;
        for (std::uint32_t r = 1; r <= o.layers(); ++r) {
            auto row = o.layer(r);
            std::sort(row.begin(), row.end());
            EXPECT_EQ(std::adjacent_find(row.begin(), row.end()), row.end());
        }
    }
}

TEST(UniformDiversity, CyclicShiftRotates) {
    const auto o = uniform_diversity(cyclic_shift(7, 3));
    EXPECT_TRUE(o.perfect());
    EXPECT_EQ(o.layer(1), (std::vector<FragmentId>{1, 2, 3, 4, 5, 6, 7}));
    EXPECT_EQ(o.layer(2), (std::vector<FragmentId>{2, 3, 4, 5, 6, 7, 1}));
    EXPECT_EQ(o.layer(3), (std::vector<FragmentId>{3, 4, 5, 6, 7, 1, 2}));
}

TEST(UniformDiversity, MoreServersThanFragmentsCannotBePerfect) {
    const auto s = build_scheme({{1, 2}});
    const auto o = uniform_diversity(s);
    EXPECT_FALSE(o.perfect());
    EXPECT_EQ(o.layer(1), (std::vector<FragmentId>{1, 1}));
}

TEST(UniformDiversity, UnequalLoadsStillGiveValidOrders) {
    const auto s = scheme_from_fragment_sets({{1, 2, 3}, {2}, {3, 4}, {1, 4}});
    const auto o = uniform_diversity(s);
    EXPECT_EQ(o.layer(1).size(), 4u);
    EXPECT_EQ(o.layer(3)[1], 0u);
    for (ServerId b = 1; b <= 4; ++b) {
        auto seq = span_vec(o.sequence(b));
        std::sort(seq.begin(), seq.end());
        EXPECT_EQ(seq, span_vec(s.fragment_set(b)));
    }
}

TEST(Pushback, MovesSharedFragmentsLast) {
    const auto s = testing_schemes::table_pp();
    const PlacementOrder ud(s, {{1, 3, 2}, {3, 4, 5}, {5, 6, 1}, {7, 1, 4}, {2, 5, 7}, {6, 7, 3}, {4, 2, 6}});
    EXPECT_TRUE(ud.perfect());
    const auto pb = pushback(ud, s, 1);
    EXPECT_EQ(pb.layer(1), (std::vector<FragmentId>{1, 4, 5, 7, 5, 6, 4}));
    EXPECT_EQ(pb.layer(2), (std::vector<FragmentId>{3, 5, 6, 4, 7, 7, 6}));
    EXPECT_EQ(pb.layer(3), (std::vector<FragmentId>{2, 3, 1, 1, 2, 3, 2}));

    const auto sif_pb = pushback(smallest_index_first(s), s, 1);
    EXPECT_EQ(sif_pb.layer(3), (std::vector<FragmentId>{3, 3, 1, 1, 2, 3, 2}));
    EXPECT_TRUE(is_code(ErrorCode::IdOutOfRange, [&] { pushback(ud, s, 8); }));
}

TEST(Pushback, IdempotentAndPreservesPushedServer) {
    const auto s = projective_plane(3);
    const auto ud = uniform_diversity(s);
    for (ServerId b = 1; b <= s.servers(); ++b) {
        const auto once = pushback(ud, s, b);
        EXPECT_EQ(pushback(once, s, b), once);
        EXPECT_EQ(span_vec(once.sequence(b)), span_vec(ud.sequence(b)));
        for (ServerId a = 1; a <= s.servers(); ++a) {
            if (a == b) continue;
            // In a projective plane every other line meets b exactly once, at the end.
            EXPECT_TRUE(s.stores(b, once.sequence(a).back()));
        }
    }
}
