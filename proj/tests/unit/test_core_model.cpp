#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "repdl/constructions.hpp"
#include "repdl/design.hpp"
#include "repdl/download_state.hpp"
#include "repdl/random.hpp"
#include "repdl/scheme.hpp"
#include "test_schemes.hpp"

using namespace repdl;

namespace {

template <class F>
void expect_code(ErrorCode code, F&& f) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

} // namespace

TEST(BuildScheme, DerivesFragmentSetsFromOccupancy) {
    const auto s = testing_schemes::table_pp();
    EXPECT_EQ(s.servers(), 7u);
    EXPECT_EQ(s.fragments(), 7u);
    EXPECT_EQ(std::vector<FragmentId>(s.fragment_set(1).begin(), s.fragment_set(1).end()),
              (std::vector<FragmentId>{1, 2, 3}));
    EXPECT_EQ(std::vector<FragmentId>(s.fragment_set(2).begin(), s.fragment_set(2).end()),
              (std::vector<FragmentId>{3, 4, 5}));
    EXPECT_EQ(std::vector<FragmentId>(s.fragment_set(7).begin(), s.fragment_set(7).end()),
              (std::vector<FragmentId>{2, 4, 6}));
    EXPECT_TRUE(s.params().completely_utilizing);
    EXPECT_EQ(s.params().R, 3u);
    EXPECT_EQ(s.params().K, 3u);
    EXPECT_EQ(s.params().alpha, Fraction(3, 7));
}

TEST(BuildScheme, SingleFragmentSingleServer) {
    const auto s = build_scheme({{1}});
    EXPECT_EQ(s.servers(), 1u);
    EXPECT_EQ(s.fragments(), 1u);
    EXPECT_EQ(s.params().R, 1u);
    EXPECT_EQ(s.params().K, 1u);
    EXPECT_TRUE(s.params().completely_utilizing);
}

TEST(BuildScheme, RejectsInvalidInput) {
    expect_code(ErrorCode::DuplicateReplicaOnServer, [] { build_scheme({{1, 1}}); });
    expect_code(ErrorCode::EmptyOccupancy, [] { build_scheme({}); });
    expect_code(ErrorCode::EmptyOccupancy, [] { build_scheme({{1}, {}}); });
    expect_code(ErrorCode::IdOutOfRange, [] { build_scheme({{0, 2}}); });
    expect_code(ErrorCode::IdOutOfRange, [] { build_scheme({{1, 5}}, 1.0, 4); });
}

TEST(BuildScheme, CallerSuppliedServerCountKeepsEmptyServers) {
    const auto s = build_scheme({{1}, {2}}, 1.0, 3);
    EXPECT_EQ(s.servers(), 3u);
    EXPECT_TRUE(s.fragment_set(3).empty());
    EXPECT_FALSE(s.params().completely_utilizing);
}

TEST(BuildScheme, MembershipIsBidirectional) {
    for (const auto& s : {testing_schemes::table_pp(), projective_plane(3), affine_plane(3), cyclic_shift(9, 4)}) {
        std::size_t incidences = 0;
        for (ServerId b = 1; b <= s.servers(); ++b) {
            for (FragmentId v : s.fragment_set(b)) {
                const auto phi = s.occupancy(v);
                EXPECT_TRUE(std::find(phi.begin(), phi.end(), b) != phi.end());
            }
            incidences += s.fragment_set(b).size();
        }
        EXPECT_EQ(incidences, std::size_t{s.fragments()} * s.params().R);
        EXPECT_EQ(incidences, std::size_t{s.servers()} * s.params().K);
    }
}

TEST(OverlapProfile, ProjectivePlaneHasUnitOverlaps) {
    const auto o = overlap_profile(testing_schemes::table_pp());
    EXPECT_EQ(o.tau_max, 1u);
    EXPECT_EQ(o.lambda_max, 1u);
    EXPECT_EQ(o.tau_histogram.at(1), 21u);
    EXPECT_EQ(o.lambda_histogram.at(1), 21u);
}

TEST(OverlapProfile, CyclicShiftOverlapSpread) {
    const auto s = cyclic_shift(7, 3);
    const auto o = overlap_profile(s);
    EXPECT_EQ(o.tau_max, 2u);
    EXPECT_EQ(o.lambda_max, 2u);

    // Every server: two neighbours at overlap 2, two at 1, two at 0 (brute force).
    for (ServerId a = 1; a <= 7; ++a) {
        std::map<std::size_t, int> spread;
        for (ServerId b = 1; b <= 7; ++b) {
            if (a == b) continue;
            std::vector<FragmentId> common;
            std::set_intersection(s.fragment_set(a).begin(), s.fragment_set(a).end(), s.fragment_set(b).begin(),
                                  s.fragment_set(b).end(), std::back_inserter(common));
            ++spread[common.size()];
        }
        EXPECT_EQ(spread[2], 2);
        EXPECT_EQ(spread[1], 2);
        EXPECT_EQ(spread[0], 2);
    }
    EXPECT_EQ(o.tau_histogram.at(2) + o.tau_histogram.at(1) + o.tau_histogram.at(0), 21u);
}

TEST(OverlapProfile, EmptyPairSetsReportZero) {
    const auto o = overlap_profile(build_scheme({{1, 2}}));
    EXPECT_EQ(o.lambda_max, 0u);
    EXPECT_TRUE(o.lambda_histogram.empty());
    EXPECT_EQ(o.tau_max, 1u);
}

TEST(DownloadState, FirstDownloadEmptiesNoServerWhenKAboveOne) {
    const auto s = testing_schemes::table_pp();
    DownloadState st(s);
    EXPECT_EQ(st.n_useful(), 7u);
    st.advance(1);
    EXPECT_EQ(st.n_useful(), 7u);
    EXPECT_EQ(st.ell(), 1u);
}

TEST(DownloadState, LastFragmentLeavesItsReplicas) {
    const auto s = testing_schemes::table_pp();
    const std::vector<FragmentId> first_six{1, 2, 3, 4, 5, 6};
    const auto st = DownloadState::after(s, first_six);
    EXPECT_EQ(st.n_useful(), 3u);
    EXPECT_EQ(st.useful_servers(), (std::vector<ServerId>{4, 5, 6}));
    const auto done = advance_state(st, 7);
    EXPECT_EQ(done.n_useful(), 0u);
    EXPECT_TRUE(done.complete());
}

TEST(DownloadState, RejectsRepeatAndUnknownFragments) {
    const auto s = testing_schemes::table_pp();
    DownloadState st(s);
    st.advance(3);
    expect_code(ErrorCode::AlreadyDownloaded, [&] { st.advance(3); });
    expect_code(ErrorCode::IdOutOfRange, [&] { st.advance(8); });
    expect_code(ErrorCode::IdOutOfRange, [&] { st.advance(0); });
}

// Incremental N(I) agrees with the from-scratch union for every subset and every
// insertion order reaching it, on small schemes.
TEST(DownloadState, IncrementalUsefulCountMatchesScratchOnAllSubsets) {
    const std::vector<StorageScheme> schemes{testing_schemes::table_pp(), cyclic_shift(8, 3), affine_plane(2),
                                             testing_schemes::config_a(), testing_schemes::config_b()};
    for (const auto& s : schemes) {
        const auto V = s.fragments();
        for (std::uint32_t mask = 0; mask < (1u << V); ++mask) {
            std::vector<FragmentId> order;
            std::set<std::uint32_t> set;
            for (FragmentId v = 1; v <= V; ++v)
                if (mask & (1u << (v - 1))) {
                    order.push_back(v);
                    set.insert(v);
                }
            std::reverse(order.begin(), order.end());
            const auto st = DownloadState::after(s, order);
            ASSERT_EQ(st.n_useful(), oracle::useful_count(s.occupancy_sets(), set));
            for (ServerId b = 1; b <= s.servers(); ++b)
                ASSERT_EQ(st.is_useful(b), !st.residual(b).empty());
        }
    }
}

TEST(DownloadState, AnyFullOrderEndsEmpty) {
    const auto s = projective_plane(3);
    CounterRng rng(11, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<FragmentId> order(s.fragments());
        std::iota(order.begin(), order.end(), 1u);
        std::shuffle(order.begin(), order.end(), rng);
        DownloadState st(s);
        std::uint32_t prev = st.n_useful();
        for (FragmentId v : order) {
            const auto before = st.useful_servers();
            st.advance(v);
            const auto after = st.useful_servers();
            EXPECT_TRUE(std::includes(before.begin(), before.end(), after.begin(), after.end()));
            EXPECT_LE(st.n_useful(), prev);
            prev = st.n_useful();
        }
        EXPECT_EQ(st.n_useful(), 0u);
        for (ServerId b = 1; b <= s.servers(); ++b) EXPECT_EQ(st.residual_size(b), 0u);
    }
}

TEST(Design, ProjectivePlaneIsTwoDesign) {
    const auto d = scheme_to_design(projective_plane(2));
    EXPECT_EQ(verify_t_design(d, 2), std::optional<std::uint64_t>(1));
}

TEST(Design, CyclicBlocksAreNotTwoDesign) {
    const auto d = scheme_to_design(cyclic_shift(7, 3));
    EXPECT_FALSE(verify_t_design(d, 2).has_value());
    EXPECT_FALSE(oracle::brute_lambda(d.blocks, 7, 2).has_value());
    // Pair {1,2} lies in two blocks, pair {1,4} in none.
    int with12 = 0, with14 = 0;
    for (const auto& blk : d.blocks) {
        const bool h1 = std::count(blk.begin(), blk.end(), 1u), h2 = std::count(blk.begin(), blk.end(), 2u),
                   h4 = std::count(blk.begin(), blk.end(), 4u);
        with12 += h1 && h2;
        with14 += h1 && h4;
    }
    EXPECT_EQ(with12, 2);
    EXPECT_EQ(with14, 0);
}

TEST(Design, SingleFullBlockIsOneDesign) {
    const auto d = make_design(5, {{1, 2, 3, 4, 5}});
    EXPECT_EQ(verify_t_design(d, 1), std::optional<std::uint64_t>(1));
}

TEST(Design, VerifierAgreesWithBruteForceOnSmallSchemes) {
    std::vector<StorageScheme> schemes{projective_plane(2), affine_plane(2), affine_plane(3), cyclic_shift(9, 3),
                                       cyclic_shift(6, 2), testing_schemes::config_a(), testing_schemes::config_b()};
    CounterRng rng(5, 5);
    for (int i = 0; i < 20; ++i) {
        // Random equal-size block collections on up to 9 points.
        const std::uint32_t V = 4 + static_cast<std::uint32_t>(rng.uniform_index(6));
        const std::uint32_t k = 2 + static_cast<std::uint32_t>(rng.uniform_index(V - 2));
        std::vector<std::vector<FragmentId>> blocks;
        const auto nblocks = 2 + rng.uniform_index(8);
        for (std::uint64_t j = 0; j < nblocks; ++j) {
            std::vector<FragmentId> pts(V);
            std::iota(pts.begin(), pts.end(), 1u);
            std::shuffle(pts.begin(), pts.end(), rng);
            pts.resize(k);
            blocks.push_back(pts);
        }
        const auto d = make_design(V, blocks);
        for (std::uint32_t t = 1; t <= k; ++t) ASSERT_EQ(verify_t_design(d, t), oracle::brute_lambda(d.blocks, V, t));
    }
    for (const auto& s : schemes) {
        const auto d = scheme_to_design(s);
        for (std::uint32_t t = 1; t <= std::min<std::uint32_t>(3, s.params().K); ++t)
            EXPECT_EQ(verify_t_design(d, t), oracle::brute_lambda(d.blocks, s.fragments(), t));
    }
}

TEST(Design, ConservationLaws) {
    const auto pp = scheme_to_design(projective_plane(2));
    const auto r = conservation_check(pp, 2, 1);
    EXPECT_TRUE(r.incidence_law);
    EXPECT_EQ(r.subset_law, std::optional<bool>(true));

    const auto a = conservation_check(scheme_to_design(testing_schemes::config_a()), 1, 2);
    EXPECT_TRUE(a.incidence_law);

    const auto bad = conservation_check(3, 2, 4, 2, 2, 1);
    EXPECT_FALSE(bad.incidence_law);
    EXPECT_FALSE(bad.subset_law.has_value());

    expect_code(ErrorCode::NonUniformDesign, [] { conservation_check(make_design(3, {{1, 2}, {3}}), 1, 1); });
    expect_code(ErrorCode::NonUniformDesign, [] { conservation_check(make_design(3, {{1, 2}, {1, 3}}), 1, 1); });
}

TEST(Design, RoundTripsWithSchemes) {
    const auto s = testing_schemes::table_pp();
    const auto d = scheme_to_design(s);
    EXPECT_EQ(d.block_count(), 7u);
    for (const auto& blk : d.blocks) EXPECT_EQ(blk.size(), 3u);
    EXPECT_EQ(design_to_scheme(d, 1.0, true), s);
}

TEST(Design, DuplicateBlocksGiveSharedOccupancy) {
    const auto d = make_design(4, {{1, 3}, {2, 4}, {3, 1}, {4, 2}});
    const auto s = design_to_scheme(d, 1.0, true);
    EXPECT_EQ(std::vector<ServerId>(s.occupancy(1).begin(), s.occupancy(1).end()),
              (std::vector<ServerId>{1, 3}));
    EXPECT_EQ(std::vector<ServerId>(s.occupancy(3).begin(), s.occupancy(3).end()),
              (std::vector<ServerId>{1, 3}));
}

TEST(Design, EmptyDesignRejected) {
    expect_code(ErrorCode::EmptyDesign, [] { make_design(3, {}); });
    expect_code(ErrorCode::EmptyDesign, [] { design_to_scheme(Design{}); });
    expect_code(ErrorCode::EmptyDesign, [] { make_design(3, {{1}, {}}); });
    expect_code(ErrorCode::NonUniformDesign,
                [] { design_to_scheme(make_design(3, {{1, 2}, {3}}), 1.0, true); });
}
