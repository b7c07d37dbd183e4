#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "repdl/constructions.hpp"
#include "repdl/mdp.hpp"
#include "repdl/policy.hpp"
#include "repdl/ranking.hpp"
#include "repdl/subset_dp.hpp"
#include "test_schemes.hpp"

using namespace repdl;

namespace {

std::set<std::uint32_t> as_set(const std::vector<FragmentId>& v) { return {v.begin(), v.end()}; }

bool is_code(ErrorCode code, const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

// Every reachable state of `s`, each reached once along an increasing-id path.
std::vector<std::vector<FragmentId>> all_states(const StorageScheme& s) {
    std::vector<std::vector<FragmentId>> out;
    const auto V = s.fragments();
    for (std::uint32_t mask = 0; mask + 1 < (1u << V); ++mask) {
        std::vector<FragmentId> seq;
        for (FragmentId v = 1; v <= V; ++v)
            if (mask & (1u << (v - 1))) seq.push_back(v);
        out.push_back(seq);
    }
    return out;
}

std::vector<StorageScheme> small_schemes() {
    return {testing_schemes::table_pp(), testing_schemes::config_a(), testing_schemes::config_b(), cyclic_shift(6, 2),
            cyclic_shift(7, 3), affine_plane(2), scheme_from_fragment_sets({{1, 2, 3}, {2}, {3, 4}, {1, 4, 5}, {5}})};
}

} // namespace

TEST(Ranks, HarmonicAfterFirstDownloadIsUniform) {
    const auto s = testing_schemes::table_pp();
    const std::vector<FragmentId> one{1};
    const auto st = DownloadState::after(s, one);
    for (FragmentId v = 2; v <= 7; ++v) EXPECT_EQ(harmonic_rank(st, v), Fraction(7, 6)) << v;

    const auto d = ranked_decide(st, RankKind::Harmonic, TieBreak::LowestIndex);
    const std::map<ServerId, FragmentId> expected{{1, 2}, {2, 3}, {3, 5}, {4, 4}, {5, 2}, {6, 3}, {7, 2}};
    EXPECT_EQ(d, expected);
}

TEST(Ranks, GreedyCountsServersAboutToEmpty) {
    const auto s = testing_schemes::table_pp();
    const std::vector<FragmentId> two{1, 2};
    const auto st = DownloadState::after(s, two);
    EXPECT_GE(greedy_rank(st, 3), 1u);
    EXPECT_EQ(greedy_rank(st, 3), 1u);
    EXPECT_EQ(greedy_rank(st, 4), 0u);
    EXPECT_TRUE(is_code(ErrorCode::FragmentAlreadyDownloaded, [&] { greedy_rank(st, 1); }));
    EXPECT_TRUE(is_code(ErrorCode::FragmentAlreadyDownloaded, [&] { harmonic_rank(st, 2); }));
    EXPECT_TRUE(is_code(ErrorCode::IdOutOfRange, [&] { harmonic_rank(st, 9); }));
}

TEST(Ranks, EvaluatorOrdersLikeExactHarmonic) {
    const auto s = projective_plane(3);
    const RankEvaluator ev(s, RankKind::Harmonic);
    CounterRng rng(8, 0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<FragmentId> order(s.fragments());
        std::iota(order.begin(), order.end(), 1u);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(rng.uniform_index(s.fragments() - 1));
        const auto st = DownloadState::after(s, order);
        const auto left = st.remaining();
        for (auto a : left)
            for (auto b : left) EXPECT_EQ(ev(st, a) < ev(st, b), harmonic_rank(st, a) < harmonic_rank(st, b));
    }
}

TEST(Ranks, HarmonicMatchesOracleAndNeverDecreases) {
    for (const auto& s : small_schemes()) {
        const auto& sets = s.fragment_sets();
        const auto& occ = s.occupancy_sets();
        CounterRng rng(13, s.fragments());
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<FragmentId> order(s.fragments());
            std::iota(order.begin(), order.end(), 1u);
            std::shuffle(order.begin(), order.end(), rng);
            DownloadState st(s);
            std::map<FragmentId, Fraction> last;
            for (std::size_t step = 0; step + 1 < order.size(); ++step) {
                st.advance(order[step]);
                for (FragmentId v : st.remaining()) {
                    const auto r = harmonic_rank(st, v);
                    const auto o = oracle::harmonic_rank(sets, occ, v, as_set(st.downloaded()));
                    EXPECT_EQ(oracle::Rational(r.num(), r.den()), o);
                    if (last.count(v)) EXPECT_GE(r, last[v]);
                    last[v] = r;
                }
            }
        }
    }
}

// The greedy choice maximizes E[N(I_{l+1})] because each server's term only
// depends on its own decision.
TEST(Ranks, GreedyMaximizesImmediateReward) {
    for (const auto& s : small_schemes()) {
        const auto& sets = s.fragment_sets();
        const auto& occ = s.occupancy_sets();
        for (const auto& seq : all_states(s)) {
            const auto st = DownloadState::after(s, seq);
            const auto down = as_set(seq);
            const auto d = ranked_decide(st, RankKind::Greedy, TieBreak::LowestIndex);
            oracle::Rational value = 0;
            for (const auto& [b, v] : d) {
                auto next = down;
                next.insert(v);
                value += oracle::Rational(oracle::useful_count(occ, next), static_cast<long>(d.size()));
            }
            ASSERT_EQ(value, oracle::best_immediate_reward(sets, occ, down));
        }
    }
}

TEST(Ranks, SeededTieBreakStaysInArgmin) {
    const auto s = projective_plane(2);
    const std::vector<FragmentId> one{4};
    const auto st = DownloadState::after(s, one);
    CounterRng rng(1, 1);
    std::set<FragmentId> seen;
    for (int i = 0; i < 200; ++i) {
        const auto d = ranked_decide(st, RankKind::Harmonic, TieBreak::SeededRandom, &rng);
        for (const auto& [b, v] : d) {
            EXPECT_TRUE(s.stores(b, v));
            EXPECT_FALSE(st.is_downloaded(v));
        }
        seen.insert(d.at(1));
    }
    EXPECT_EQ(seen.size(), 2u); // server 1 holds two tied fragments besides 4
    EXPECT_TRUE(is_code(ErrorCode::InvalidParams,
                        [&] { ranked_decide(st, RankKind::Harmonic, TieBreak::SeededRandom); }));
}

TEST(Ranks, InitOrderBreaksTies) {
    const auto s = testing_schemes::table_pp();
    const std::vector<FragmentId> one{1};
    const auto st = DownloadState::after(s, one);
    const PlacementOrder init(s, {{1, 3, 2}, {3, 4, 5}, {5, 6, 1}, {7, 1, 4}, {2, 5, 7}, {6, 7, 3}, {4, 2, 6}});
    const auto d = ranked_decide(st, RankKind::Harmonic, TieBreak::LowestIndex, nullptr, &init);
    EXPECT_EQ(d.at(1), 3u);
    EXPECT_EQ(d.at(4), 7u);
    EXPECT_EQ(d.at(6), 6u);
}

TEST(Policy, WorkConservationFuzz) {
    const auto s = projective_plane(3);
    std::vector<SchedulerPolicy> policies{
        SchedulerPolicy::nonadaptive(smallest_index_first(s), "sif"),
        SchedulerPolicy::nonadaptive(pushback(uniform_diversity(s), s, 1), "ud+pb"),
        SchedulerPolicy::ranked(s, RankKind::Greedy),
        SchedulerPolicy::ranked(s, RankKind::Harmonic, TieBreak::SeededRandom),
        SchedulerPolicy::ranked(s, RankKind::Harmonic, TieBreak::LowestIndex, uniform_diversity(s), "ud"),
        SchedulerPolicy::random_work_conserving()};
    CounterRng rng(21, 0);
    for (const auto& p : policies) {
        for (int trial = 0; trial < 40; ++trial) {
            DownloadState st(s);
            while (!st.complete()) {
                for (ServerId b = 1; b <= s.servers(); ++b) {
                    if (!st.is_useful(b)) {
                        EXPECT_TRUE(is_code(ErrorCode::ServerUseless, [&] { p.decide(st, b, rng); }));
                        continue;
                    }
                    const auto v = p.decide(st, b, rng);
                    ASSERT_TRUE(s.stores(b, v)) << p.describe();
                    ASSERT_FALSE(st.is_downloaded(v)) << p.describe();
                }
                const auto u = st.useful_view();
                st.advance(p.decide(st, u[rng.uniform_index(u.size())], rng));
            }
        }
    }
}

TEST(Policy, CandidateSets) {
    const auto s = testing_schemes::table_pp();
    const std::vector<FragmentId> one{1};
    const auto st = DownloadState::after(s, one);
    std::vector<FragmentId> out;
    SchedulerPolicy::random_work_conserving().candidates(st, 2, out);
    EXPECT_EQ(out, (std::vector<FragmentId>{3, 4, 5}));
    SchedulerPolicy::ranked(s, RankKind::Harmonic, TieBreak::SeededRandom).candidates(st, 2, out);
    EXPECT_EQ(out, (std::vector<FragmentId>{3, 4, 5}));
    SchedulerPolicy::ranked(s, RankKind::Harmonic).candidates(st, 2, out);
    EXPECT_EQ(out, (std::vector<FragmentId>{3}));
    SchedulerPolicy::nonadaptive(smallest_index_first(s), "sif").candidates(st, 1, out);
    EXPECT_EQ(out, (std::vector<FragmentId>{2}));
}

TEST(Policy, Describe) {
    const auto s = testing_schemes::table_pp();
    EXPECT_EQ(SchedulerPolicy::random_work_conserving().describe(), "random");
    EXPECT_EQ(SchedulerPolicy::nonadaptive(smallest_index_first(s), "sif").describe(), "nonadaptive(sif)");
    EXPECT_EQ(SchedulerPolicy::ranked(s, RankKind::Harmonic, TieBreak::LowestIndex, uniform_diversity(s), "ud")
                  .describe(),
              "ranked(harmonic,low,init=ud)");
    EXPECT_FALSE(SchedulerPolicy::ranked(s, RankKind::Greedy).randomized());
    EXPECT_TRUE(SchedulerPolicy::random_work_conserving().randomized());
}

TEST(Mdp, TablePlaneOptimum) {
    const auto s = testing_schemes::table_pp();
    const auto sol = mdp_solve<ExactRational>(s);
    EXPECT_EQ(sol.optimal_value, ExactRational(1726, 343));
    EXPECT_EQ(sol.reward_to_go[0], sol.optimal_value);

    const auto policy = SchedulerPolicy::mdp(sol.table);
    EXPECT_EQ(policy_evaluate_exact<ExactRational>(s, policy).aggregate_reward, sol.optimal_value);
    const auto harmonic = SchedulerPolicy::ranked(s, RankKind::Harmonic);
    EXPECT_EQ(policy_evaluate_exact<ExactRational>(s, harmonic).aggregate_reward, ExactRational(1726, 343));
}

TEST(Mdp, OptimumDominatesEveryPolicy) {
    for (const auto& s : small_schemes()) {
        const auto sol = mdp_solve<ExactRational>(s);
        std::vector<SchedulerPolicy> policies{
            SchedulerPolicy::nonadaptive(smallest_index_first(s), "sif"),
            SchedulerPolicy::nonadaptive(uniform_diversity(s), "ud"),
            SchedulerPolicy::ranked(s, RankKind::Greedy),
            SchedulerPolicy::ranked(s, RankKind::Harmonic),
            SchedulerPolicy::ranked(s, RankKind::Harmonic, TieBreak::SeededRandom),
            SchedulerPolicy::random_work_conserving()};
        for (const auto& p : policies)
            EXPECT_LE(policy_evaluate_exact<ExactRational>(s, p).aggregate_reward, sol.optimal_value)
                << p.describe();
        EXPECT_EQ(policy_evaluate_exact<ExactRational>(s, SchedulerPolicy::mdp(sol.table)).aggregate_reward,
                  sol.optimal_value);
    }
}

TEST(Mdp, PenultimateValueIsReplicationOverV) {
    for (const auto& s : {testing_schemes::table_pp(), cyclic_shift(8, 3), affine_plane(2)}) {
        const auto sol = mdp_solve<ExactRational>(s);
        const auto V = s.fragments();
        for (std::uint32_t mask = 0; mask < (1u << V); ++mask)
            if (std::popcount(mask) == static_cast<int>(V) - 2)
                EXPECT_EQ(sol.reward_to_go[mask], ExactRational(s.params().R, V)) << mask;
        EXPECT_EQ(sol.reward_to_go[(1u << V) - 1], ExactRational(0));
    }
}

TEST(Mdp, DoubleAgreesWithExact) {
    const auto s = cyclic_shift(8, 3);
    const auto exact = mdp_solve<ExactRational>(s);
    const auto fast = mdp_solve<double>(s);
    EXPECT_NEAR(fast.optimal_value, exact.optimal_value.convert_to<double>(), 1e-12);
    // Float ties may resolve differently, but the double table must still be optimal.
    EXPECT_EQ(policy_evaluate_exact<ExactRational>(s, SchedulerPolicy::mdp(fast.table)).aggregate_reward,
              exact.optimal_value);
}

TEST(Mdp, CapAndTableChecks) {
    EXPECT_TRUE(is_code(ErrorCode::TooManyFragments, [] { mdp_solve(cyclic_shift(21, 2)); }));
    EXPECT_TRUE(is_code(ErrorCode::TooManyFragments, [] { mdp_solve(cyclic_shift(9, 2), 8); }));
    const auto sol = mdp_solve(cyclic_shift(6, 2));
    const auto other = cyclic_shift(7, 2);
    const auto policy = SchedulerPolicy::mdp(sol.table);
    DownloadState st(other);
    CounterRng rng(0, 0);
    EXPECT_TRUE(is_code(ErrorCode::InvalidParams, [&] { policy.decide(st, 1, rng); }));
}
