// Builds the Fano plane scheme, compares a few schedulers exactly and by
// simulation, and prints the bound table next to the harmonic profile.

#include <cstdio>

#include <repdl/repdl.hpp>

int main() {
    using namespace repdl;

    const auto plane = projective_plane(2, 1.0);
    std::printf("Fano plane: B=%u V=%u R=%u K=%u\n", plane.params().B, plane.params().V, plane.params().R,
                plane.params().K);

    const SchedulerPolicy policies[] = {
        SchedulerPolicy::nonadaptive(smallest_index_first(plane), "sif"),
        SchedulerPolicy::nonadaptive(uniform_diversity(plane), "ud"),
        SchedulerPolicy::random_work_conserving(),
        SchedulerPolicy::ranked(plane, RankKind::Harmonic, TieBreak::LowestIndex),
    };

    MonteCarloConfig cfg;
    cfg.runs = 20000;
    cfg.seed = 7;
    for (const auto& p : policies) {
        const auto exact = exact_mean_download<ExactRational>(plane, p, 1.0);
        const auto mc = monte_carlo(plane, p, cfg);
        std::printf("%-32s exact %.6f  simulated %.6f +- %.6f\n", p.describe().c_str(),
                    exact.mean_download_time.convert_to<double>(), mc.mean_download_time, mc.stderr_download_time);
    }

    const auto opt = mdp_solve<double>(plane);
    std::printf("optimal aggregate reward %.6f\n", opt.optimal_value);

    const auto ub = useful_upper_bound(7, 7, 3);
    const auto lb = design_lb_profile(plane);
    const auto harmonic = policy_evaluate_exact<double>(plane, policies[3]);
    std::printf("\n ell  lb  harmonic  ub\n");
    for (std::uint32_t l = 0; l < 7; ++l)
        std::printf("%4u %3u  %8.4f %3u\n", l, lb.design[l], harmonic.expected_useful[l], ub.profile[l]);
}
