// repdl: construct storage schemes, simulate downloads, solve exactly, and
// reproduce the reference experiments.
//
// Exit status: 0 on success, 1 on a library error or a failed reproduction
// check, 2 on flag misuse.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reproduce.hpp"

using namespace repdl;
namespace rp = repdl::reproduce;
using nlohmann::json;

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Writes to --out when given, stdout otherwise.
void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) detail::fail(ErrorCode::InvalidParams, "cannot write " + out);
    f << text;
}

struct PolicyFlags {
    std::string scheduler = "ud";
    std::string pushback = "none";
    std::string rank = "harmonic";
    std::string tie = "low";
    std::string init = "ud";

    void attach(CLI::App& app) {
        app.add_option("--scheduler", scheduler, "sif | ud | random | ranked | mdp")
            ->check(CLI::IsMember({"sif", "ud", "random", "ranked", "mdp"}))
            ->capture_default_str();
        app.add_option("--pushback", pushback, "server id whose shared fragments go last, or none")
            ->capture_default_str();
        app.add_option("--rank", rank, "greedy | harmonic")
            ->check(CLI::IsMember({"greedy", "harmonic"}))
            ->capture_default_str();
        app.add_option("--tie", tie, "low | seeded")->check(CLI::IsMember({"low", "seeded"}))->capture_default_str();
        app.add_option("--init", init, "ranked tie priority order: ud | sif | none")
            ->check(CLI::IsMember({"ud", "sif", "none"}))
            ->capture_default_str();
    }

    rp::PolicySpec spec() const {
        rp::PolicySpec s;
        s.scheduler = scheduler;
        if (pushback != "none") {
            std::size_t used = 0;
            unsigned long b = 0;
            try {
                b = std::stoul(pushback, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != pushback.size() || b == 0)
                throw CLI::ValidationError("--pushback", "expects a server id or 'none', got '" + pushback + "'");
            s.pushback = static_cast<ServerId>(b);
        }
        s.rank = rank == "greedy" ? RankKind::Greedy : RankKind::Harmonic;
        s.tie = tie == "seeded" ? TieBreak::SeededRandom : TieBreak::LowestIndex;
        s.init = init;
        return s;
    }
};

std::string scheme_header(const std::string& path, const StorageScheme& s) {
    const auto& p = s.params();
    std::ostringstream h;
    h << "# scheme_file: " << path << "\n"
      << "# scheme_hash: " << scheme_hash(s) << "\n"
      << "# B: " << p.B << "\n# V: " << p.V << "\n# R: " << p.R << "\n# K: " << p.K << "\n";
    return h.str();
}

// ---------------------------------------------------------------------------

int cmd_construct(const std::string& kind, std::uint32_t q, std::uint32_t V, std::uint32_t R, std::uint32_t B,
                  std::uint32_t K, double mu, const std::string& out) {
    StorageScheme s;
    if (kind == "pp") s = projective_plane(q, mu);
    else if (kind == "affine") s = affine_plane(q, mu);
    else if (kind == "cyclic") s = cyclic_shift(V, R, mu);
    else s = large_storage_scheme(V, B, K, mu).scheme;
    emit(out, scheme_to_json(s).dump(2) + "\n");
    if (!out.empty() && out != "-")
        std::cerr << "wrote " << out << " (B=" << s.servers() << ", V=" << s.fragments() << ", R=" << s.params().R
                  << ", K=" << s.params().K << ")\n";
    return 0;
}

int cmd_inspect(const std::string& path) {
    const auto s = read_scheme(path);
    const auto& p = s.params();
    const auto ov = overlap_profile(s);
    std::cout << "B=" << p.B << " V=" << p.V << " R=" << p.R << " K=" << p.K << " alpha=" << p.alpha
              << " mu=" << g17(p.mu) << "\n"
              << "completely_utilizing=" << (p.completely_utilizing ? "yes" : "no") << "\n"
              << "tau_max=" << ov.tau_max << " lambda_max=" << ov.lambda_max << "\n"
              << "hash=" << scheme_hash(s) << "\n";
    if (p.K >= 2 && p.V <= 4096) {
        const auto lambda = verify_t_design(scheme_to_design(s), 2);
        std::cout << "2-design: " << (lambda ? "yes, lambda=" + std::to_string(*lambda) : std::string("no")) << "\n";
    }
    std::cout << "uniform_diversity_perfect=" << (uniform_diversity(s).perfect() ? "yes" : "no") << "\n";
    return 0;
}

int cmd_bounds(const std::string& path, const std::string& out) {
    const auto s = read_scheme(path);
    const auto& p = s.params();
    const auto ub = useful_upper_bound(p.B, p.V, p.R);
    const auto lb = design_lb_profile(s);
    const auto rep = random_rep_expected(p.B, p.V, p.R);
    const auto mds = random_mds_expected(p.B, p.V, p.R);
    std::ostringstream o;
    o << "# repdl bounds\n" << scheme_header(path, s);
    o << "# ub_normalized_sum: " << ub.profile_normalized_sum << "\n"
      << "# remark_normalized_sum: " << ub.remark_normalized_sum << "\n"
      << "# rep_aggregate: " << g17(rep.aggregate) << "\n# mds_aggregate: " << g17(mds.aggregate) << "\n";
    o << "ell,lb_general,lb_design,ub,rep_expected,mds_expected\n";
    for (std::uint32_t l = 0; l < p.V; ++l)
        o << l << ',' << lb.general[l] << ',' << lb.design[l] << ',' << ub.profile[l] << ','
          << g17(rep.expected_useful[l]) << ',' << g17(mds.expected_useful[l]) << '\n';
    emit(out, o.str());
    return 0;
}

struct SimulateFlags {
    std::string scheme;
    PolicyFlags policy;
    std::uint32_t runs = 1000;
    std::uint64_t seed = 1;
    double mu = 0; // 0: take the scheme file's rate
    unsigned threads = 1;
    bool clocks = false;
    std::string format = "csv";
    std::string out;
};

int cmd_simulate(const SimulateFlags& f) {
    auto s = read_scheme(f.scheme);
    MonteCarloConfig cfg;
    cfg.runs = f.runs;
    cfg.seed = f.seed;
    cfg.mu = f.mu > 0 ? f.mu : s.params().mu;
    cfg.threads = f.threads;
    cfg.per_server_clocks = f.clocks;
    const auto policy = rp::make_policy(s, f.policy.spec());
    const auto sum = monte_carlo(s, policy, cfg);

    if (f.format == "json") {
        json j;
        j["command"] = "simulate";
        j["scheme_file"] = f.scheme;
        j["scheme_hash"] = sum.scheme_hash;
        j["policy"] = sum.policy;
        j["runs"] = sum.runs;
        j["seed"] = sum.seed;
        j["mu"] = sum.mu;
        j["threads"] = cfg.threads;
        j["per_server_clocks"] = cfg.per_server_clocks;
        j["mean_download_time"] = sum.mean_download_time;
        j["stderr_download_time"] = sum.runs > 1 ? json(sum.stderr_download_time) : json(nullptr);
        j["ci95"] = sum.runs > 1 ? json({sum.ci95_lo, sum.ci95_hi}) : json(nullptr);
        j["ci_reliable"] = sum.ci_reliable;
        j["normalized_aggregate"] = sum.normalized_aggregate;
        j["mean_useful"] = sum.mean_useful;
        j["min_useful"] = sum.min_useful;
        j["max_useful"] = sum.max_useful;
        emit(f.out, j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream o;
    o << "# repdl simulate\n" << scheme_header(f.scheme, s);
    o << "# policy: " << sum.policy << "\n# runs: " << sum.runs << "\n# seed: " << sum.seed << "\n# mu: " << g17(sum.mu)
      << "\n# threads: " << cfg.threads << "\n# per_server_clocks: " << (cfg.per_server_clocks ? 1 : 0) << "\n";
    o << "# mean_download_time: " << g17(sum.mean_download_time) << "\n";
    if (sum.runs > 1)
        o << "# stderr_download_time: " << g17(sum.stderr_download_time) << "\n# ci95: " << g17(sum.ci95_lo) << ' '
          << g17(sum.ci95_hi) << "\n";
    o << "# ci_reliable: " << (sum.ci_reliable ? 1 : 0) << "\n";
    o << "# normalized_aggregate: " << g17(sum.normalized_aggregate) << "\n";
    o << "ell,mean_useful,normalized_useful,min_useful,max_useful\n";
    for (std::size_t l = 0; l < sum.mean_useful.size(); ++l)
        o << l << ',' << g17(sum.mean_useful[l]) << ',' << g17(sum.normalized_useful[l]) << ',' << sum.min_useful[l]
          << ',' << sum.max_useful[l] << '\n';
    emit(f.out, o.str());
    return 0;
}

int cmd_exact(const std::string& path, const PolicyFlags& pf, double mu_flag, bool rational, const std::string& out) {
    const auto s = read_scheme(path);
    const double mu = mu_flag > 0 ? mu_flag : s.params().mu;
    const auto policy = rp::make_policy(s, pf.spec());
    std::ostringstream o;
    o << "# repdl exact\n" << scheme_header(path, s) << "# policy: " << policy.describe() << "\n# mu: " << g17(mu)
      << "\n# arithmetic: " << (rational ? "rational" : "double") << "\n";
    if (rational) {
        const auto e = policy_evaluate_exact<ExactRational>(s, policy);
        const auto m = exact_mean_download<ExactRational>(s, policy, mu);
        o << "# mean_download_time: " << rp::str(m.mean_download_time) << " = "
          << g17(m.mean_download_time.convert_to<double>()) << "\n";
        o << "# aggregate_reward: " << rp::str(e.aggregate_reward) << "\n";
        o << "ell,expected_useful\n";
        for (std::size_t l = 0; l < e.expected_useful.size(); ++l) o << l << ',' << rp::str(e.expected_useful[l]) << '\n';
    } else {
        const auto m = exact_mean_download<double>(s, policy, mu);
        o << "# mean_download_time: " << g17(m.mean_download_time) << "\n";
        o << "ell,expected_useful\n";
        for (std::size_t l = 0; l < m.expected_useful.size(); ++l) o << l << ',' << g17(m.expected_useful[l]) << '\n';
    }
    emit(out, o.str());
    return 0;
}

int cmd_mdp(const std::string& path, bool rational, const std::string& out) {
    const auto s = read_scheme(path);
    std::ostringstream o;
    o << "# repdl mdp\n" << scheme_header(path, s) << "# arithmetic: " << (rational ? "rational" : "double") << "\n";
    o << "policy,aggregate_reward,relative_gap\n";
    if (rational) {
        const auto sol = mdp_solve<ExactRational>(s);
        o << "mdp," << rp::str(sol.optimal_value) << ",0\n";
        for (const auto& p : rp::all_policies(s, 0)) {
            const auto v = policy_evaluate_exact<ExactRational>(s, p).aggregate_reward;
            o << '"' << p.describe() << "\"," << rp::str(v) << ',' << rp::str((sol.optimal_value - v) / sol.optimal_value)
              << '\n';
        }
    } else {
        const auto sol = mdp_solve<double>(s);
        o << "mdp," << g17(sol.optimal_value) << ",0\n";
        for (const auto& p : rp::all_policies(s, 0)) {
            const auto v = policy_evaluate_exact<double>(s, p).aggregate_reward;
            o << '"' << p.describe() << "\"," << g17(v) << ',' << g17((sol.optimal_value - v) / sol.optimal_value)
              << '\n';
        }
    }
    emit(out, o.str());
    return 0;
}

int cmd_ensemble(const std::string& kind, const std::string& mode, std::uint32_t B, std::uint32_t V, std::uint32_t R,
                 std::uint32_t samples, std::uint64_t seed, const std::string& out) {
    const auto k = kind == "rep" ? EnsembleKind::Replication : EnsembleKind::Mds;
    const auto m = mode == "server" ? OrderMode::ServerUniform : OrderMode::FragmentUniform;
    const auto sum = ensemble_monte_carlo(B, V, R, k, m, samples, seed);
    const auto cf = k == EnsembleKind::Replication ? random_rep_expected(B, V, R) : random_mds_expected(B, V, R);
    std::ostringstream o;
    o << "# repdl ensemble\n# kind: " << kind << "\n# mode: " << mode << "\n# B: " << B << "\n# V: " << V
      << "\n# R: " << R << "\n# samples: " << samples << "\n# seed: " << seed << "\n";
    o << "# aggregate: " << g17(sum.aggregate) << "\n# aggregate_stderr: " << g17(sum.aggregate_stderr)
      << "\n# closed_form_aggregate: " << g17(cf.aggregate) << "\n";
    if (k == EnsembleKind::Replication)
        o << "# duplicate_frequency: " << g17(sum.duplicate_frequency) << "\n# duplicate_prob_lb: "
          << g17(duplicate_prob_lb(static_cast<double>(R) / B, R)) << "\n";
    o << "ell,mean_useful,stderr_useful,closed_form\n";
    for (std::uint32_t l = 0; l < V; ++l)
        o << l << ',' << g17(sum.mean_useful[l]) << ',' << g17(sum.stderr_useful[l]) << ','
          << g17(cf.expected_useful[l]) << '\n';
    emit(out, o.str());
    return 0;
}

int cmd_reproduce(const std::string& target, const rp::Options& opt, const std::string& out) {
    bool found = false, ok = true;
    for (const auto& t : rp::targets()) {
        if (target != "all" && target != t.name) continue;
        found = true;
        if (target == "table-download-times" && !out.empty()) {
            std::vector<rp::TableRow> rows;
            const auto r = rp::table_download_times(opt, &rows);
            rp::print_report(stdout, r);
            std::printf("%s %s (%.2f s)\n", r.pass() ? "PASS" : "FAIL", t.name, r.seconds);
            std::ostringstream o;
            o << "# repdl reproduce table-download-times\n# runs: " << opt.table_runs << "\n# seed: " << opt.seed
              << "\n# mu: 1e-05\n";
            o << "row,policy,scheme_hash,mean_download_time,stderr,reference\n";
            for (const auto& row : rows)
                o << '"' << row.label << "\",\"" << row.summary.policy << "\"," << row.summary.scheme_hash << ','
                  << g17(row.summary.mean_download_time) << ',' << g17(row.summary.stderr_download_time) << ','
                  << g17(row.reference) << '\n';
            emit(out, o.str());
            ok = ok && r.pass();
            continue;
        }
        const auto r = t.run(opt);
        rp::print_report(stdout, r);
        std::printf("%s %s (%.2f s)\n", r.pass() ? "PASS" : "FAIL", t.name, r.seconds);
        std::fflush(stdout);
        ok = ok && r.pass();
    }
    if (!found) detail::fail(ErrorCode::InvalidParams, "unknown reproduce target '" + target + "'");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"repdl: replicated fragment storage, download scheduling and bounds"};
    app.require_subcommand(1);

    // construct
    auto* construct = app.add_subcommand("construct", "build a storage scheme and write it as a scheme file");
    std::string kind = "pp", out;
    std::uint32_t q = 2, V = 7, R = 3, B = 2, K = 0;
    double mu = 1.0;
    construct->add_option("--kind", kind, "pp | affine | cyclic | large")
        ->check(CLI::IsMember({"pp", "affine", "cyclic", "large"}))
        ->capture_default_str();
    construct->add_option("--q", q, "prime order for pp / affine")->capture_default_str();
    construct->add_option("--V", V, "fragments for cyclic / large")->capture_default_str();
    construct->add_option("--R", R, "replication for cyclic")->capture_default_str();
    construct->add_option("--B", B, "servers for large")->capture_default_str();
    construct->add_option("--K", K, "per-server slots for large (K >= V)");
    construct->add_option("--mu", mu, "per-fragment download rate")->capture_default_str();
    construct->add_option("--out", out, "output path (default stdout)");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print parameters and overlap statistics of a scheme file");
    std::string scheme_path;
    inspect->add_option("scheme", scheme_path, "scheme file")->required();

    // bounds
    auto* bounds = app.add_subcommand("bounds", "emit the per-l bound and ensemble table as CSV");
    bounds->add_option("--scheme", scheme_path, "scheme file")->required();
    bounds->add_option("--out", out, "output path (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo download simulation");
    SimulateFlags sf;
    simulate->add_option("--scheme", sf.scheme, "scheme file")->required();
    sf.policy.attach(*simulate);
    simulate->add_option("--runs", sf.runs, "number of runs")->capture_default_str();
    simulate->add_option("--seed", sf.seed, "base seed; run i uses stream i")->capture_default_str();
    simulate->add_option("--mu", sf.mu, "download rate (default: the scheme file's)");
    simulate->add_option("--threads", sf.threads, "worker threads (results do not depend on it)")
        ->capture_default_str();
    simulate->add_flag("--clocks", sf.clocks, "simulate per-server exponential clocks instead of the jump chain");
    simulate->add_option("--format", sf.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    simulate->add_option("--out", sf.out, "output path (default stdout)");

    // exact
    auto* exact = app.add_subcommand("exact", "exact mean download time by subset dynamic programming");
    PolicyFlags ef;
    bool rational = false;
    double exact_mu = 0;
    exact->add_option("--scheme", scheme_path, "scheme file")->required();
    ef.attach(*exact);
    exact->add_option("--mu", exact_mu, "download rate (default: the scheme file's)");
    exact->add_flag("--rational", rational, "exact rational arithmetic (V <= 16)");
    exact->add_option("--out", out, "output path (default stdout)");

    // mdp
    auto* mdp = app.add_subcommand("mdp", "optimal scheduling by backward induction, compared with every policy");
    mdp->add_option("--scheme", scheme_path, "scheme file")->required();
    mdp->add_flag("--rational", rational, "exact rational arithmetic");
    mdp->add_option("--out", out, "output path (default stdout)");

    // ensemble
    auto* ensemble = app.add_subcommand("ensemble", "random replication / coded ensemble experiments");
    std::string ens_kind = "rep", ens_mode = "fragment";
    std::uint32_t eB = 20, eV = 50, eR = 5, samples = 10000;
    std::uint64_t seed = 1;
    ensemble->add_option("--kind", ens_kind, "rep | mds")->check(CLI::IsMember({"rep", "mds"}))->capture_default_str();
    ensemble->add_option("--mode", ens_mode, "server | fragment")
        ->check(CLI::IsMember({"server", "fragment"}))
        ->capture_default_str();
    ensemble->add_option("--B", eB, "servers")->capture_default_str();
    ensemble->add_option("--V", eV, "fragments")->capture_default_str();
    ensemble->add_option("--R", eR, "replicas per fragment")->capture_default_str();
    ensemble->add_option("--samples", samples, "placements sampled")->capture_default_str();
    ensemble->add_option("--seed", seed, "base seed")->capture_default_str();
    ensemble->add_option("--out", out, "output path (default stdout)");

    // reproduce
    auto* reproduce = app.add_subcommand("reproduce", "run a reference experiment and check it");
    std::string target;
    rp::Options ro;
    std::string names = "all";
    for (const auto& t : rp::targets()) names += std::string(" | ") + t.name;
    reproduce->add_option("target", target, names)->required();
    reproduce->add_option("--runs", ro.table_runs, "runs per row of the download-time table")->capture_default_str();
    reproduce->add_option("--seed", ro.seed, "base seed")->capture_default_str();
    reproduce->add_option("--threads", ro.threads, "worker threads")->capture_default_str();
    reproduce->add_option("--out", out, "table-download-times: also write the rows as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*construct) {
            if (kind == "large" && K == 0) throw CLI::RequiredError("--K");
            return cmd_construct(kind, q, V, R, B, K, mu, out);
        }
        if (*inspect) return cmd_inspect(scheme_path);
        if (*bounds) return cmd_bounds(scheme_path, out);
        if (*simulate) return cmd_simulate(sf);
        if (*exact) return cmd_exact(scheme_path, ef, exact_mu, rational, out);
        if (*mdp) return cmd_mdp(scheme_path, rational, out);
        if (*ensemble) return cmd_ensemble(ens_kind, ens_mode, eB, eV, eR, samples, seed, out);
        if (*reproduce) return cmd_reproduce(target, ro, out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "repdl: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "repdl: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
