// thermistor-sim: command-line front end.
//
//   run       march the coupled system and write CSV/JSON outputs
//   sweep     homotopy sweep over source/boundary scalings
//   check-h1  sample the conductivity growth bounds
//   slab      small-time continuation criterion arithmetic
//   lemma     standalone recursion/inequality checkers
//   verify    oracle cross-checks (elliptic | parabolic | mms)
//
// Exit codes: 0 ok, 2 config error, 3 solver nonconvergence,
// 4 invariant violation (run/sweep only honor 4 under --strict).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermistor/config_io.hpp"
#include "thermistor/coupler.hpp"
#include "thermistor/errors.hpp"
#include "thermistor/estimates.hpp"
#include "thermistor/oracle.hpp"

using namespace thermistor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonconvergence = 3;
constexpr int kExitInvariant = 4;

ParsedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path});
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config(ss.str(), dir.empty() ? "." : dir);
}

int finish_run(const RunResult& res, const SolverConfig& cfg, const std::string& canonical,
               const std::string& dir) {
    if (!dir.empty()) {
        write_outputs(res.traj, cfg, canonical, dir);
        std::cout << "wrote outputs to " << dir << "\n";
    }
    const size_t shown = std::min<size_t>(res.traj.warnings.size(), 10);
    for (size_t i = 0; i < shown; ++i) std::cout << "warning: " << res.traj.warnings[i] << "\n";
    if (res.traj.warnings.size() > shown)
        std::cout << "... " << res.traj.warnings.size() - shown
                  << " more warnings (see report.json)\n";
    for (const std::string& v : res.traj.violations) std::cout << "violation: " << v << "\n";
    switch (res.status) {
        case RunStatus::Completed:
            std::cout << "run completed, t = "
                      << (res.traj.states.empty() ? 0.0 : res.traj.states.back().t) << ", "
                      << res.traj.states.size() << " states\n";
            return kExitOk;
        case RunStatus::SolverFailure:
            std::cout << "solver failure: " << res.error << "\n";
            return kExitNonconvergence;
        case RunStatus::InvariantViolation:
            std::cout << "invariant violation: " << res.error << "\n";
            return kExitInvariant;
    }
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool strict) {
    ParsedConfig pc = load_config(config_path);
    if (strict) pc.cfg.out.strict = true;
    if (!out_dir.empty()) pc.cfg.out.dir = out_dir;
    RunResult res = run_simulation(pc.cfg);
    return finish_run(res, pc.cfg, pc.canonical, pc.cfg.out.dir);
}

int cmd_sweep(const std::string& config_path, const std::string& eps_csv,
              const std::string& out_dir, int threads) {
    ParsedConfig pc = load_config(config_path);
    std::vector<double> eps_list;
    std::stringstream ss(eps_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) eps_list.push_back(std::stod(tok));
    if (eps_list.empty()) eps_list = pc.cfg.eps_homotopy;

    auto entries = homotopy_sweep(pc.cfg, eps_list, threads);
    const std::string dir = out_dir.empty() ? pc.cfg.out.dir : out_dir;
    nlohmann::json summary;
    summary["entries"] = nlohmann::json::array();
    int exit_code = kExitOk;
    for (const SweepEntry& e : entries) {
        char label[40];
        std::snprintf(label, sizeof(label), "eps_%g", e.eps);
        if (!dir.empty()) {
            SolverConfig sub = pc.cfg;
            sub.homotopy_eps = e.eps;
            write_outputs(e.result.traj, sub, pc.canonical,
                          (std::filesystem::path(dir) / label).string());
        }
        const bool ok = e.status == RunStatus::Completed;
        summary["entries"].push_back({{"eps", e.eps},
                                      {"ok", ok},
                                      {"error", e.error},
                                      {"u_sup", e.u_sup},
                                      {"grad_phi_sup", e.grad_phi_sup}});
        std::printf("eps = %-6g  %s  sup|u| = %.6g  sup|grad phi| = %.6g\n", e.eps,
                    ok ? "ok  " : "FAIL", e.u_sup, e.grad_phi_sup);
        if (!ok) exit_code = kExitNonconvergence;
    }
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        std::ofstream out(std::filesystem::path(dir) / "sweep.json");
        out << summary.dump(2) << "\n";
    }
    return exit_code;
}

int cmd_check_h1(const std::string& config_path, double smax, int samples) {
    ParsedConfig pc = load_config(config_path);
    H1Report rep = verify_h1(pc.cfg.sigma, smax, samples);
    auto line = [](const char* name, const H1Bound& b) {
        std::printf("%-28s %-4s  worst margin %.6g at s = %.6g\n", name, b.ok ? "ok" : "FAIL",
                    b.margin, b.worst_s);
    };
    line("lower bound c0 e^{-beta s}", rep.lower);
    line("upper bound c1", rep.upper);
    line("derivative bound c2 e^{gamma s}", rep.deriv);
    return rep.all_ok() ? kExitOk : kExitInvariant;
}

int cmd_slab(double eps, double b, double c) {
    SlabCriterion s = slab_criterion(eps, b, c);
    std::printf("tau0    = %.12g\n", s.tau0);
    std::printf("g(tau0) = %.12g\n", s.g_min);
    std::printf("cont1   = %s\n", s.cont1_ok ? "ok" : "fails");
    return kExitOk;
}

int cmd_lemma_gronwall(double h0, double c, double g_const, double T, int n) {
    std::vector<double> t(static_cast<size_t>(n)), g(static_cast<size_t>(n), g_const);
    for (int i = 0; i < n; ++i) t[static_cast<size_t>(i)] = T * i / (n - 1);
    auto bound = gronwall_bound(h0, c, g, t);
    std::printf("bound(%g) = %.12g\n", T, bound.back());
    return kExitOk;
}

int cmd_lemma_ynb(double c, double b, double alpha, double y0, int n_max) {
    YnbResult r = ynb_check(c, b, alpha, y0, n_max);
    std::printf("threshold = %.12g\n", r.threshold);
    const size_t show = std::min<size_t>(r.y.size(), 8);
    for (size_t i = 0; i < show; ++i) std::printf("y_%zu = %.12g\n", i, r.y[i]);
    std::printf("y_%d = %.12g -> %s\n", n_max, r.y.back(),
                r.converged ? "converged" : "did not converge");
    return kExitOk;
}

int cmd_lemma_small(double b0, double lambda, double alpha, int k_max) {
    SmallLemmaResult r = small_lemma_check(b0, lambda, alpha, k_max);
    std::printf("hypothesis 2*lambda*(2 b0)^alpha < 1: %s\n", r.hypothesis_ok ? "holds" : "fails");
    if (r.hypothesis_ok)
        std::printf("bound = %.12g, sequence max = %.12g -> %s\n", r.bound, r.sequence_max,
                    r.bounded ? "bounded" : "VIOLATED");
    else
        std::printf("no bound asserted; sequence max = %.12g\n", r.sequence_max);
    return kExitOk;
}

int cmd_lemma_interp(double ell, double q, double r, double eps, int nx) {
    // A deterministic oscillatory sample field exercises the inequality.
    GridSpec g = GridSpec::line(nx, 1.0);
    Field f = sample(g, [](double x, double) { return std::sin(13.0 * x) + 0.3 * x; });
    InterpResult res = interpolation_check(f, ell, q, r, eps);
    std::printf("mu = %.12g, lhs = %.12g, rhs = %.12g -> %s\n", res.mu, res.lhs, res.rhs,
                res.ok ? "ok" : "FAIL");
    return res.ok ? kExitOk : kExitInvariant;
}

// ---- verify suites: oracle cross-checks of the production solvers ----

int verify_elliptic() {
    std::mt19937_64 rng(20250809);
    std::uniform_real_distribution<double> sig_dist(0.1, 2.0), bc_dist(-1.0, 1.0);
    int failures = 0;
    for (int inst = 0; inst < 40; ++inst) {
        const bool two_d = inst % 2 == 0;
        GridSpec g = two_d ? GridSpec::rect(12, 12, 1.0, 1.0) : GridSpec::line(102, 1.0);
        Field sig(g), bc(g);
        for (int k = 0; k < sig.size(); ++k) sig[k] = sig_dist(rng);
        for (int k = 0; k < bc.size(); ++k) bc[k] = bc_dist(rng);
        LinearSystem sys = assemble(sigma_faces(sig), bc);
        Field cg = solve_spd(sys, 1e-13);
        Field dense = oracle::dense_elliptic_solve(sys);
        double diff = 0.0, scale = 0.0;
        for (int k = 0; k < cg.size(); ++k) {
            diff = std::max(diff, std::abs(cg[k] - dense[k]));
            scale = std::max(scale, std::abs(dense[k]));
        }
        const double rel = diff / std::max(scale, 1e-300);
        if (rel > 1e-10) {
            std::printf("instance %d: cg vs dense relative error %.3g\n", inst, rel);
            ++failures;
        }
    }
    std::printf("elliptic: cg vs dense on 40 instances -> %s\n",
                failures == 0 ? "ok" : "FAIL");
    return failures == 0 ? kExitOk : kExitInvariant;
}

int verify_parabolic() {
    GridSpec g = GridSpec::line(41, 1.0);
    auto src = [](double x, double, double t) { return std::exp(-t) * (1.0 + x); };
    auto bc = [](double, double, double) { return 0.0; };
    Field u0 = sample(g, [](double x, double) { return x * (1.0 - x); });
    const double T = 0.25;
    Field ref = oracle::explicit_reference(u0, src, bc, g.h * g.h / 5.0, T);

    std::vector<double> dts = {T / 10, T / 20, T / 40, T / 80}, errs;
    for (double dt : dts) {
        Field u = u0;
        double t = 0.0;
        const long n = std::lround(T / dt);
        for (long s = 0; s < n; ++s) {
            Field q = sample(g, [&](double x, double y) { return src(x, y, t); });
            Field bc_next = sample(g, [&](double x, double y) { return bc(x, y, t + dt); });
            u = implicit_euler_step(u, q, dt, bc_next);
            t += dt;
        }
        double e = 0.0;
        for (int k = 0; k < u.size(); ++k) e = std::max(e, std::abs(u[k] - ref[k]));
        errs.push_back(e);
    }
    const double order = oracle::loglog_slope(dts, errs);
    std::printf("parabolic: implicit vs explicit reference, observed order %.3f -> %s\n", order,
                order >= 0.8 ? "ok" : "FAIL");
    return order >= 0.8 ? kExitOk : kExitInvariant;
}

int verify_mms() {
    oracle::ConvergenceResult quad =
        oracle::convergence_study(oracle::mms_affine_quadratic(), {11, 21, 41},
                                  {0.05, 0.025, 0.0125});
    std::printf("mms %-18s exact = %s\n", "affine-quadratic:", quad.exact ? "yes" : "NO");
    oracle::ConvergenceResult sin_case =
        oracle::convergence_study(oracle::mms_sin_decay(), {11, 21, 41, 81},
                                  {0.05, 0.025, 0.0125, 0.00625});
    const bool space_ok = std::abs(sin_case.spatial_order - 2.0) <= 0.2;
    const bool time_ok = std::abs(sin_case.temporal_order - 1.0) <= 0.15;
    std::printf("mms %-18s spatial order %.3f (%s), temporal order %.3f (%s)\n", "sin-decay:",
                sin_case.spatial_order, space_ok ? "ok" : "FAIL", sin_case.temporal_order,
                time_ok ? "ok" : "FAIL");
    return (quad.exact && space_ok && time_ok) ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermistor-sim: coupled Joule-heating simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, eps_csv, suite;
    bool strict = false;
    int threads = 1;

    auto* run = app.add_subcommand("run", "march the coupled system");
    run->add_option("--config", config_path, "config JSON")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_flag("--strict", strict, "abort on invariant violations (exit 4)");

    auto* sweep = app.add_subcommand("sweep", "homotopy sweep over eps");
    sweep->add_option("--config", config_path, "config JSON")->required();
    sweep->add_option("--eps", eps_csv, "comma-separated eps values in (0,1]");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--threads", threads, "worker threads (result is thread-count invariant)");

    double smax = 20.0;
    int samples = 2001;
    auto* h1 = app.add_subcommand("check-h1", "sample the conductivity growth bounds");
    h1->add_option("--config", config_path, "config JSON")->required();
    h1->add_option("--smax", smax, "upper end of the sample interval");
    h1->add_option("--samples", samples, "number of samples");

    double slab_eps = 0.0, slab_b = 0.0, slab_c = 0.0;
    auto* slab = app.add_subcommand("slab", "small-time continuation criterion");
    slab->add_option("--eps-coef", slab_eps, "coefficient of tau^b")->required();
    slab->add_option("--b", slab_b, "exponent b > 1")->required();
    slab->add_option("--c", slab_c, "constant term")->required();

    auto* lemma = app.add_subcommand("lemma", "standalone lemma checkers");
    lemma->require_subcommand(1);
    double l_h0 = 1.0, l_c = 1.0, l_g = 0.0, l_T = 1.0;
    int l_n = 1001;
    auto* lg = lemma->add_subcommand("gronwall", "exponential-in-time bound");
    lg->add_option("--h0", l_h0);
    lg->add_option("--c", l_c);
    lg->add_option("--g", l_g, "constant forcing");
    lg->add_option("--t", l_T);
    lg->add_option("--samples", l_n);
    double y_c = 1.0, y_b = 2.0, y_alpha = 1.0, y_y0 = 0.5;
    int y_n = 60;
    auto* ly = lemma->add_subcommand("ynb", "geometric recursion threshold");
    ly->add_option("--c", y_c);
    ly->add_option("--b", y_b);
    ly->add_option("--alpha", y_alpha);
    ly->add_option("--y0", y_y0);
    ly->add_option("--n", y_n);
    double s_b0 = 0.1, s_lambda = 1.0, s_alpha = 1.0;
    int s_k = 200;
    auto* ls = lemma->add_subcommand("small", "bounded recursion");
    ls->add_option("--b0", s_b0);
    ls->add_option("--lambda", s_lambda);
    ls->add_option("--alpha", s_alpha);
    ls->add_option("--k", s_k);
    double i_ell = 1.0, i_q = 2.0, i_r = 4.0, i_eps = 0.5;
    int i_nx = 101;
    auto* li = lemma->add_subcommand("interp", "norm interpolation inequality");
    li->add_option("--ell", i_ell);
    li->add_option("--q", i_q);
    li->add_option("--r", i_r);
    li->add_option("--eps", i_eps);
    li->add_option("--nx", i_nx);

    auto* verify = app.add_subcommand("verify", "oracle cross-checks");
    verify->add_option("--suite", suite, "elliptic | parabolic | mms")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, strict);
        if (sweep->parsed()) return cmd_sweep(config_path, eps_csv, out_dir, threads);
        if (h1->parsed()) return cmd_check_h1(config_path, smax, samples);
        if (slab->parsed()) return cmd_slab(slab_eps, slab_b, slab_c);
        if (lemma->parsed()) {
            if (lg->parsed()) return cmd_lemma_gronwall(l_h0, l_c, l_g, l_T, l_n);
            if (ly->parsed()) return cmd_lemma_ynb(y_c, y_b, y_alpha, y_y0, y_n);
            if (ls->parsed()) return cmd_lemma_small(s_b0, s_lambda, s_alpha, s_k);
            if (li->parsed()) return cmd_lemma_interp(i_ell, i_q, i_r, i_eps, i_nx);
        }
        if (verify->parsed()) {
            if (suite == "elliptic") return verify_elliptic();
            if (suite == "parabolic") return verify_parabolic();
            if (suite == "mms") return verify_mms();
            std::cerr << "unknown suite \"" << suite << "\"\n";
            return kExitConfig;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const NonconvergenceError& e) {
        std::cerr << "nonconvergence: " << e.what() << "\n";
        return kExitNonconvergence;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
