#include "thermistor/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermistor/errors.hpp"
#include "thermistor/expression.hpp"

namespace thermistor {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Pulls a value of type T, recording a violation instead of throwing.
template <typename T>
T get_or(const json& j, const std::string& section, const std::string& key, T fallback,
         std::vector<std::string>* errs, bool required = false) {
    if (!j.contains(key)) {
        if (required && errs) errs->push_back(section + "." + key + ": missing required key");
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        if (errs) errs->push_back(section + "." + key + ": wrong type");
        return fallback;
    }
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> read_sigma_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("sigma table: cannot open " + path);
    std::vector<double> s, sig;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double a, b;
        if (!(row >> a >> b)) {
            if (first) {
                first = false;  // header line
                continue;
            }
            throw ArgumentError("sigma table: malformed line \"" + line + "\" in " + path);
        }
        first = false;
        s.push_back(a);
        sig.push_back(b);
    }
    if (s.size() < 2) throw ArgumentError("sigma table: need at least 2 samples in " + path);
    return {s, sig};
}

ParsedConfig parse_config(const std::string& text, const std::string& base_dir) {
    std::vector<std::string> errs;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    if (!doc.is_object()) throw ConfigError({"top level must be a JSON object"});

    ParsedConfig out;
    SolverConfig& cfg = out.cfg;

    // --- grid ---
    json jgrid = doc.value("grid", json::object());
    const int dim = get_or<int>(jgrid, "grid", "dim", 1, &errs);
    const int nx = get_or<int>(jgrid, "grid", "nx", 0, &errs, true);
    const double lx = get_or<double>(jgrid, "grid", "lx", 1.0, &errs);
    int ny = get_or<int>(jgrid, "grid", "ny", nx, &errs);
    double ly = get_or<double>(jgrid, "grid", "ly", lx, &errs);
    bool grid_ok = true;
    try {
        cfg.grid = dim == 2 ? GridSpec::rect(nx, ny, lx, ly) : GridSpec::line(nx, lx);
        if (dim != 1 && dim != 2) {
            errs.push_back("grid.dim: must be 1 or 2");
            grid_ok = false;
        }
    } catch (const ArgumentError& e) {
        errs.push_back(e.what());
        grid_ok = false;
        cfg.grid = GridSpec::line(3, 1.0);  // placeholder so later checks can run
    }

    // --- sigma ---
    json jsig = doc.value("sigma", json::object());
    const std::string kind = get_or<std::string>(jsig, "sigma", "kind", "constant", &errs);
    std::string table_file;
    try {
        if (kind == "constant") {
            cfg.sigma = ConductivityModel::constant(get_or<double>(jsig, "sigma", "value", 1.0, &errs));
        } else if (kind == "exponential_decay") {
            cfg.sigma = ConductivityModel::exponential_decay(
                get_or<double>(jsig, "sigma", "rate", 1.0, &errs));
        } else if (kind == "oscillatory_sine") {
            cfg.sigma = ConductivityModel::oscillatory_sine(
                get_or<double>(jsig, "sigma", "c3", 0.5, &errs),
                get_or<double>(jsig, "sigma", "c0", 0.1, &errs),
                get_or<double>(jsig, "sigma", "beta", 1.0, &errs),
                get_or<double>(jsig, "sigma", "gamma", 1.0, &errs));
        } else if (kind == "tabulated") {
            table_file = get_or<std::string>(jsig, "sigma", "file", "", &errs, true);
            if (!table_file.empty()) {
                auto [s, sig] = read_sigma_table(
                    (std::filesystem::path(base_dir) / table_file).string());
                cfg.sigma = ConductivityModel::tabulated(std::move(s), std::move(sig));
            }
        } else {
            errs.push_back("sigma.kind: unknown kind \"" + kind + "\"");
        }
        // Claimed growth constants may override the model's own.
        H1Constants h1 = cfg.sigma.h1();
        h1.c0 = get_or<double>(jsig, "sigma", "h1_c0", h1.c0, &errs);
        h1.c1 = get_or<double>(jsig, "sigma", "h1_c1", h1.c1, &errs);
        h1.c2 = get_or<double>(jsig, "sigma", "h1_c2", h1.c2, &errs);
        h1.beta = get_or<double>(jsig, "sigma", "h1_beta", h1.beta, &errs);
        h1.gamma = get_or<double>(jsig, "sigma", "h1_gamma", h1.gamma, &errs);
        if (!(h1.c0 > 0.0 && h1.c1 > 0.0 && h1.c2 > 0.0 && h1.beta > 0.0 && h1.gamma > 0.0))
            errs.push_back("sigma: (H1) constants must be positive");
        cfg.sigma.set_h1(h1);
    } catch (const std::exception& e) {
        errs.push_back(std::string("sigma: ") + e.what());
    }

    // --- boundary data ---
    json jb = doc.value("boundary", json::object());
    const std::string u0_src = get_or<std::string>(jb, "boundary", "u0", "0", &errs, true);
    const std::string phi0_src = get_or<std::string>(jb, "boundary", "phi0", "0", &errs, true);
    bool exprs_ok = true;
    try {
        Expression u0 = Expression::parse(u0_src);
        cfg.bdata.u0 = [u0](double x, double y, double t) { return u0.eval(x, y, t); };
    } catch (const ArgumentError& e) {
        errs.push_back(std::string("boundary.u0: ") + e.what());
        exprs_ok = false;
    }
    try {
        Expression phi0 = Expression::parse(phi0_src);
        cfg.bdata.phi0 = [phi0](double x, double y, double t) { return phi0.eval(x, y, t); };
    } catch (const ArgumentError& e) {
        errs.push_back(std::string("boundary.phi0: ") + e.what());
        exprs_ok = false;
    }

    // --- time ---
    json jt = doc.value("time", json::object());
    cfg.dt = get_or<double>(jt, "time", "dt", 1e-3, &errs);
    cfg.t_final = get_or<double>(jt, "time", "t_final", 1.0, &errs);
    cfg.slab_t = get_or<double>(jt, "time", "slab", 1.0, &errs);
    if (!(cfg.dt > 0.0)) errs.push_back("time.dt: must be positive");
    if (cfg.t_final < 0.0) errs.push_back("time.t_final: must be nonnegative");
    if (!(cfg.slab_t > 0.0)) errs.push_back("time.slab: must be positive");

    // --- picard ---
    json jp = doc.value("picard", json::object());
    cfg.picard_tol = get_or<double>(jp, "picard", "tol", 1e-10, &errs);
    cfg.picard_max = get_or<int>(jp, "picard", "max_iter", 50, &errs);
    if (!(cfg.picard_tol > 0.0)) errs.push_back("picard.tol: must be positive");
    if (cfg.picard_max < 1) errs.push_back("picard.max_iter: must be >= 1");

    // --- solver ---
    json js = doc.value("solver", json::object());
    cfg.elliptic_tol = get_or<double>(js, "solver", "elliptic_tol", 1e-10, &errs);
    cfg.parabolic_tol = get_or<double>(js, "solver", "parabolic_tol", 1e-13, &errs);
    cfg.solver_max_iter = get_or<int>(js, "solver", "max_iter", 0, &errs);
    if (!(cfg.elliptic_tol > 0.0) || !(cfg.parabolic_tol > 0.0))
        errs.push_back("solver: tolerances must be positive");

    // --- estimates ---
    json je = doc.value("estimates", json::object());
    cfg.est.m = get_or<double>(je, "estimates", "m", 0.5, &errs);
    cfg.est.eps_exp = get_or<double>(je, "estimates", "eps_exp", 0.1, &errs);
    cfg.est.ell = get_or<double>(je, "estimates", "ell", dim == 2 ? 1.5 : 2.0, &errs);
    cfg.est.a2_radii = get_or<std::vector<int>>(je, "estimates", "a2_radii", {2}, &errs);
    if (!(cfg.est.m > 0.0)) errs.push_back("estimates.m: must be positive");
    if (!(cfg.est.eps_exp > 0.0) || cfg.est.eps_exp >= 1.0)
        errs.push_back("estimates.eps_exp: must lie in (0, 1)");
    {
        const double ell_max = (cfg.grid.dim + 2.0) / cfg.grid.dim;
        if (!(cfg.est.ell > 1.0) || !(cfg.est.ell < ell_max))
            errs.push_back("estimates.ell: lemma-range violation, need 1 < ell < " + num(ell_max) +
                           " for dim " + std::to_string(cfg.grid.dim));
    }
    for (int r : cfg.est.a2_radii) {
        if (r < 1) errs.push_back("estimates.a2_radii: radii must be >= 1");
        else if (grid_ok && (2 * r > cfg.grid.nx || (cfg.grid.dim == 2 && 2 * r > cfg.grid.ny)))
            errs.push_back("estimates.a2_radii: window of " + std::to_string(2 * r) +
                           " nodes exceeds the grid");
    }

    // --- homotopy ---
    cfg.eps_homotopy = get_or<std::vector<double>>(doc, "", "eps_homotopy", {1.0}, &errs);
    for (double e : cfg.eps_homotopy)
        if (!(e > 0.0) || e > 1.0) errs.push_back("eps_homotopy: entries must lie in (0, 1]");

    // --- output ---
    json jo = doc.value("output", json::object());
    cfg.out.dir = get_or<std::string>(jo, "output", "dir", "out", &errs);
    cfg.out.cadence = get_or<int>(jo, "output", "cadence", 1, &errs);
    cfg.out.strict = get_or<bool>(jo, "output", "strict", false, &errs);
    if (cfg.out.cadence < 1) errs.push_back("output.cadence: must be >= 1");

    // --- hypothesis (H2): u0 >= 0 on the parabolic boundary, sampled ---
    if (exprs_ok) {
        const GridSpec& g = cfg.grid;
        double worst = 0.0;
        bool violated = false;
        auto probe = [&](double x, double y, double t) {
            const double v = cfg.bdata.u0(x, y, t);
            if (v < worst) worst = v;
            if (v < 0.0 || !std::isfinite(v)) violated = true;
        };
        // 500 samples over the initial slice, 500 over the lateral boundary.
        for (int k = 0; k < 500; ++k) {
            const double frac = k / 499.0;
            if (g.dim == 1) {
                probe(frac * g.lx, 0.0, 0.0);
            } else {
                // Space-filling diagonal sweep of the rectangle.
                const double xx = frac * g.lx;
                const double yy = std::fmod(frac * 7.0, 1.0) * g.ly;
                probe(xx, yy, 0.0);
            }
        }
        const double T = std::max(cfg.t_final, cfg.dt);
        for (int k = 0; k < 500; ++k) {
            const double tt = T * (k % 25) / 24.0;
            const double frac = k / 499.0;
            if (g.dim == 1) {
                probe(frac < 0.5 ? 0.0 : g.lx, 0.0, tt);
            } else {
                // Walk the perimeter.
                const double per = frac * 2.0 * (g.lx + g.ly);
                double xx, yy;
                if (per < g.lx) { xx = per; yy = 0.0; }
                else if (per < g.lx + g.ly) { xx = g.lx; yy = per - g.lx; }
                else if (per < 2.0 * g.lx + g.ly) { xx = per - g.lx - g.ly; yy = g.ly; }
                else { xx = 0.0; yy = per - 2.0 * g.lx - g.ly; }
                probe(xx, yy, tt);
            }
        }
        if (violated)
            errs.push_back("boundary.u0: hypothesis (H2) violated, u0 < 0 or non-finite on the "
                           "parabolic boundary (worst sample " + num(worst) + ")");
    }

    if (!errs.empty()) throw ConfigError(errs);

    // Canonical form: every section materialized with its final value.
    json canon;
    canon["grid"] = {{"dim", cfg.grid.dim}, {"nx", cfg.grid.nx}, {"lx", cfg.grid.lx}};
    if (cfg.grid.dim == 2) {
        canon["grid"]["ny"] = cfg.grid.ny;
        canon["grid"]["ly"] = cfg.grid.ly;
    }
    canon["sigma"]["kind"] = kind;
    if (kind == "constant") canon["sigma"]["value"] = cfg.sigma.constant_value();
    if (kind == "exponential_decay") canon["sigma"]["rate"] = cfg.sigma.decay_rate();
    if (kind == "oscillatory_sine") {
        canon["sigma"]["c3"] = cfg.sigma.oscillatory_c3();
        canon["sigma"]["c0"] = cfg.sigma.oscillatory_c0();
        canon["sigma"]["beta"] = cfg.sigma.oscillatory_beta();
        canon["sigma"]["gamma"] = cfg.sigma.oscillatory_gamma();
    }
    if (kind == "tabulated") canon["sigma"]["file"] = table_file;
    canon["sigma"]["h1_c0"] = cfg.sigma.h1().c0;
    canon["sigma"]["h1_c1"] = cfg.sigma.h1().c1;
    canon["sigma"]["h1_c2"] = cfg.sigma.h1().c2;
    canon["sigma"]["h1_beta"] = cfg.sigma.h1().beta;
    canon["sigma"]["h1_gamma"] = cfg.sigma.h1().gamma;
    canon["boundary"] = {{"u0", u0_src}, {"phi0", phi0_src}};
    canon["time"] = {{"dt", cfg.dt}, {"t_final", cfg.t_final}, {"slab", cfg.slab_t}};
    canon["picard"] = {{"tol", cfg.picard_tol}, {"max_iter", cfg.picard_max}};
    canon["solver"] = {{"elliptic_tol", cfg.elliptic_tol},
                       {"parabolic_tol", cfg.parabolic_tol},
                       {"max_iter", cfg.solver_max_iter}};
    canon["estimates"] = {{"m", cfg.est.m},
                          {"eps_exp", cfg.est.eps_exp},
                          {"ell", cfg.est.ell},
                          {"a2_radii", cfg.est.a2_radii}};
    canon["eps_homotopy"] = cfg.eps_homotopy;
    canon["output"] = {{"dir", cfg.out.dir}, {"cadence", cfg.out.cadence},
                       {"strict", cfg.out.strict}};
    out.canonical = canon.dump(2) + "\n";
    return out;
}

std::string fnv1a64_hex(const std::string& bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("write_outputs: cannot open " + path);
    out << content;
    if (!out) throw ArgumentError("write_outputs: write failed for " + path);
}

std::string state_csv(const SimState& s) {
    const GridSpec& g = s.u.grid;
    std::string out = g.dim == 1 ? "x,u,phi\n" : "x,y,u,phi\n";
    char buf[140];
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (g.dim == 1)
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.node_x(i), s.u.at(i, j),
                              s.phi.at(i, j));
            else
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", g.node_x(i),
                              g.node_y(j), s.u.at(i, j), s.phi.at(i, j));
            out += buf;
        }
    return out;
}

}  // namespace

FileManifest write_outputs(const Trajectory& traj, const SolverConfig& cfg,
                           const std::string& canonical_config, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ArgumentError("write_outputs: cannot create " + dir + ": " + ec.message());

    FileManifest manifest;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file((fs::path(dir) / name).string(), content);
        manifest.files.push_back({name, fnv1a64_hex(content), content.size()});
    };

    // Field snapshots at the report cadence.
    const int cadence = std::max(1, cfg.out.cadence);
    int snap = 0;
    char name[32];
    for (size_t idx = 0; idx < traj.states.size(); ++idx) {
        if (idx % static_cast<size_t>(cadence) != 0) continue;
        std::snprintf(name, sizeof(name), "states_%04d.csv", snap++);
        emit(name, state_csv(traj.states[idx]));
    }

    // Estimate time series.
    std::string est = "t,phi_max_defect,joule_energy,exp_moment_m,grad_u_sup,grad_phi_sup,"
                      "picard_iters\n";
    char row[280];
    for (const EstimateReport& r : traj.reports) {
        std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t,
                      r.phi_max_defect, r.joule_energy, r.exp_moment, r.grad_u_sup, r.grad_phi_sup,
                      r.picard_iters);
        est += row;
    }
    emit("estimates.csv", est);

    // Summary.
    json rep;
    rep["config_hash"] = fnv1a64_hex(canonical_config);
    rep["steps"] = traj.states.empty() ? 0 : static_cast<int>(traj.states.size()) - 1;
    rep["t_final"] = traj.states.empty() ? 0.0 : traj.states.back().t;
    rep["snapshots"] = snap;
    double u_sup = 0.0, grad_phi_sup = 0.0, exp_moment_sup = 0.0, a2_worst = 0.0,
           joule_sup = 0.0, mixed_final = 0.0, coeff_sup = 0.0, defect_sup = 0.0;
    int picard_max_seen = 0;
    bool overflow = false;
    for (const EstimateReport& r : traj.reports) {
        u_sup = std::max(u_sup, r.u_sup);
        grad_phi_sup = std::max(grad_phi_sup, r.grad_phi_sup);
        exp_moment_sup = std::max(exp_moment_sup, r.exp_moment);
        a2_worst = std::max(a2_worst, r.a2_worst);
        joule_sup = std::max(joule_sup, r.joule_energy);
        coeff_sup = std::max(coeff_sup, r.coeff_sup);
        defect_sup = std::max(defect_sup, r.phi_max_defect);
        mixed_final = r.mixed_moment;
        picard_max_seen = std::max(picard_max_seen, r.picard_iters);
        overflow = overflow || r.overflow;
    }
    rep["sup"] = {{"u", u_sup},
                  {"grad_phi", grad_phi_sup},
                  {"exp_moment", exp_moment_sup},
                  {"joule_energy", joule_sup},
                  {"coeff", coeff_sup},
                  {"phi_max_defect", defect_sup},
                  {"a2_worst", a2_worst}};
    rep["mixed_moment_last_slab"] = mixed_final;
    rep["picard_iters_max"] = picard_max_seen;
    rep["exp_moment_overflow"] = overflow;
    rep["slab_index_final"] = traj.states.empty() ? 0 : traj.states.back().slab_index;

    // Level-decay diagnostic on w = e^{eps u} over the whole trajectory,
    // with k chosen to dominate the data and the sup of w.
    if (!traj.states.empty()) {
        const double eps = cfg.est.eps_exp;
        double arg_max = 0.0;
        for (const SimState& s : traj.states) arg_max = std::max(arg_max, eps * s.u.max());
        if (arg_max > 700.0) {
            rep["degiorgi"] = {{"overflow", true}};
        } else {
            std::vector<Field> w;
            double w_sup = 0.0;
            for (const SimState& s : traj.states) {
                Field f(s.u.grid);
                for (int k = 0; k < f.size(); ++k) f[k] = std::exp(eps * s.u[k]);
                w_sup = std::max(w_sup, f.max());
                w.push_back(std::move(f));
            }
            const double k_level =
                2.0 * std::max({1.0, std::exp(traj.states.front().u.max_abs()), w_sup});
            LevelSequence seq = degiorgi_sequence(w, cfg.dt, k_level, cfg.est.ell, 8);
            rep["degiorgi"] = {{"overflow", false},
                               {"k", k_level},
                               {"w_sup", w_sup},
                               {"y0", seq.y_n.front()},
                               {"y_last", seq.y_n.back()},
                               {"decayed", seq.decayed}};
        }
    }

    rep["warnings"] = traj.warnings;
    rep["invariant_violations"] = traj.violations;
    emit("report.json", rep.dump(2) + "\n");

    // Manifest last, listing everything else.
    json man;
    man["files"] = json::array();
    for (const ManifestEntry& e : manifest.files)
        man["files"].push_back({{"name", e.name}, {"hash", e.hash}, {"bytes", e.bytes}});
    write_file((fs::path(dir) / "manifest.json").string(), man.dump(2) + "\n");
    return manifest;
}

}  // namespace thermistor
