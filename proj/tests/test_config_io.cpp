#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "thermistor/config_io.hpp"
#include "thermistor/coupler.hpp"
#include "thermistor/errors.hpp"
#include "thermistor/expression.hpp"
#include "test_helpers.hpp"

using namespace thermistor;

namespace {

const char* kMinimalConfig = R"({
  "grid": {"dim": 1, "nx": 11, "lx": 1.0},
  "sigma": {"kind": "constant", "value": 1.0},
  "boundary": {"u0": "0", "phi0": "x"},
  "time": {"dt": 0.01, "t_final": 0.05}
})";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("config_io");

TEST_CASE("expression grammar") {
    Expression e = Expression::parse("2 + 3*4");
    CHECK(e.eval(0, 0, 0) == doctest::Approx(14.0));
    CHECK(Expression::parse("2^3^2").eval(0, 0, 0) == doctest::Approx(512.0));  // right assoc
    CHECK(Expression::parse("-x^2").eval(3, 0, 0) == doctest::Approx(-9.0));
    CHECK(Expression::parse("2^-1").eval(0, 0, 0) == doctest::Approx(0.5));
    CHECK(Expression::parse("sin(x)*cos(y)+exp(t)").eval(0.3, 0.4, 0.5) ==
          doctest::Approx(std::sin(0.3) * std::cos(0.4) + std::exp(0.5)));
    CHECK(Expression::parse("log(exp(2))").eval(0, 0, 0) == doctest::Approx(2.0));
    CHECK(Expression::parse("(1 - x) * x / 2").eval(0.5, 0, 0) == doctest::Approx(0.125));
    CHECK(Expression::parse("-1").eval(0, 0, 0) == -1.0);

    CHECK_THROWS_AS(Expression::parse("2 +"), ArgumentError);
    CHECK_THROWS_AS(Expression::parse("sqrt(2)"), ArgumentError);
    CHECK_THROWS_AS(Expression::parse("sin 2"), ArgumentError);
    CHECK_THROWS_AS(Expression::parse("(1"), ArgumentError);
    CHECK_THROWS_AS(Expression::parse(""), ArgumentError);
    CHECK_THROWS_WITH_AS(Expression::parse("x + foo"), doctest::Contains("position"),
                         ArgumentError);
}

TEST_CASE("minimal config parses") {
    ParsedConfig pc = parse_config(kMinimalConfig);
    CHECK(pc.cfg.grid.nx == 11);
    CHECK(pc.cfg.dt == doctest::Approx(0.01));
    CHECK(pc.cfg.sigma.kind() == SigmaKind::Constant);
    CHECK(pc.cfg.bdata.phi0(0.5, 0.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("negative initial data names the hypothesis") {
    std::string text = kMinimalConfig;
    const auto pos = text.find("\"u0\": \"0\"");
    text.replace(pos, 9, "\"u0\": \"-1\"");
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("(H2)"), ConfigError);
}

TEST_CASE("level exponent outside the lemma range is rejected") {
    const char* text = R"({
      "grid": {"dim": 2, "nx": 11, "ny": 11, "lx": 1.0, "ly": 1.0},
      "sigma": {"kind": "constant", "value": 1.0},
      "boundary": {"u0": "0", "phi0": "x"},
      "estimates": {"ell": 2.5}
    })";
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("lemma-range"), ConfigError);
}

TEST_CASE("all violations are collected, not just the first") {
    const char* text = R"({
      "grid": {"dim": 1, "nx": 2, "lx": 1.0},
      "sigma": {"kind": "nosuch"},
      "boundary": {"u0": "x +", "phi0": "x"},
      "time": {"dt": -0.5}
    })";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.violations.size() >= 4);
        bool grid = false, sigma = false, expr = false, dt = false;
        for (const std::string& v : e.violations) {
            grid = grid || v.find("nx") != std::string::npos;
            sigma = sigma || v.find("nosuch") != std::string::npos;
            expr = expr || v.find("u0") != std::string::npos;
            dt = dt || v.find("dt") != std::string::npos;
        }
        CHECK(grid);
        CHECK(sigma);
        CHECK(expr);
        CHECK(dt);
    }
}

TEST_CASE("canonical form is idempotent") {
    ParsedConfig first = parse_config(kMinimalConfig);
    ParsedConfig second = parse_config(first.canonical);
    CHECK(first.canonical == second.canonical);
}

TEST_CASE("oscillatory sigma round-trips with overridden constants") {
    const char* text = R"({
      "grid": {"dim": 1, "nx": 11, "lx": 1.0},
      "sigma": {"kind": "oscillatory_sine", "c3": 0.5, "c0": 0.1, "beta": 1.0, "gamma": 1.0,
                "h1_c1": 1.2},
      "boundary": {"u0": "0", "phi0": "x"}
    })";
    ParsedConfig pc = parse_config(text);
    CHECK(pc.cfg.sigma.h1().c1 == doctest::Approx(1.2));
    CHECK(pc.cfg.sigma.oscillatory_c0() == doctest::Approx(0.1));
    ParsedConfig again = parse_config(pc.canonical);
    CHECK(again.cfg.sigma.h1().c1 == doctest::Approx(1.2));
    CHECK(pc.canonical == again.canonical);
}

TEST_CASE("tabulated sigma reads a csv") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "thermistor_tab_test";
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "sigma.csv");
        csv << "s,sigma\n0,1.0\n1,0.6\n2,0.5\n5,0.45\n";
    }
    const char* text = R"({
      "grid": {"dim": 1, "nx": 11, "lx": 1.0},
      "sigma": {"kind": "tabulated", "file": "sigma.csv"},
      "boundary": {"u0": "0", "phi0": "x"}
    })";
    ParsedConfig pc = parse_config(text, dir.string());
    CHECK(pc.cfg.sigma.kind() == SigmaKind::Tabulated);
    CHECK(pc.cfg.sigma.eval(0.0) == doctest::Approx(1.0));
    CHECK(pc.cfg.sigma.eval(2.0) == doctest::Approx(0.5));
    fs::remove_all(dir);
}

TEST_CASE("write_outputs: empty trajectory yields a bare estimates header") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "thermistor_out_empty";
    fs::remove_all(dir);
    Trajectory traj;
    SolverConfig cfg = thermistor::testing::reference_config(11, 0.01, 0.0);
    FileManifest man = write_outputs(traj, cfg, "{}", dir.string());
    REQUIRE(fs::exists(dir / "estimates.csv"));
    const std::string est = slurp(dir / "estimates.csv");
    CHECK(est ==
          "t,phi_max_defect,joule_energy,exp_moment_m,grad_u_sup,grad_phi_sup,picard_iters\n");
    bool found = false;
    for (const auto& e : man.files) found = found || e.name == "estimates.csv";
    CHECK(found);
    fs::remove_all(dir);
}

TEST_CASE("write_outputs: snapshot count and rerun hashes") {
    namespace fs = std::filesystem;
    SolverConfig cfg = thermistor::testing::reference_config(21, 0.01, 0.1);
    cfg.out.cadence = 4;
    RunResult res = run_simulation(cfg);
    REQUIRE(res.status == RunStatus::Completed);

    const fs::path dir_a = fs::temp_directory_path() / "thermistor_out_a";
    const fs::path dir_b = fs::temp_directory_path() / "thermistor_out_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    FileManifest a = write_outputs(res.traj, cfg, "{}", dir_a.string());

    // floor(T/dt/cadence) + 1 snapshots.
    const int expected = static_cast<int>(std::floor(0.1 / 0.01 / 4)) + 1;
    int snaps = 0;
    for (const auto& e : a.files)
        if (e.name.rfind("states_", 0) == 0) ++snaps;
    CHECK(snaps == expected);

    RunResult res2 = run_simulation(cfg);
    FileManifest b = write_outputs(res2.traj, cfg, "{}", dir_b.string());
    REQUIRE(a.files.size() == b.files.size());
    for (size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].name == b.files[i].name);
        CHECK(a.files[i].hash == b.files[i].hash);
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("fnv1a64 hash is stable") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a64_hex("hello") != fnv1a64_hex("hellp"));
}

TEST_SUITE_END();
