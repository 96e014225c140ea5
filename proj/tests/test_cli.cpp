#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "msfde/config.hpp"
#include "msfde/errors.hpp"
#include "msfde/runner.hpp"

using namespace msfde;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path p = fs::temp_directory_path() /
                       ("msfde_cli_" + tag + "_" + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_text(const fs::path& dir, const std::string& name,
                    const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct CliResult {
    int code = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    const fs::path cap = fresh_dir("cap") / "out.txt";
    const std::string cmd = std::string(MSFDE_CLI_PATH) + " " + args + " > " +
                            cap.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    CliResult r;
    r.code = (rc == -1) ? -1 : WEXITSTATUS(rc);
    std::ifstream in(cap, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    r.output = os.str();
    return r;
}

const char* kMinimalConfig = R"(
[grid]
h = 0.01
T = 2
tau = 0.01

[nu]
atoms = [[0, -1]]

[f]
kind = zero

[g]
kind = zero

[psi]
kind = constant
c = 1

[analyses]
run = [resolvent]
)";

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void check_config_error(const std::string& body, const std::string& needle) {
    const fs::path dir = fresh_dir("cfgerr");
    const fs::path p = write_text(dir, "c.cfg", body);
    try {
        (void)load_config(p.string());
        FAIL_CHECK("expected ConfigError for config:\n" << body);
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(needle) != std::string::npos,
                      "message '" << what << "' lacks '" << needle << "'");
    }
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config errors name the offending key") {
    check_config_error("[nu]\natoms = [[0, -1]]\n", "grid.h");
    check_config_error("[grid]\nh = 0.01\nT = 2\n", "grid.tau");
    check_config_error("[grid]\nh = abc\nT = 2\ntau = 0.01\n", "grid.h");
    check_config_error("[grid]\nh = 0.01\nT = 2\ntau = 0.015\n", "grid.h");
    check_config_error(
        "[grid]\nh = 0.01\nT = 2\ntau = 0.01\nwidth = 3\n", "grid.width");
    check_config_error("[warp]\nspeed = 9\n", "unknown section");
    check_config_error("h = 0.01\n", "before any [section]");
    check_config_error(
        std::string(kMinimalConfig) + "[mc]\npaths = 1\n", "mc.paths");
    check_config_error(
        std::string(kMinimalConfig) + "[mc]\npsi_mode = maybe\n",
        "mc.psi_mode");
    check_config_error(
        std::string(kMinimalConfig) + "[mc]\nseed = -3\n", "mc.seed");
    check_config_error("[grid]\nh = 0.01\nT = 2\ntau = 0.01\n[nu]\natoms = "
                       "[[0.5, 1]]\n",
                       "nu.atoms");
    check_config_error("[grid]\nh = 0.01\nT = 2\ntau = 0.01\n[nu]\natoms = "
                       "[[-0.005, 1]]\n",
                       "nu.atoms");
    check_config_error(
        std::string(kMinimalConfig) + "[f]\nkind = banana\n", "f.kind");
}

TEST_CASE("config errors carry line numbers") {
    const fs::path dir = fresh_dir("cfgline");
    const fs::path p = write_text(
        dir, "c.cfg", "[grid]\nh = 0.01\nT = two\ntau = 0.01\n");
    try {
        (void)load_config(p.string());
        FAIL_CHECK("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("grid.T") != std::string::npos);
    }
}

TEST_CASE("defaults: analyses, checkpoints, mc, and zero mu") {
    const fs::path dir = fresh_dir("cfgdef");
    const fs::path p = write_text(
        dir, "c.cfg",
        "[grid]\nh = 0.01\nT = 2\ntau = 0.01\n[nu]\natoms = [[0, -1]]\n");
    const RunConfig cfg = load_config(p.string());
    CHECK(cfg.analyses.size() == 6);
    REQUIRE(cfg.checkpoints.size() == 4);
    CHECK(cfg.checkpoints[0] == doctest::Approx(0.5));
    CHECK(cfg.checkpoints[3] == doctest::Approx(2.0));
    CHECK(cfg.mc.paths == 1000);
    CHECK(cfg.mc.seed == 1);
    CHECK(cfg.mc.psi_mode == PsiMode::deterministic);
    CHECK(total_variation(cfg.mu) == 0.0);
    CHECK(cfg.f.kind == ForcingKind::zero);
    CHECK(cfg.psi.kind == PsiSpec::Kind::constant);
    CHECK(cfg.psi.c == 1.0);
}

TEST_CASE("initial segment kinds sample correctly") {
    const Grid grid(0.25, 1.0, 0.5);
    {
        PsiSpec s;
        s.kind = PsiSpec::Kind::exp;
        s.lambda = -1.0;
        const auto psi = sample_psi(s, grid);
        CHECK(psi.at(-2) == doctest::Approx(std::exp(0.5)));
        CHECK(psi.at(0) == doctest::Approx(1.0));
    }
    {
        PsiSpec s;
        s.kind = PsiSpec::Kind::cos_exp;
        s.re = 0.5;
        s.im = 3.0;
        const auto psi = sample_psi(s, grid);
        CHECK(psi.at(-1) ==
              doctest::Approx(std::exp(-0.125) * std::cos(-0.75)));
    }
    {
        PsiSpec s;  // constant 1 by default
        const auto psi = sample_psi(s, grid);
        CHECK(psi.at(-2) == 1.0);
        CHECK(psi.size() == 3);
    }
}

TEST_CASE("run: resolvent-only analysis writes just its outputs") {
    const fs::path dir = fresh_dir("runres");
    const fs::path cfg = write_text(dir, "c.cfg", kMinimalConfig);
    const fs::path out = dir / "out";
    run(cfg.string(), out.string());
    CHECK(fs::exists(out / "resolvent.csv"));
    CHECK(fs::exists(out / "report.txt"));
    CHECK_FALSE(fs::exists(out / "kernel.csv"));
    CHECK_FALSE(fs::exists(out / "meansquare.csv"));
    CHECK_FALSE(fs::exists(out / "mc.csv"));

    const auto lines = split_lines(slurp(out / "resolvent.csv"));
    REQUIRE(lines.size() == 202);  // header + 201 nodes
    CHECK(lines[0] == "t,r");
    // Node 100 sits at t = 1; r(1) ~ e^{-1}.
    std::istringstream row(lines[101]);
    std::string t_tok, r_tok;
    std::getline(row, t_tok, ',');
    std::getline(row, r_tok, ',');
    CHECK(std::stod(t_tok) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::stod(r_tok) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
    // 17 significant digits: reparsing reproduces the node exactly.
    CHECK(std::stod(lines[2].substr(0, lines[2].find(','))) == 0.01);
    // No CR line endings.
    CHECK(slurp(out / "resolvent.csv").find('\r') == std::string::npos);
}

TEST_CASE("cli: exit codes for parse, config, and runtime errors") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("bogus-subcommand").code == 1);
    CHECK(run_cli("run").code == 1);  // missing required --config
    {
        const auto r = run_cli("run --config /nonexistent.cfg --out " +
                               (fresh_dir("cli0") / "o").string());
        CHECK(r.code == 1);
        CHECK(r.output.find("config error") != std::string::npos);
    }
    {
        // Valid config whose chirp cannot be resolved on the mesh: a domain
        // refusal at runtime, not a config error.
        const fs::path dir = fresh_dir("cli2");
        const std::string body =
            "[grid]\nh = 0.01\nT = 8\ntau = 0.01\n[nu]\natoms = [[0, -1]]\n"
            "[f]\nkind = chirp\nalpha = 0.5\nbeta = 1\n"
            "[analyses]\nrun = [resolvent, classify]\n";
        const fs::path cfg = write_text(dir, "c.cfg", body);
        const auto r = run_cli("run --config " + cfg.string() + " --out " +
                               (dir / "o").string());
        CHECK(r.code == 2);
        CHECK(r.output.find("error") != std::string::npos);
    }
    {
        const fs::path dir = fresh_dir("cli3");
        const fs::path cfg = write_text(dir, "c.cfg", kMinimalConfig);
        const auto r = run_cli("run --config " + cfg.string() + " --out " +
                               (dir / "o").string());
        CHECK(r.code == 0);
    }
}

TEST_CASE("cli: unknown demo lists the valid names") {
    const auto r =
        run_cli("demo no-such-demo --out " + fresh_dir("cli4").string());
    CHECK(r.code == 1);
    for (const std::string& name : demo_names())
        CHECK(r.output.find(name) != std::string::npos);
}

TEST_CASE("demo scalar: full artifact set and reproducible bytes") {
    const fs::path out1 = fresh_dir("demo1");
    const fs::path out2 = fresh_dir("demo2");
    demo("scalar", out1.string());
    demo("scalar", out2.string());
    for (const char* name : {"config.cfg", "resolvent.csv", "kernel.csv",
                             "meansquare.csv", "mc.csv", "report.txt"})
        CHECK(fs::exists(out1 / name));
    // Byte-identical outputs on a rerun.
    for (const char* name : {"resolvent.csv", "kernel.csv", "meansquare.csv",
                             "mc.csv", "report.txt"})
        CHECK(slurp(out1 / name) == slurp(out2 / name));

    const std::string report = slurp(out1 / "report.txt");
    CHECK(report.find("[vanishing averages]") != std::string::npos);
    CHECK(report.find("absolute-value drift averages") != std::string::npos);
    CHECK(report.find("comparison") != std::string::npos);
    CHECK(report.find("overall: PASS") != std::string::npos);
    // The written config reruns through the normal entry point.
    const auto r = run_cli("run --config " +
                           (out1 / "config.cfg").string() + " --out " +
                           (fresh_dir("demo3")).string());
    CHECK(r.code == 0);
}

TEST_CASE("shipped demo configs match the built-in texts") {
    for (const std::string& name : demo_names()) {
        const fs::path p =
            fs::path(MSFDE_SOURCE_DIR) / "configs" / (name + ".cfg");
        REQUIRE_MESSAGE(fs::exists(p), "missing " << p.string());
        CHECK_MESSAGE(slurp(p) == demo_config_text(name),
                      "configs/" << name << ".cfg drifted from the built-in");
    }
}

} // TEST_SUITE
