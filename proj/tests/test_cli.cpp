#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("MULTIFRAC_CLI");
    REQUIRE_MESSAGE(p != nullptr, "MULTIFRAC_CLI must point at the binary");
    return p;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) res.out += buf.data();
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "multifrac_cli_test";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("covariance queries print closed-form values") {
    RunResult r = run("covariance fbm --H 0.5 --t 1 --s 2");
    CHECK(r.exit_code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(1.0).epsilon(1e-12));

    RunResult m = run("covariance mbm --Ht 0.3 --Hs 0.3 --t 1 --s 2");
    CHECK(m.exit_code == 0);
    RunResult f = run("covariance fbm --H 0.3 --t 1 --s 2");
    CHECK(std::stod(m.out) == doctest::Approx(std::stod(f.out)).epsilon(1e-12));

    RunResult inc = run("covariance increment --H 0.5 --delta 1");
    CHECK(inc.exit_code == 0);
    CHECK(std::abs(std::stod(inc.out)) < 1e-12);

    RunResult mix = run("covariance stationary --t 1 --s 1 --H-atoms 0.4,0.6 "
                        "--H-weights 1,1");
    CHECK(mix.exit_code == 0);
    CHECK(std::stod(mix.out) == doctest::Approx(1.07645590249791449).epsilon(1e-10));

    // the removable singularity needs the explicit limit flag
    RunResult sing = run("covariance mbm --Ht 0.4 --Hs 0.6 --t 1 --s 1");
    CHECK(sing.exit_code == 2);
    RunResult lim = run("covariance mbm --Ht 0.4 --Hs 0.6 --t 1 --s 1 --limit");
    CHECK(lim.exit_code == 0);
    CHECK(std::stod(lim.out) == doctest::Approx(0.96688279904640254).epsilon(1e-5));
}

TEST_CASE("simulate writes deterministic CSV") {
    const fs::path dir = temp_dir();
    const fs::path cfg = dir / "run.json";
    {
        std::ofstream out(cfg);
        out << R"({"schema": 1, "seed": 42,
                   "grid": {"t_min": 0.0, "t_max": 1.0, "n_cells": 64},
                   "kernel": {"family": "ito_mbm"},
                   "hurst": {"variant": "constant", "value": 0.5},
                   "sim": {"substeps": 2, "tol_truncation": 0.005}})";
    }
    const fs::path out1 = dir / "a.csv", out2 = dir / "b.csv", out3 = dir / "c.csv";
    CHECK(run("simulate --config " + cfg.string() + " --out " + out1.string()).exit_code == 0);
    CHECK(run("simulate --config " + cfg.string() + " --out " + out2.string()).exit_code == 0);
    const std::string a = slurp(out1), b = slurp(out2);
    CHECK(a == b);
    // 65 data rows plus header, trailing newline
    std::size_t lines = 0;
    for (char c : a) lines += c == '\n';
    CHECK(lines == 66);
    CHECK(a.substr(0, 10) == std::string("t,value,H\n"));

    CHECK(run("simulate --config " + cfg.string() + " --seed 43 --out " + out3.string())
              .exit_code == 0);
    CHECK(slurp(out3) != a);
}

TEST_CASE("config errors exit with code 2, io errors with 3") {
    const fs::path dir = temp_dir();
    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"schema": 1, "grid": {"t_min": 0, "t_max": 1, "cells": 64}})";
    }
    CHECK(run("simulate --config " + bad.string() + " --out " + (dir / "x.csv").string())
              .exit_code == 2);

    const fs::path bad2 = dir / "bad2.json";
    {
        std::ofstream out(bad2);
        out << R"({"schema": 2})";
    }
    CHECK(run("simulate --config " + bad2.string() + " --out " + (dir / "x.csv").string())
              .exit_code == 2);

    CHECK(run("simulate --nonsense").exit_code == 2);

    const fs::path cfg = dir / "ok.json";
    {
        std::ofstream out(cfg);
        out << R"({"schema": 1, "grid": {"n_cells": 16},
                   "sim": {"substeps": 1, "tol_truncation": 0.01}})";
    }
    CHECK(run("simulate --config " + cfg.string() + " --out /nonexistent_dir/x.csv")
              .exit_code == 3);
}

TEST_CASE("verify kc: correct claim passes, over-claim fails") {
    const fs::path dir = temp_dir() / "kc";
    RunResult ok = run("verify kc --out " + dir.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("bounded") != std::string::npos);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "kc_ratios.csv"));

    RunResult bad = run("verify kc --claim 0.6");
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("unbounded_trend") != std::string::npos);
}

TEST_CASE("verify rescale and holder pass with the default configs") {
    RunResult r = run("verify rescale");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);

    const fs::path dir = temp_dir() / "holder";
    RunResult h = run("verify holder --out " + dir.string());
    CHECK(h.exit_code == 0);
    CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("verify fig2 lands in the expected bands") {
    const fs::path dir = temp_dir() / "fig2";
    RunResult r = run("verify fig2 --out " + dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "fig2_contrast.csv"));
    const std::string summary = slurp(dir / "summary.json");
    CHECK(summary.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("reproduce emits stable figure bundles") {
    const fs::path dir1 = temp_dir() / "fig2_a";
    const fs::path dir2 = temp_dir() / "fig2_b";
    CHECK(run("reproduce fig2 --out " + dir1.string()).exit_code == 0);
    CHECK(run("reproduce fig2 --out " + dir2.string()).exit_code == 0);
    for (const char* name : {"mbm_path.csv", "ito_mbm_path.csv", "hurst_path.csv",
                             "manifest.json"}) {
        CHECK(fs::exists(dir1 / name));
        CHECK(slurp(dir1 / name) == slurp(dir2 / name));
    }

    const fs::path dir3 = temp_dir() / "fig1";
    CHECK(run("reproduce fig1 --out " + dir3.string()).exit_code == 0);
    CHECK(fs::exists(dir3 / "matern_path.csv"));
    CHECK(fs::exists(dir3 / "hurst_path.csv"));
    CHECK(fs::exists(dir3 / "manifest.json"));
}
