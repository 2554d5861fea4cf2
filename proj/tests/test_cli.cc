////////////////////////////////////////////////////////////////////////////////
// test_cli.cc
////////////////////////////////////////////////////////////////////////////////
// End-to-end runs of the command-line tool: exit codes, JSON shape,
// determinism, config handling.  The binary path comes in via WGC_CLI_PATH.
////////////////////////////////////////////////////////////////////////////////
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string &args, bool merge_stderr = false) {
    std::string cmd = std::string(WGC_CLI_PATH) + " " + args +
                      (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE *pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, out};
}

json run_json(const std::string &args, int expect_code = 0) {
    RunResult r = run(args);
    REQUIRE(r.exit_code == expect_code);
    return json::parse(r.out);
}

std::string strip_timestamp(std::string s) {
    size_t pos = s.find("generated_at");
    if (pos == std::string::npos) return s;
    size_t start = s.rfind('\n', pos);
    size_t end = s.find('\n', pos);
    return s.substr(0, start) + s.substr(end);
}

std::filesystem::path temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("stress bound: values, envelope keys, determinism") {
    json doc = run_json("bound-stress --f 0.5 --lambda 1 --mu 1 --applied 0,0,1,0,0,0");
    CHECK(doc["command"] == "bound-stress");
    CHECK(doc["result"]["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(doc["result"]["phase_term"].get<double>() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(doc["result"]["sign_flipped"].get<bool>() == false);
    CHECK(doc["meta"].contains("version"));
    CHECK(doc["meta"].contains("generated_at"));
    CHECK(doc["input"]["f"].get<double>() == 0.5);

    RunResult a = run("bound-stress --f 0.5 --lambda 1 --mu 1 --applied 0,0,1,0,0,0");
    RunResult b = run("bound-stress --f 0.5 --lambda 1 --mu 1 --applied 0,0,1,0,0,0");
    CHECK(strip_timestamp(a.out) == strip_timestamp(b.out));
}

TEST_CASE("full material reduces the bound to the pure compliance energy") {
    json doc = run_json("bound-stress --f 1 --lambda 1 --mu 1 --applied 1,-2,3,0.5,0,0");
    double v = doc["result"]["value"].get<double>();
    double c = doc["result"]["phase_term"].get<double>();
    CHECK(v == doctest::Approx(c).epsilon(1e-14));
    CHECK(doc["result"]["degenerate_term"].get<double>() ==
          doctest::Approx(0.0).epsilon(1e-14).scale(1.0));
}

TEST_CASE("nine-component tensor input") {
    // Row-major symmetric matrix equals its Mandel form.
    json m9 = run_json("bound-stress --f 0.4 --lambda 2 --mu 0.8 "
                       "--applied 1,0.5,0,0.5,2,0,0,0,3");
    json m6 = run_json("bound-stress --f 0.4 --lambda 2 --mu 0.8 "
                       "--applied 1,2,3,0,0,0.70710678118654752");
    CHECK(m9["result"]["value"].get<double>() ==
          doctest::Approx(m6["result"]["value"].get<double>()).epsilon(1e-12));

    RunResult bad = run("bound-stress --f 0.4 --lambda 2 --mu 0.8 "
                        "--applied 1,0.5,0,0.4,2,0,0,0,3", true);
    CHECK(bad.exit_code == 2);
    CHECK(bad.out.find("symmetric") != std::string::npos);
}

TEST_CASE("strain bound pins the rigid composite energy") {
    json doc = run_json("bound-strain --f 0.5 --lambda 1 --mu 1 --applied 1,1,1,0,0,0");
    CHECK(doc["result"]["value"].get<double>() == doctest::Approx(42.0).epsilon(1e-12));
    CHECK_FALSE(doc["result"].contains("sign_flipped"));
}

TEST_CASE("invalid inputs exit 2 with a structured error") {
    RunResult r = run("bound-stress --f 0 --lambda 1 --mu 1 --applied 0,0,1,0,0,0", true);
    CHECK(r.exit_code == 2);
    json err = json::parse(r.out);
    CHECK(err["code"].get<int>() == 2);
    CHECK(err["error"].is_string());

    RunResult missing = run("bound-stress --f 0.5", true);
    CHECK(missing.exit_code == 2);

    RunResult unknown = run("no-such-command", true);
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("config files feed jobs and flags override them") {
    auto path = temp_file("wgc_cli_cfg.json");
    {
        std::ofstream out(path);
        out << R"({"schema": "wgc-job/1", "command": "bound-stress",
                   "f": 0.7, "lambda": 1.0, "mu": 1.0,
                   "applied": [0, 0, 1, 0, 0, 0]})";
    }
    json doc = run_json("bound-stress --config " + path.string());
    CHECK(doc["input"]["f"].get<double>() == 0.7);
    // (1-f)/(2 mu f) * 4/5 + 2/5 at f = 0.7.
    CHECK(doc["result"]["value"].get<double>() ==
          doctest::Approx(0.4 + (0.3 / 1.4) * 0.8).epsilon(1e-12));

    json over = run_json("bound-stress --config " + path.string() + " --f 0.5");
    CHECK(over["input"]["f"].get<double>() == 0.5);
    CHECK(over["result"]["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-12));

    {
        std::ofstream out(path);
        out << R"({"schema": "wgc-job/1", "command": "bound-stress",
                   "f": 0.7, "lambda": 1.0, "mu": 1.0, "sigma0": [1]})";
    }
    RunResult bad = run("bound-stress --config " + path.string(), true);
    CHECK(bad.exit_code == 2);
    CHECK(bad.out.find("sigma0") != std::string::npos);

    {
        std::ofstream out(path);
        out << R"({"schema": "wgc-job/1", "command": "membership", "f": 0.7})";
    }
    RunResult mismatch = run("bound-stress --config " + path.string(), true);
    CHECK(mismatch.exit_code == 2);
    std::filesystem::remove(path);
}

TEST_CASE("membership verdicts and the --expect gate") {
    json b = run_json("boundary-strain --f 0.5 --lambda 1 --mu 1 "
                      "--sigma 0,0,1,0,0,0 --perp 0.1,0,0.2,0,0");
    REQUIRE(b["result"]["eps"].size() == 6);
    std::string eps;
    for (size_t i = 0; i < 6; ++i) {
        if (i) eps += ",";
        std::ostringstream comp;
        comp << std::setprecision(17) << b["result"]["eps"][i].get<double>();
        eps += comp.str();
    }
    CHECK(b["result"]["verdict"] == "boundary");

    json m = run_json("membership --side stress --f 0.5 --lambda 1 --mu 1 "
                      "--sigma 0,0,1,0,0,0 --eps " + eps + " --expect boundary");
    CHECK(m["result"]["expected_match"].get<bool>());

    RunResult wrong = run("membership --side stress --f 0.5 --lambda 1 --mu 1 "
                          "--sigma 0,0,1,0,0,0 --eps " + eps + " --expect interior");
    CHECK(wrong.exit_code == 3);
    json wdoc = json::parse(wrong.out); // report still emitted
    CHECK(wdoc["result"]["expected_match"].get<bool>() == false);
}

TEST_CASE("laminate optimization and the degeneration sweep") {
    json opt = run_json("laminate-opt --mode complementary --f 0.5 --lambda 1 "
                        "--mu 1 --applied 0,0,1,0,0,0 --rank 2 --budget 4000");
    double ratio = opt["result"]["energy_over_bound"].get<double>();
    CHECK(ratio > 0.95);
    CHECK(ratio < 1.0 + 1e-9);
    std::string tree = opt["result"]["tree"].get<std::string>();
    CHECK(tree.rfind("lam(", 0) == 0);
    CHECK(opt["result"]["fraction"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));

    json sweep = run_json("delta-sweep --mode complementary --lambda 1 --mu 1 "
                          "--applied 0,0,1,0,0,0 --ladder 1e-2,1e-3,1e-4 "
                          "--tree 'lam(0 0 1; 0.5; p1; p2)'");
    CHECK(sweep["result"]["rows"].size() == 3);
    CHECK(sweep["result"]["monotone"].get<bool>());
    CHECK(sweep["input"]["tree"].get<std::string>().rfind("lam(", 0) == 0);

    RunResult bad = run("delta-sweep --mode complementary --lambda 1 --mu 1 "
                        "--applied 0,0,1,0,0,0 --ladder 1e-2 "
                        "--tree 'lam(0 0 1; 0.5; p1; p2)'", true);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("convergence verification writes reports and side tables") {
    auto csv = temp_file("wgc_cli_conv.csv");
    json doc = run_json("verify-convergence --side stress --f 0.5 --lambda 1 "
                        "--mu 1 --applied 0,0,1,0,0,0 --perp 0,0,0,0,0 "
                        "--ladder 1e-2,1e-4,1e-6 --csv " + csv.string());
    CHECK(doc["result"]["verified"].get<bool>());
    CHECK(doc["result"]["margins_ok"].get<bool>());
    CHECK(doc["result"]["report"]["rows"].size() == 3);

    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header.find("c_requested") != std::string::npos);
    std::filesystem::remove(csv);
}

TEST_CASE("thermal subcommands") {
    json pair = run_json("thermal-bounds --q 1.5,0,0 --e 1,0,0 --f 0.5 "
                         "--k1 2 --k2 1 --dim 3");
    CHECK(pair["result"]["verdict"] == "boundary");
    CHECK(pair["result"]["k_plus"].get<double>() == doctest::Approx(1.5).epsilon(1e-14));

    // Insulating phase: threshold shows up.
    json ins = run_json("thermal-bounds --q 1,0,0 --e 2,0,0 --f 0.5 --k1 1 --k2 0 --dim 3");
    CHECK(ins["result"].contains("insulating_threshold"));
    CHECK(ins["result"]["insulating_threshold"].get<double>() ==
          doctest::Approx(2.0).epsilon(1e-14));

    json lam = run_json("thermal-laminate --q 1.5,1.3333333333333333,0 "
                        "--e 1,1,0 --f 0.5 --k1 2 --k2 1 --dim 3");
    CHECK(lam["result"]["K"].size() == 3);
    CHECK(lam["result"]["consistency"].get<double>() <= 1e-10);

    RunResult inf = run("thermal-laminate --q 1.4,0,0 --e 1,0,0 --f 0.5 "
                        "--k1 2 --k2 1 --dim 3", true);
    CHECK(inf.exit_code == 3);
    CHECK(json::parse(inf.out)["code"].get<int>() == 3);
}

TEST_CASE("shield and temperature subcommands") {
    auto fcsv = temp_file("wgc_cli_f.csv");
    json doc = run_json("shield --width 1 --window 0 --nx 12 --ny 12 "
                        "--budget 1 --k1 1 --f-csv " + fcsv.string());
    CHECK(doc["result"]["resistance"].get<double>() == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(doc["result"]["saturated"].get<bool>() == false);

    std::ifstream in(fcsv);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,f");
    std::filesystem::remove(fcsv);

    json temp = run_json("temperature --width 1 --window 0 --nx 12 --ny 12 "
                         "--budget 1 --k1 1");
    CHECK(temp["result"]["has_temperature"].get<bool>());
    CHECK(temp["result"]["flagged_cells"].get<int>() == 0);
    CHECK(temp["result"]["inlet_drop"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("output lands in a file when asked") {
    auto out = temp_file("wgc_cli_out.json");
    RunResult r = run("bound-stress --f 0.5 --lambda 1 --mu 1 "
                      "--applied 0,0,1,0,0,0 --output " + out.string());
    CHECK(r.exit_code == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    json doc = json::parse(in);
    CHECK(doc["result"]["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-12));
    std::filesystem::remove(out);
}
