#include "sphereqv/cli.hpp"
#include "sphereqv/moments.hpp"
#include "sphereqv/specfun.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace sphereqv;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = "cli_test_" + name;
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// splitmix64 finalizer, written out from its published constants.
std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

const std::string kSingleSpec = R"({"target":{"kind":"single_ell","ell":3,"c_ell":1.0},"n":32,"seed":7,"replications":1,"route":"harmonic"})";

}  // namespace

TEST_CASE("moments subcommand") {
    const auto r = cli({"moments", "--ell", "1", "--n", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("0.279692421") != std::string::npos);

    const auto n1 = cli({"moments", "--ell", "1", "--n", "1"});
    CHECK(n1.code == 0);
    CHECK(n1.out.find("0.455945") != std::string::npos);

    CHECK(cli({"moments", "--ell", "0", "--n", "2"}).code == 2);
    CHECK(cli({"moments", "--ell", "1"}).code == 2);
    CHECK(cli({"moments", "--ell", "1", "--n", "2", "--bogus"}).code == 2);
    CHECK(cli({"moments", "--ell", "1", "--n", "2", "--regime", "sideways"}).code == 2);
    CHECK(cli({}).code == 2);

    const auto with_regime = cli({"moments", "--ell", "8", "--n", "512", "--regime", "ell_slower"});
    CHECK(with_regime.code == 0);
    CHECK(with_regime.out.find("asymptotic") != std::string::npos);
}

TEST_CASE("moments config file and precedence") {
    const auto path = write_temp("moments.json", R"({"ell": 1, "n": 1})");
    const auto from_file = cli({"moments", "--config", path});
    CHECK(from_file.code == 0);
    CHECK(from_file.out.find("0.455945") != std::string::npos);
    const auto override = cli({"moments", "--config", path, "--n", "2"});
    CHECK(override.out.find("0.279692") != std::string::npos);
    const auto typo = write_temp("moments_typo.json", R"({"ell": 1, "nn": 1})");
    CHECK(cli({"moments", "--config", typo}).code == 2);
    CHECK(cli({"moments", "--config", "/nonexistent/m.json"}).code == 1);

    const auto csv = std::string("cli_test_moments.csv");
    CHECK(cli({"moments", "--ell", "2", "--n", "4", "--csv", csv}).code == 0);
    CHECK(slurp(csv).find("mean") != std::string::npos);
    std::remove(path.c_str());
    std::remove(typo.c_str());
    std::remove(csv.c_str());
}

TEST_CASE("simulate golden row") {
    const auto path = write_temp("single.json", kSingleSpec);
    const auto r = cli({"simulate", "--spec-file", path});
    CHECK(r.code == 0);
    const std::uint64_t id = splitmix(splitmix(splitmix(7) ^ 0) ^ (3 * 0xd1b54a32d192ed03ULL));
    CHECK(r.out == "rep,v,stream_id\n0,0.16001779621583456," + std::to_string(id) + "\n");

    const auto again = cli({"simulate", "--spec-file", path, "--threads", "3"});
    CHECK(again.out == r.out);
    std::remove(path.c_str());
}

TEST_CASE("simulate moments and errors") {
    const auto path = write_temp("many.json", kSingleSpec);
    const auto r = cli({"simulate", "--spec-file", path, "--reps", "10000", "--seed", "99"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    double s = 0.0, s2 = 0.0;
    int count = 0;
    while (std::getline(in, line)) {
        const auto a = line.find(','), b = line.rfind(',');
        const double v = std::stod(line.substr(a + 1, b - a - 1));
        s += v;
        s2 += v * v;
        ++count;
    }
    CHECK(count == 10000);
    const double mean = s / count, se = std::sqrt((s2 / count - mean * mean) / count);
    CHECK(std::abs(mean - exact_mean_vnl(3, 1.0, 32)) <= 4.0 * se);

    CHECK(cli({"simulate", "--spec-file", "/nonexistent/spec.json"}).code == 1);
    CHECK(cli({"simulate", "--spec-file", path, "--out", "/nonexistent-dir/out.csv"}).code == 1);
    CHECK(cli({"simulate", "--spec-file", path, "--threads", "0"}).code == 2);
    const auto bad = write_temp("bad.json", R"({"target":{"kind":"single_ell","ell":-3},"n":32})");
    CHECK(cli({"simulate", "--spec-file", bad}).code == 2);
    const auto broken = write_temp("broken.json", "{ not json");
    CHECK(cli({"simulate", "--spec-file", broken}).code == 2);
    std::remove(path.c_str());
    std::remove(bad.c_str());
    std::remove(broken.c_str());
}

TEST_CASE("simulate fbm columns") {
    const auto path = write_temp("fbm.json", R"({"target":{"kind":"fbm","spectrum":{"kind":"explicit","values":[1,0.5,0.25]},"hurst":0.7},"n":8,"seed":1,"replications":3})");
    const auto r = cli({"simulate", "--spec-file", path});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("rep,v_t,v_s,stream_id\n", 0) == 0);
    std::remove(path.c_str());
}

TEST_CASE("estimate subcommand") {
    auto parse = [](const Run& r) { return nlohmann::json::parse(r.out); };
    const auto h = cli({"estimate", "--mode", "hurst", "--v-t", std::to_string(std::pow(2.0, 1.4)), "--v-s", "1", "--t", "2", "--s", "1"});
    REQUIRE(h.code == 0);
    CHECK(parse(h).at("value").get<double>() == doctest::Approx(0.7).epsilon(1e-6));

    char v[64];
    std::snprintf(v, sizeof v, "%.17g", exact_mean_vnl(5, 2.0, 40));
    const auto cl = cli({"estimate", "--mode", "cl", "--v", v, "--ell", "5", "--n", "40"});
    REQUIRE(cl.code == 0);
    CHECK(parse(cl).at("value").get<double>() == doctest::Approx(2.0).epsilon(1e-12));

    std::snprintf(v, sizeof v, "%.17g", exact_mean_vnl(8, 1.0, 512));
    const auto cl3 = cli({"estimate", "--mode", "cl3", "--v", v, "--ell", "8", "--n", "512"});
    REQUIRE(cl3.code == 0);
    CHECK(parse(cl3).at("bias_exact").get<double>() == doctest::Approx(estimator_bias(3, 8, 512, RegimeTag::slower())));

    const auto classical = cli({"estimate", "--mode", "classical", "--ell", "1", "--coeffs", "1,2,2"});
    REQUIRE(classical.code == 0);
    CHECK(parse(classical).at("value").get<double>() == doctest::Approx(3.0));

    CHECK(cli({"estimate", "--mode", "cl", "--ell", "5", "--n", "40"}).code == 2);
    CHECK(cli({"estimate", "--mode", "cl2", "--v", "1", "--ell", "5", "--n", "40"}).code == 2);
    CHECK(cli({"estimate", "--mode", "classical", "--ell", "2", "--coeffs", "1,2"}).code == 2);
    CHECK(cli({"estimate", "--mode", "median"}).code == 2);
}

TEST_CASE("experiment subcommand") {
    const auto config = write_temp("exp.json", R"({
        "target": {"kind": "single_ell", "ell": 2},
        "seed": 3, "replications": 2000, "route": "harmonic",
        "statistics": ["mean", "var", "k3"],
        "sweep": {"n_values": [8, 16, 32], "coupling": "fixed", "ell": 2, "regime": "fixed_ell"}})");
    const auto a = cli({"experiment", "--config", config, "--output", "cli_test_exp_a", "--threads", "1"});
    REQUIRE(a.code == 0);
    const auto b = cli({"experiment", "--config", config, "--output", "cli_test_exp_b", "--threads", "4"});
    REQUIRE(b.code == 0);
    CHECK(slurp("cli_test_exp_a.csv") == slurp("cli_test_exp_b.csv"));
    CHECK(a.out.find("slope exact_mean_vs_n") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp("cli_test_exp_a.json"));
    CHECK(j.at("cells").size() == 3);

    const auto strict_ok = cli({"experiment", "--config", config, "--output", "cli_test_exp_c", "--strict"});
    CHECK(strict_ok.code == 0);

    const auto perturbed = write_temp("exp_bad.json", R"({
        "target": {"kind": "single_ell", "ell": 2}, "n": 16, "seed": 3, "replications": 5000,
        "statistics": ["mean", "var"], "exact_perturbation": 1.5})");
    CHECK(cli({"experiment", "--config", perturbed, "--output", "cli_test_exp_d", "--strict"}).code == 3);
    CHECK(cli({"experiment", "--config", perturbed, "--output", "cli_test_exp_d"}).code == 0);
    CHECK(cli({"experiment", "--config", perturbed}).code == 2);
    CHECK(cli({"experiment", "--config", perturbed, "--output", "/nonexistent-dir/x"}).code == 1);

    cli_interrupt_flag() = true;
    CHECK(cli({"experiment", "--config", config, "--output", "cli_test_exp_e"}).code == 130);
    cli_interrupt_flag() = false;

    for (const char* p : {"a", "b", "c", "d", "e"})
        for (const char* ext : {".csv", ".json"}) std::remove((std::string("cli_test_exp_") + p + ext).c_str());
    std::remove(config.c_str());
    std::remove(perturbed.c_str());
}

TEST_CASE("bundled regime sweep runs") {
    const std::string config = std::string(SPHEREQV_SOURCE_DIR) + "/configs/regime_sweep.json";
    const auto r = cli({"experiment", "--config", config, "--output", "cli_test_sweep", "--strict"});
    CHECK(r.code == 0);
    CHECK(slurp("cli_test_sweep.csv").find("fourth_moment_bound") != std::string::npos);
    std::remove("cli_test_sweep.csv");
    std::remove("cli_test_sweep.json");
}

TEST_CASE("specfun-check") {
    const auto r = cli({"specfun-check"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("help documents units for every subcommand") {
    const auto top = cli({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("radians") != std::string::npos);
    CHECK(cli({"moments", "--help"}).out.find("dimensionless") != std::string::npos);
    CHECK(cli({"simulate", "--help"}).out.find("unsigned 64-bit") != std::string::npos);
    CHECK(cli({"estimate", "--help"}).out.find("positive real") != std::string::npos);
    CHECK(cli({"experiment", "--help"}).out.find("integer >= 1") != std::string::npos);
    CHECK(cli({"specfun-check", "--help"}).out.find("unsigned 64-bit") != std::string::npos);
}

TEST_CASE("installed tool exits with usage errors") {
    const std::string cmd = std::string("\"") + SPHEREQV_TOOL_PATH + "\" moments --ell 0 --n 2 > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 2);
}
