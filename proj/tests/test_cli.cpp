// End-to-end checks of the command-line surface. The binary path comes from
// the DELTASIM_CLI environment variable (set by the ctest fixture).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

using nlohmann::ordered_json;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

std::string cli_path() {
    const char* p = std::getenv("DELTASIM_CLI");
    REQUIRE_MESSAGE(p != nullptr, "DELTASIM_CLI must point at the deltasim binary");
    return p;
}

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("certify emits the documented schema") {
    const RunResult r =
        run("certify --d 2048 --acc0 0.8 --acc-c 0.7 --acc-r 0.6 --seed 7");
    CHECK(r.exit_code == 0);
    const ordered_json j = ordered_json::parse(r.out);
    CHECK(j["schema_version"].get<int>() == 1);
    CHECK(j["command"] == "certify");
    const ordered_json& cert = j["certificate"];
    for (const char* key : {"kappa", "c1_holds", "gamma", "horizon", "d_star", "eta",
                            "steps", "deviation_bound", "delta_prob", "v_delta_norm_sq",
                            "dim_condition_ok"})
        CHECK_MESSAGE(cert.contains(key), key);
    CHECK(std::abs(cert["d_star"].get<double>() - 1613.7) <= 0.5);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("certify --d 64 --acc0 0.8 --acc-c 0.6 --acc-r 0.7").exit_code == 1);
    CHECK(run("certify --d 64 --acc0 0.8 --alpha0 0.5 --acc-c 0.7 --acc-r 0.6").exit_code == 1);
    CHECK(run("certify --acc0 0.8 --acc-c 0.7 --acc-r 0.6").exit_code == 1); // missing d
    CHECK(run("verify bogus").exit_code == 1);
    CHECK(run("").exit_code == 1);
}

TEST_CASE("flags override config-file values") {
    const std::string path = "/tmp/deltasim_cli_cfg.json";
    {
        std::ofstream out(path);
        out << R"({"d": 64, "acc0": 0.8, "acc_c": 0.7, "acc_r": 0.6, "seed": 3})";
    }
    const RunResult r = run("certify --config " + path + " --d 128");
    CHECK(r.exit_code == 0);
    const ordered_json j = ordered_json::parse(r.out);
    CHECK(j["config"]["d"].get<int>() == 128);

    {
        std::ofstream out(path);
        out << R"({"d": 64, "unknown_thing": 1})";
    }
    CHECK(run("certify --config " + path + " --acc0 0.8 --acc-c 0.7 --acc-r 0.6").exit_code ==
          1);
}

TEST_CASE("percent accuracies") {
    const RunResult a = run("certify --d 256 --acc0 80 --acc-c 70 --acc-r 60 --percent --seed 5");
    const RunResult b = run("certify --d 256 --acc0 0.8 --acc-c 0.7 --acc-r 0.6 --seed 5");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("train writes a trace CSV and a summary") {
    const std::string csv = "/tmp/deltasim_cli_trace.csv";
    const RunResult r = run("train --d 32 --alpha0 0.2 --alpha-c 0.9 --alpha-r 0.1 "
                            "--eta 0.001 --steps 50 --record-every 10 --seed 2 --csv " +
                            csv);
    CHECK(r.exit_code == 0);
    const ordered_json j = ordered_json::parse(r.out);
    CHECK(j["command"] == "train");
    CHECK(j["result"]["diverged"].get<bool>() == false);
    CHECK(j["result"].contains("gain"));

    const std::string trace = slurp(csv);
    CHECK(trace.rfind("step,cosine,norm\n", 0) == 0);
    CHECK(trace.find("\n50,") != std::string::npos);
}

TEST_CASE("verify exit codes and byte-identical reruns") {
    const std::string args = "verify loss --d 16 --trials 4 --n 20000 --seed 9";
    const RunResult a = run(args);
    const RunResult b = run(args);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    const ordered_json j = ordered_json::parse(a.out);
    CHECK(j["report"]["passed"].get<bool>());
}

TEST_CASE("worker count does not change output; env overrides --workers") {
    const std::string base = "verify deviation --d 16 --batch 16 --steps 100 --trials 10 --seed 4";
    const RunResult w1 = run(base + " --workers 1");
    const RunResult w3 = run(base + " --workers 3");
    CHECK(w1.exit_code == 0);
    CHECK(w1.out == w3.out);

    const RunResult env = run(base + " --workers 1", "DELTA_SIM_WORKERS=2");
    CHECK(env.exit_code == 0);
    CHECK(env.out == w1.out);

    CHECK(run(base, "DELTA_SIM_WORKERS=zero").exit_code == 1);
}

TEST_CASE("failed verify assertions exit with code 2") {
    // 100 samples cannot hit the pinned 0.01 tolerance on the gradient oracle
    const RunResult r = run("verify gradient --n 100 --seed 1");
    CHECK(r.exit_code == 2);
    const ordered_json j = ordered_json::parse(r.out);
    CHECK_FALSE(j["report"]["passed"].get<bool>());
}

TEST_CASE("remark2 below the d* threshold reports without asserting the fraction") {
    const RunResult r = run("verify remark2 --d 64 --trials 60 --seed 1");
    CHECK(r.exit_code == 0); // d* check still applies; fraction is report-only
    const ordered_json j = ordered_json::parse(r.out);
    CHECK_FALSE(j["report"]["assertions"].contains("fraction_c1>=0.90"));
    CHECK(j["report"]["metrics"].contains("fraction_c1"));
    CHECK(j["report"]["notes"].get<std::string>().find("without assertion") !=
          std::string::npos);
}

TEST_CASE("population-mode training through the CLI") {
    const RunResult r = run("train --d 16 --alpha0 0.0 --alpha-c 1.0 --alpha-r -1.0 "
                            "--mode population --eta 0.01 --steps 100 --seed 8");
    CHECK(r.exit_code == 0);
    const ordered_json j = ordered_json::parse(r.out);
    CHECK(j["result"]["mode"] == "population");
    CHECK(j["result"]["gain"].get<double>() > 0.0);
    CHECK(j["result"]["kappa"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sweep emits per-trial CSV with the documented header") {
    const std::string csv = "/tmp/deltasim_cli_sweep.csv";
    const RunResult r = run("sweep --d 8,12 --alpha0 0.3 --alpha-c 0.8 --alpha-r 0.2 "
                            "--trials 3 --eta 0.001 --steps 20 --seed 6 --csv " +
                            csv + " --workers 2");
    CHECK(r.exit_code == 0);
    const std::string text = slurp(csv);
    CHECK(text.rfind("trial_id,seed,d,alpha0,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 3);

    const ordered_json j = ordered_json::parse(r.out);
    CHECK(j["sweep"]["cells"].size() == 2);
}

TEST_CASE("sweep output is byte-identical across worker counts") {
    const std::string base = "sweep --d 8 --alpha0 0.3 --alpha-c 0.8 --alpha-r 0.2 "
                             "--trials 4 --eta 0.001 --steps 20 --seed 21";
    const RunResult w1 = run(base + " --workers 1");
    const RunResult w3 = run(base + " --workers 3");
    CHECK(w1.exit_code == 0);
    CHECK(w1.out == w3.out);
}

TEST_CASE("verify theorem1 accepts alpha-form scenario parameters") {
    // tiny smoke: cosine inputs convert to the accuracy echo exactly
    const RunResult r = run("verify theorem1 --d 16 --alpha0 0.0 --alpha-c 1.0 "
                            "--alpha-r -1.0 --trials 2 --seed 5");
    const ordered_json j = ordered_json::parse(r.out);
    CHECK(j["report"]["config"]["acc0"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(j["report"]["config"]["acc_c"].get<double>() == 1.0);
    CHECK(j["report"]["n_c1"].get<int>() == 2); // kappa = 2 > 0 always here
}
