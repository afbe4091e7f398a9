#include <cstdlib>
#include <doctest.h>

#include "deltasim/io.hpp"

using namespace deltasim;

namespace {

TrialResult sample_result() {
    TrialResult t;
    t.trial_id = 3;
    t.seed = 18446744073709551615ULL;
    t.dim = 128;
    t.alpha0 = 0.8090169943749475;
    t.alpha_c = 0.587785252292473;
    t.alpha_r = 0.30901699437494745;
    t.kappa = 0.09286330082297761;
    t.c1_holds = true;
    t.v_delta_norm_sq = 1.5776760157947765;
    t.gamma = 0.0005775518977462312;
    t.eta = 4.168568330867763e-09;
    t.steps = 3530038;
    t.gain_population = 0.0012345678901234567;
    t.gain_sgd = 0.001234;
    t.improved = true;
    return t;
}

} // namespace

TEST_CASE("format_real round-trips doubles bit-exactly") {
    RngStream rng(60, 0);
    for (int i = 0; i < 2000; ++i) {
        double x;
        switch (i % 4) {
            case 0: x = rng.next_gaussian(); break;
            case 1: x = rng.next_gaussian() * 1e300; break;
            case 2: x = rng.next_gaussian() * 1e-300; break;
            default: x = (rng.next_double() - 0.5) * 2e-3; break;
        }
        const std::string s = format_real(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(format_real(0.0) == "0");
    CHECK(format_real(1.0) == "1");
}

TEST_CASE("trial CSV header and shape") {
    CHECK(trial_csv_header() ==
          "trial_id,seed,d,alpha0,alpha_c,alpha_r,kappa,c1_holds,v_delta_norm_sq,gamma,"
          "eta,steps,gain_population,gain_sgd,gain_sgd_reversed,improved");

    CHECK(trials_to_csv({}) == trial_csv_header() + "\n");

    const std::string one = trials_to_csv({sample_result()});
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);
    CHECK(one.find("\r") == std::string::npos);
}

TEST_CASE("emitted CSV parses back bit-exactly") {
    TrialResult t = sample_result();
    const std::string csv = trials_to_csv({t});
    const auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[1].size() == 16);

    CHECK(std::stoll(rows[1][0]) == t.trial_id);
    CHECK(std::stoull(rows[1][1]) == t.seed);
    CHECK(std::stoi(rows[1][2]) == t.dim);
    CHECK(std::strtod(rows[1][3].c_str(), nullptr) == t.alpha0);
    CHECK(std::strtod(rows[1][6].c_str(), nullptr) == t.kappa);
    CHECK(rows[1][7] == "1");
    CHECK(std::strtod(rows[1][9].c_str(), nullptr) == *t.gamma);
    CHECK(std::strtod(rows[1][10].c_str(), nullptr) == *t.eta);
    CHECK(std::stoll(rows[1][11]) == *t.steps);
    CHECK(std::strtod(rows[1][13].c_str(), nullptr) == *t.gain_sgd);
    CHECK(rows[1][14] == ""); // absent reversed gain stays an empty cell
    CHECK(rows[1][15] == "1");
}

TEST_CASE("trace CSV") {
    TrainTrace trace;
    trace.recorded = {{0, 0.8090169943749475, 1.0}, {10, 0.81, 1.002}};
    const std::string csv = trace_csv(trace);
    const auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"step", "cosine", "norm"});
    CHECK(rows[1][0] == "0");
    CHECK(std::strtod(rows[1][1].c_str(), nullptr) == 0.8090169943749475);
}

TEST_CASE("certificate JSON keys and omission rules") {
    Certificate cert;
    cert.kappa = 0.5;
    cert.c1_holds = true;
    cert.gamma = 0.01;
    cert.horizon = 0.2;
    cert.d_star = 42.0;
    cert.eta = 1e-6;
    cert.steps = 200000;
    cert.deviation_bound = 0.005;
    cert.delta_prob = 0.1;
    cert.v_delta_norm_sq = 1.5;
    cert.dim_condition_ok = true;

    const ordered_json j = certificate_to_json(cert);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        (void)v;
        keys.push_back(k);
    }
    CHECK(keys == std::vector<std::string>{"kappa", "c1_holds", "gamma", "horizon", "d_star",
                                           "eta", "steps", "deviation_bound", "delta_prob",
                                           "v_delta_norm_sq", "dim_condition_ok"});

    Certificate failed;
    failed.kappa = -0.2;
    failed.c1_holds = false;
    failed.d_star = 9.0;
    failed.delta_prob = 0.1;
    failed.v_delta_norm_sq = 0.3;
    const ordered_json jf = certificate_to_json(failed);
    CHECK_FALSE(jf.contains("eta"));
    CHECK_FALSE(jf.contains("steps"));
    CHECK_FALSE(jf.contains("gamma"));
    CHECK_FALSE(jf.contains("horizon"));
    CHECK_FALSE(jf.contains("deviation_bound"));
    CHECK(jf.contains("kappa"));
    CHECK(jf.contains("d_star"));
}

TEST_CASE("merge_config precedence and validation") {
    ordered_json file = {{"d", 64}, {"delta", 0.2}, {"alpha0", 0.5}};
    ordered_json flags = {{"d", 128}};
    const ordered_json merged = merge_config(file, flags);
    CHECK(merged["d"].get<long long>() == 128);
    CHECK(merged["delta"].get<double>() == 0.2);
    CHECK(merged["alpha0"].get<double>() == 0.5);

    CHECK_THROWS_WITH_AS(merge_config({{"bogus_key", 1}}, {}),
                         doctest::Contains("unknown config key"), UsageError);
    CHECK_THROWS_WITH_AS(merge_config({}, {{"alpha0", 0.5}, {"acc0", 0.8}}),
                         doctest::Contains("contradictory"), UsageError);
    CHECK_THROWS_WITH_AS(merge_config({{"alpha_c", 0.5}, {"acc_c", 0.8}}, {}),
                         doctest::Contains("contradictory"), UsageError);

    // a flag of either form masks both file forms of that role
    const ordered_json m2 = merge_config({{"alpha0", 0.5}}, {{"acc0", 0.8}});
    CHECK_FALSE(m2.contains("alpha0"));
    CHECK(resolve_alpha(m2, "0") == doctest::Approx(accuracy_to_alpha(0.8)).epsilon(1e-15));
}

TEST_CASE("resolve_alpha forms and percent convention") {
    CHECK(resolve_alpha({{"alpha_c", 0.25}}, "c") == 0.25);
    CHECK(resolve_alpha({{"acc_c", 0.7}}, "c") ==
          doctest::Approx(accuracy_to_alpha(0.7)).epsilon(1e-15));
    CHECK(resolve_alpha({{"acc_c", 70}, {"percent", true}}, "c") ==
          doctest::Approx(accuracy_to_alpha(0.7)).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(resolve_alpha(ordered_json::object(), "r"),
                         doctest::Contains("missing required"), UsageError);
    CHECK(has_alpha({{"acc_r", 0.6}}, "r"));
    CHECK_FALSE(has_alpha({{"acc_r", 0.6}}, "c"));
}

TEST_CASE("report JSON is stable and self-consistent") {
    ExperimentReport rep;
    rep.name = "demo";
    rep.config = {{"d", 8}, {"seed", 1}};
    rep.n_trials = 10;
    rep.n_c1 = 8;
    rep.n_improved = 8;
    rep.fraction = 1.0;
    rep.wilson = wilson_ci(8, 8);
    rep.assertions = {{"alpha", true}, {"beta", true}};
    const ordered_json j = report_to_json(rep);
    CHECK(j["name"] == "demo");
    CHECK(j["wilson_ci"].size() == 2);
    CHECK(j["assertions"]["alpha"].get<bool>());
    CHECK(j["passed"].get<bool>());
    CHECK(j.dump() == report_to_json(rep).dump());
}

TEST_CASE("write_text_file reports unwritable paths") {
    CHECK_THROWS_AS(write_text_file("/nonexistent-dir/x/y.csv", "data"), std::runtime_error);
}
