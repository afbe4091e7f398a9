// deltasim — delta-learning logistic-regression simulator.
//
// Subcommands: certify, train, sweep, verify {gradient|loss|ray|deviation|remark2|theorem1}.
// Human-readable progress goes to stderr; machine-readable JSON/CSV go to
// stdout or the --out/--csv paths, byte-reproducible from (command, config, seed).
// Exit codes: 0 success (and, for verify, all assertions passed), 1 usage or
// I/O error, 2 verify assertion failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deltasim/experiments.hpp"
#include "deltasim/io.hpp"

using namespace deltasim;

namespace {

struct RawFlags {
    std::optional<std::string> config, d, alpha0, acc0, alpha_c, acc_c, alpha_r, acc_r,
        delta, batch, eta, steps, mode, trials, seed, workers, record_every, n, out, csv,
        sampler;
    bool percent = false;
    bool reversed = false;
};

bool looks_integral(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

ordered_json parse_scalar(const std::string& s) {
    try {
        if (looks_integral(s)) return static_cast<long long>(std::stoll(s));
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw UsageError("not a number: " + s);
        return v;
    } catch (const UsageError&) {
        throw;
    } catch (...) {
        throw UsageError("not a number: " + s);
    }
}

// "64,256" -> [64, 256]; "0.5" -> 0.5
ordered_json parse_number_or_list(const std::string& s) {
    if (s.find(',') == std::string::npos) return parse_scalar(s);
    ordered_json arr = ordered_json::array();
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string item = s.substr(start, comma == std::string::npos
                                                     ? std::string::npos
                                                     : comma - start);
        if (item.empty()) throw UsageError("empty list element in: " + s);
        arr.push_back(parse_scalar(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return arr;
}

ordered_json flags_to_json(const RawFlags& f) {
    ordered_json j = ordered_json::object();
    auto num = [&](const char* key, const std::optional<std::string>& v) {
        if (v) j[key] = parse_number_or_list(*v);
    };
    auto str = [&](const char* key, const std::optional<std::string>& v) {
        if (v) j[key] = *v;
    };
    num("d", f.d);
    num("alpha0", f.alpha0);
    num("acc0", f.acc0);
    num("alpha_c", f.alpha_c);
    num("acc_c", f.acc_c);
    num("alpha_r", f.alpha_r);
    num("acc_r", f.acc_r);
    num("delta", f.delta);
    num("batch", f.batch);
    num("eta", f.eta);
    num("steps", f.steps);
    str("mode", f.mode);
    num("trials", f.trials);
    num("seed", f.seed);
    num("workers", f.workers);
    num("record_every", f.record_every);
    num("n", f.n);
    str("out", f.out);
    str("csv", f.csv);
    str("sampler", f.sampler);
    if (f.percent) j["percent"] = true;
    if (f.reversed) j["reversed"] = true;
    return j;
}

ordered_json load_config_file(const std::optional<std::string>& path) {
    if (!path) return ordered_json::object();
    std::ifstream in(*path);
    if (!in) throw UsageError("cannot read config file: " + *path);
    try {
        return ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw UsageError("invalid JSON in config file " + *path + ": " + e.what());
    }
}

template <typename T>
T get_scalar(const ordered_json& cfg, const char* key, T fallback) {
    if (!cfg.contains(key)) return fallback;
    const ordered_json& v = cfg[key];
    if (v.is_array()) throw UsageError(std::string("list not allowed for ") + key);
    return v.get<T>();
}

std::vector<double> get_list_d(const ordered_json& cfg, const char* key) {
    std::vector<double> out;
    const ordered_json& v = cfg[key];
    if (v.is_array())
        for (const auto& x : v) out.push_back(x.get<double>());
    else
        out.push_back(v.get<double>());
    return out;
}

std::vector<double> resolve_alpha_list(const ordered_json& cfg, const std::string& role) {
    const std::string alpha_key = role == "0" ? "alpha0" : "alpha_" + role;
    const std::string acc_key = role == "0" ? "acc0" : "acc_" + role;
    if (cfg.contains(alpha_key)) return get_list_d(cfg, alpha_key.c_str());
    if (cfg.contains(acc_key)) {
        std::vector<double> accs = get_list_d(cfg, acc_key.c_str());
        const bool percent = cfg.value("percent", false);
        for (double& a : accs) a = accuracy_to_alpha(percent ? a / 100.0 : a);
        return accs;
    }
    throw UsageError("missing required parameter: " + alpha_key + " or " + acc_key);
}

int resolve_workers(const ordered_json& cfg) {
    int workers = static_cast<int>(get_scalar<long long>(cfg, "workers", 1));
    if (const char* env = std::getenv("DELTA_SIM_WORKERS")) {
        try {
            workers = std::stoi(env);
        } catch (...) {
            throw UsageError("DELTA_SIM_WORKERS is not an integer");
        }
    }
    if (workers < 1) throw UsageError("workers must be >= 1");
    return workers;
}

void emit_json(const ordered_json& j, const ordered_json& cfg) {
    const std::string text = j.dump(2) + "\n";
    if (cfg.contains("out"))
        write_text_file(cfg["out"].get<std::string>(), text);
    else
        std::fputs(text.c_str(), stdout);
}

void emit_csv_if_requested(const std::string& csv_text, const ordered_json& cfg) {
    if (!cfg.contains("csv")) return;
    write_text_file(cfg["csv"].get<std::string>(), csv_text);
}

ordered_json scenario_echo(int d, double a0, double ac, double ar, double delta, int batch,
                           std::uint64_t seed) {
    return {{"d", d},         {"alpha0", a0}, {"alpha_c", ac}, {"alpha_r", ar},
            {"delta", delta}, {"batch", batch}, {"seed", seed}};
}

int cmd_certify(const ordered_json& cfg) {
    const int d = static_cast<int>(get_scalar<long long>(cfg, "d", 0));
    if (d < 2) throw UsageError("certify requires --d >= 2");
    const double a0 = resolve_alpha(cfg, "0");
    const double ac = resolve_alpha(cfg, "c");
    const double ar = resolve_alpha(cfg, "r");
    if (!(ac > ar)) throw UsageError("no performance delta: alpha_c <= alpha_r");
    const double delta = get_scalar<double>(cfg, "delta", 0.1);
    const int batch = static_cast<int>(get_scalar<long long>(cfg, "batch", d));
    const auto seed = static_cast<std::uint64_t>(get_scalar<long long>(cfg, "seed", 0));

    const Instance inst = sample_instance(d, a0, ac, ar, seed);
    const Certificate cert = prescribe(inst.theta0, inst.teachers, inst.task, batch, delta);

    ordered_json out = envelope("certify", scenario_echo(d, a0, ac, ar, delta, batch, seed),
                                "certificate", certificate_to_json(cert));
    emit_json(out, cfg);
    return 0;
}

BatchSampler sampler_from(const ordered_json& cfg) {
    const std::string s = get_scalar<std::string>(cfg, "sampler", "auto");
    if (s == "auto") return BatchSampler::auto_select;
    if (s == "direct") return BatchSampler::direct;
    if (s == "aggregate") return BatchSampler::aggregate;
    throw UsageError("sampler must be auto, direct or aggregate");
}

int cmd_train(const ordered_json& cfg) {
    const int d = static_cast<int>(get_scalar<long long>(cfg, "d", 0));
    if (d < 2) throw UsageError("train requires --d >= 2");
    const double a0 = resolve_alpha(cfg, "0");
    const double ac = resolve_alpha(cfg, "c");
    const double ar = resolve_alpha(cfg, "r");
    if (!(ac > ar)) throw UsageError("no performance delta: alpha_c <= alpha_r");
    const double delta = get_scalar<double>(cfg, "delta", 0.1);
    const int batch = static_cast<int>(get_scalar<long long>(cfg, "batch", d));
    const auto seed = static_cast<std::uint64_t>(get_scalar<long long>(cfg, "seed", 0));
    const std::string mode_str = get_scalar<std::string>(cfg, "mode", "sgd");
    if (mode_str != "sgd" && mode_str != "population")
        throw UsageError("mode must be sgd or population");

    const Instance inst = sample_instance(d, a0, ac, ar, seed);
    const Certificate cert = prescribe(inst.theta0, inst.teachers, inst.task, batch, delta);

    TrainConfig tc;
    tc.mode = mode_str == "sgd" ? TrainMode::empirical : TrainMode::population;
    tc.batch = batch;
    tc.sampler = sampler_from(cfg);
    if (cfg.contains("eta"))
        tc.eta = get_scalar<double>(cfg, "eta", 0.0);
    else if (cert.eta)
        tc.eta = *cert.eta;
    else
        throw UsageError("C1 violated (kappa <= 0): no prescribed eta; pass --eta and --steps");
    if (cfg.contains("steps"))
        tc.steps = get_scalar<long long>(cfg, "steps", 0);
    else if (cert.steps)
        tc.steps = *cert.steps;
    else
        throw UsageError("C1 violated (kappa <= 0): no prescribed steps; pass --eta and --steps");
    tc.record_every = get_scalar<long long>(cfg, "record_every", std::max<long long>(1, tc.steps / 100));

    RngStream rng(seed, kStreamSgd);
    ordered_json result;
    int exit_code = 0;
    try {
        const TrainTrace trace = train(inst.theta0, inst.teachers, inst.task, tc, rng);
        emit_csv_if_requested(trace_csv(trace), cfg);
        result = {{"kappa", cert.kappa},
                  {"c1_holds", cert.c1_holds},
                  {"mode", mode_str},
                  {"eta", tc.eta},
                  {"steps", tc.steps},
                  {"batch", batch},
                  {"initial_cosine", trace.recorded.front().cosine},
                  {"final_cosine", trace.recorded.back().cosine},
                  {"final_norm", trace.recorded.back().norm},
                  {"gain", trace.gain},
                  {"diverged", false}};
    } catch (const divergence_error& e) {
        const TrainTrace& partial = e.partial_trace();
        emit_csv_if_requested(trace_csv(partial), cfg);
        result = {{"kappa", cert.kappa},
                  {"c1_holds", cert.c1_holds},
                  {"mode", mode_str},
                  {"eta", tc.eta},
                  {"steps", tc.steps},
                  {"batch", batch},
                  {"diverged", true},
                  {"diverged_at_step", e.step()},
                  {"error", e.what()}};
        std::fprintf(stderr, "error: %s\n", e.what());
        exit_code = 1;
    }

    ordered_json out = envelope("train", scenario_echo(d, a0, ac, ar, delta, batch, seed),
                                "result", std::move(result));
    emit_json(out, cfg);
    return exit_code;
}

int cmd_sweep(const ordered_json& cfg) {
    if (!cfg.contains("d")) throw UsageError("sweep requires d");
    SweepGrid grid;
    for (double v : get_list_d(cfg, "d")) grid.dims.push_back(static_cast<int>(v));
    grid.alpha0s = resolve_alpha_list(cfg, "0");
    grid.alpha_cs = resolve_alpha_list(cfg, "c");
    grid.alpha_rs = resolve_alpha_list(cfg, "r");
    if (cfg.contains("delta")) grid.deltas = get_list_d(cfg, "delta");
    if (cfg.contains("batch")) {
        grid.batches.clear();
        for (double v : get_list_d(cfg, "batch")) grid.batches.push_back(static_cast<int>(v));
    }
    grid.trials = get_scalar<long long>(cfg, "trials", 1);
    grid.run_reversed = cfg.value("reversed", false);
    if (cfg.contains("eta")) grid.eta_override = get_scalar<double>(cfg, "eta", 0.0);
    if (cfg.contains("steps")) grid.steps_override = get_scalar<long long>(cfg, "steps", 0);
    const auto seed = static_cast<std::uint64_t>(get_scalar<long long>(cfg, "seed", 0));
    const int workers = resolve_workers(cfg);

    const SweepResult result = sweep(grid, seed, workers);

    std::string csv = trial_csv_header() + "\n";
    for (const SweepCell& cell : result.cells)
        for (const TrialResult& t : cell.report.trials) csv += trial_csv_row(t) + "\n";
    emit_csv_if_requested(csv, cfg);

    // worker count never appears in serialized output: reruns at any
    // parallelism must stay byte-identical
    ordered_json config_echo = {{"seed", seed}, {"trials", grid.trials}};
    ordered_json out = envelope("sweep", config_echo, "sweep", sweep_to_json(result));
    emit_json(out, cfg);
    return 0;
}

int cmd_verify(const std::string& which, const ordered_json& cfg) {
    const auto seed = static_cast<std::uint64_t>(get_scalar<long long>(cfg, "seed", 0));
    const int workers = resolve_workers(cfg);

    ExperimentReport rep;
    if (which == "gradient") {
        const int d = static_cast<int>(get_scalar<long long>(cfg, "d", 8));
        const long long n = get_scalar<long long>(cfg, "n", 1000000);
        rep = verify_gradient(d, n, seed);
    } else if (which == "loss") {
        const int d = static_cast<int>(get_scalar<long long>(cfg, "d", 32));
        const int n_thetas = static_cast<int>(get_scalar<long long>(cfg, "trials", 20));
        const long long n = get_scalar<long long>(cfg, "n", 100000);
        rep = verify_loss(d, n_thetas, n, seed);
    } else if (which == "ray") {
        const long long n_configs = get_scalar<long long>(cfg, "trials", 1000);
        rep = verify_ray(n_configs, seed);
    } else if (which == "deviation") {
        const int d = static_cast<int>(get_scalar<long long>(cfg, "d", 64));
        const int batch = static_cast<int>(get_scalar<long long>(cfg, "batch", d));
        const double eta = get_scalar<double>(cfg, "eta", 1e-3);
        const long long steps = get_scalar<long long>(cfg, "steps", 1000);
        const double delta = get_scalar<double>(cfg, "delta", 0.1);
        const long long trials = get_scalar<long long>(cfg, "trials", 100);
        rep = verify_deviation(d, batch, eta, steps, delta, trials, seed, workers);
    } else if (which == "remark2") {
        const double delta = get_scalar<double>(cfg, "delta", 0.1);
        const long long trials = get_scalar<long long>(cfg, "trials", 1000);
        const int d = static_cast<int>(get_scalar<long long>(cfg, "d", 2048));
        rep = verify_remark2(delta, trials, d, seed, workers);
    } else if (which == "theorem1") {
        const int d = static_cast<int>(get_scalar<long long>(cfg, "d", 128));
        const int batch = static_cast<int>(get_scalar<long long>(cfg, "batch", d));
        const double delta = get_scalar<double>(cfg, "delta", 0.1);
        // either accuracy or cosine form works; the scenario is reported in
        // accuracies, so alpha inputs convert through the exact inverse
        auto acc_of = [&](const std::string& role, double fallback) {
            return has_alpha(cfg, role) ? alpha_to_accuracy(resolve_alpha(cfg, role))
                                        : fallback;
        };
        const double acc0 = acc_of("0", 0.8);
        const double acc_c = acc_of("c", 0.7);
        const double acc_r = acc_of("r", 0.6);
        const long long trials = get_scalar<long long>(cfg, "trials", 100);
        rep = verify_theorem1(d, batch, delta, acc0, acc_c, acc_r, trials, seed, workers);
    } else {
        throw UsageError("unknown verify target: " + which);
    }

    for (const auto& [name, ok] : rep.assertions)
        std::fprintf(stderr, "[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());

    if (!rep.trials.empty()) emit_csv_if_requested(trials_to_csv(rep.trials), cfg);
    ordered_json out = envelope("verify", rep.config, "report", report_to_json(rep));
    emit_json(out, cfg);
    return rep.passed ? 0 : 2;
}

void add_common_options(CLI::App* sub, RawFlags& f) {
    sub->add_option("--config", f.config, "JSON config file; flags override file values");
    sub->add_option("--d", f.d, "ambient dimension (sweep: comma list)");
    sub->add_option("--alpha0", f.alpha0, "student cosine alignment");
    sub->add_option("--acc0", f.acc0, "student accuracy (converted via cos(pi(1-acc)))");
    sub->add_option("--alpha-c", f.alpha_c, "chosen-teacher cosine");
    sub->add_option("--acc-c", f.acc_c, "chosen-teacher accuracy");
    sub->add_option("--alpha-r", f.alpha_r, "rejected-teacher cosine");
    sub->add_option("--acc-r", f.acc_r, "rejected-teacher accuracy");
    sub->add_option("--delta", f.delta, "failure probability delta (default 0.1)");
    sub->add_option("--batch", f.batch, "batch size B (default d)");
    sub->add_option("--eta", f.eta, "learning rate override");
    sub->add_option("--steps", f.steps, "step count override");
    sub->add_option("--mode", f.mode, "train mode: sgd | population (default sgd)");
    sub->add_option("--trials", f.trials, "number of trials");
    sub->add_option("--seed", f.seed, "master seed (default 0)");
    sub->add_option("--workers", f.workers,
                    "worker threads (default 1; env DELTA_SIM_WORKERS overrides)");
    sub->add_option("--record-every", f.record_every, "trace recording stride");
    sub->add_option("--n", f.n, "sample count for gradient/loss verification");
    sub->add_option("--out", f.out, "write the JSON report here instead of stdout");
    sub->add_option("--csv", f.csv, "write per-trial rows / training trace CSV here");
    sub->add_option("--sampler", f.sampler, "batch sampler: auto | direct | aggregate");
    sub->add_flag("--percent", f.percent, "accuracies are given in percent (e.g. 80)");
    sub->add_flag("--reversed", f.reversed, "also run the reversed-teacher control (sweep)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"delta-learning logistic-regression simulator"};
    app.require_subcommand(1);

    RawFlags flags;
    CLI::App* certify = app.add_subcommand("certify", "closed-form certificate for one instance");
    CLI::App* train_cmd = app.add_subcommand("train", "run one training trajectory");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid of Monte Carlo trials");
    CLI::App* verify_cmd = app.add_subcommand("verify", "named verification experiments");
    std::string verify_which;
    verify_cmd->add_option("which", verify_which, "gradient|loss|ray|deviation|remark2|theorem1")
        ->required()
        ->check(CLI::IsMember({"gradient", "loss", "ray", "deviation", "remark2", "theorem1"}));
    for (CLI::App* sub : {certify, train_cmd, sweep_cmd, verify_cmd})
        add_common_options(sub, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const ordered_json cfg = merge_config(load_config_file(flags.config), flags_to_json(flags));
        if (app.got_subcommand(certify)) return cmd_certify(cfg);
        if (app.got_subcommand(train_cmd)) return cmd_train(cfg);
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(cfg);
        if (app.got_subcommand(verify_cmd)) return cmd_verify(verify_which, cfg);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
