#include "deltasim/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "deltasim/task.hpp"

namespace deltasim {

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trial_csv_header() {
    return "trial_id,seed,d,alpha0,alpha_c,alpha_r,kappa,c1_holds,v_delta_norm_sq,gamma,"
           "eta,steps,gain_population,gain_sgd,gain_sgd_reversed,improved";
}

namespace {

std::string opt_real(const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
}

} // namespace

std::string trial_csv_row(const TrialResult& t) {
    std::string row;
    row += std::to_string(t.trial_id);
    row += ',';
    row += std::to_string(t.seed);
    row += ',';
    row += std::to_string(t.dim);
    row += ',';
    row += format_real(t.alpha0);
    row += ',';
    row += format_real(t.alpha_c);
    row += ',';
    row += format_real(t.alpha_r);
    row += ',';
    row += format_real(t.kappa);
    row += ',';
    row += t.c1_holds ? '1' : '0';
    row += ',';
    row += format_real(t.v_delta_norm_sq);
    row += ',';
    row += opt_real(t.gamma);
    row += ',';
    row += opt_real(t.eta);
    row += ',';
    row += t.steps ? std::to_string(*t.steps) : std::string();
    row += ',';
    row += opt_real(t.gain_population);
    row += ',';
    row += opt_real(t.gain_sgd);
    row += ',';
    row += opt_real(t.gain_sgd_reversed);
    row += ',';
    row += t.improved ? '1' : '0';
    return row;
}

std::string trials_to_csv(const std::vector<TrialResult>& trials) {
    std::string out = trial_csv_header();
    out += '\n';
    for (const TrialResult& t : trials) {
        out += trial_csv_row(t);
        out += '\n';
    }
    return out;
}

std::string trace_csv(const TrainTrace& trace) {
    std::string out = "step,cosine,norm\n";
    for (const TracePoint& pt : trace.recorded) {
        out += std::to_string(pt.step);
        out += ',';
        out += format_real(pt.cosine);
        out += ',';
        out += format_real(pt.norm);
        out += '\n';
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    for (char ch : text) {
        if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else {
            field += ch;
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json certificate_to_json(const Certificate& cert) {
    ordered_json j;
    j["kappa"] = cert.kappa;
    j["c1_holds"] = cert.c1_holds;
    if (cert.gamma) j["gamma"] = *cert.gamma;
    if (cert.horizon) j["horizon"] = *cert.horizon;
    j["d_star"] = cert.d_star;
    if (cert.eta) j["eta"] = *cert.eta;
    if (cert.steps) j["steps"] = *cert.steps;
    if (cert.deviation_bound) j["deviation_bound"] = *cert.deviation_bound;
    j["delta_prob"] = cert.delta_prob;
    j["v_delta_norm_sq"] = cert.v_delta_norm_sq;
    if (cert.dim_condition_ok) j["dim_condition_ok"] = *cert.dim_condition_ok;
    return j;
}

ordered_json report_to_json(const ExperimentReport& rep) {
    ordered_json j;
    j["name"] = rep.name;
    j["config"] = rep.config;
    j["n_trials"] = rep.n_trials;
    j["n_c1"] = rep.n_c1;
    j["n_improved"] = rep.n_improved;
    j["n_positive"] = rep.n_positive;
    j["fraction"] = rep.fraction;
    j["wilson_ci"] = {rep.wilson.low, rep.wilson.high};
    j["notes"] = rep.notes;
    j["metrics"] = rep.metrics;
    ordered_json asserts = ordered_json::object();
    for (const auto& [name, ok] : rep.assertions) asserts[name] = ok;
    j["assertions"] = asserts;
    j["passed"] = rep.passed;
    return j;
}

ordered_json sweep_to_json(const SweepResult& result) {
    ordered_json cells = ordered_json::array();
    for (const SweepCell& cell : result.cells) {
        ordered_json cj;
        cj["cell_index"] = cell.cell_index;
        cj["skipped"] = cell.skipped;
        if (cell.skipped) {
            cj["skip_reason"] = cell.skip_reason;
            cj["config"] = cell.report.config;
        } else {
            cj["report"] = report_to_json(cell.report);
        }
        cells.push_back(std::move(cj));
    }
    ordered_json j;
    j["cells"] = std::move(cells);
    return j;
}

ordered_json envelope(const std::string& command, const ordered_json& config,
                      const std::string& payload_key, ordered_json payload) {
    ordered_json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["config"] = config;
    j[payload_key] = std::move(payload);
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "d",     "alpha0", "acc0",  "alpha_c", "acc_c",   "alpha_r",      "acc_r",
        "delta", "batch",  "eta",   "steps",   "mode",    "trials",       "seed",
        "workers", "record_every", "n", "percent", "out", "csv", "sampler", "reversed"};
    return keys;
}

void check_keys(const ordered_json& j, const char* where) {
    if (j.is_null()) return;
    if (!j.is_object()) throw UsageError(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known_keys().count(key))
            throw UsageError(std::string("unknown config key in ") + where + ": " + key);
    }
}

void check_role_conflict(const ordered_json& layer, const std::string& role,
                         const char* where) {
    const std::string alpha_key = role == "0" ? "alpha0" : "alpha_" + role;
    const std::string acc_key = role == "0" ? "acc0" : "acc_" + role;
    if (layer.contains(alpha_key) && layer.contains(acc_key))
        throw UsageError("contradictory " + std::string(where) + ": both " + alpha_key +
                         " and " + acc_key + " given");
}

} // namespace

ordered_json merge_config(const ordered_json& file_json, const ordered_json& flag_json) {
    check_keys(file_json, "config file");
    check_keys(flag_json, "flags");
    for (const std::string role : {"0", "c", "r"}) {
        check_role_conflict(file_json, role, "config file keys");
        check_role_conflict(flag_json, role, "flags");
    }

    ordered_json merged = file_json.is_null() ? ordered_json::object() : file_json;
    for (const std::string role : {"0", "c", "r"}) {
        const std::string alpha_key = role == "0" ? "alpha0" : "alpha_" + role;
        const std::string acc_key = role == "0" ? "acc0" : "acc_" + role;
        // a flag of either form replaces both file forms of that role
        if (flag_json.contains(alpha_key) || flag_json.contains(acc_key)) {
            merged.erase(alpha_key);
            merged.erase(acc_key);
        }
    }
    for (const auto& [key, value] : flag_json.items()) merged[key] = value;
    return merged;
}

bool has_alpha(const ordered_json& cfg, const std::string& role) {
    const std::string alpha_key = role == "0" ? "alpha0" : "alpha_" + role;
    const std::string acc_key = role == "0" ? "acc0" : "acc_" + role;
    return cfg.contains(alpha_key) || cfg.contains(acc_key);
}

double resolve_alpha(const ordered_json& cfg, const std::string& role) {
    const std::string alpha_key = role == "0" ? "alpha0" : "alpha_" + role;
    const std::string acc_key = role == "0" ? "acc0" : "acc_" + role;
    if (cfg.contains(alpha_key)) return cfg[alpha_key].get<double>();
    if (cfg.contains(acc_key)) {
        double acc = cfg[acc_key].get<double>();
        if (cfg.value("percent", false)) acc /= 100.0;
        return accuracy_to_alpha(acc);
    }
    throw UsageError("missing required parameter: " + alpha_key + " or " + acc_key);
}

} // namespace deltasim
