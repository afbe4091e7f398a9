#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "deltasim/certificates.hpp"
#include "deltasim/trainer.hpp"

namespace deltasim {

using ordered_json = nlohmann::ordered_json;

// Per-trial stream indices; every randomized object in a trial owns one.
enum StreamIndex : std::uint64_t {
    kStreamThetaStar = 0,
    kStreamTheta0 = 1,
    kStreamTeachers = 2,
    kStreamSgd = 3,
    kStreamSgdReversed = 4,
};

struct Instance {
    Task task;
    DenseVector theta0;
    TeacherPair teachers;
};

// Draws theta_star uniformly, the unit student at cosine alpha0, and the
// teacher pair at (alpha_c, alpha_r), each from its own stream of `seed`.
Instance sample_instance(int dim, double alpha0, double alpha_c, double alpha_r,
                         std::uint64_t seed);

struct TrialSpec {
    int dim = 128;
    double alpha0 = 0.0;
    double alpha_c = 0.0;
    double alpha_r = 0.0;
    double delta_prob = 0.1;
    int batch = 0; // 0: defaults to dim
    bool run_population = true;
    bool run_sgd = true;
    bool run_reversed = false;
    std::optional<double> eta_override;
    std::optional<long long> steps_override;
    BatchSampler sampler = BatchSampler::auto_select;
    std::uint64_t seed = 0;
};

struct TrialResult {
    long long trial_id = 0;
    std::uint64_t seed = 0;
    int dim = 0;
    double alpha0 = 0.0, alpha_c = 0.0, alpha_r = 0.0;
    double kappa = 0.0;
    bool c1_holds = false;
    double v_delta_norm_sq = 0.0;
    std::optional<double> gamma;
    std::optional<double> eta;
    std::optional<long long> steps;
    std::optional<double> gain_population;
    std::optional<double> gain_sgd;
    std::optional<double> gain_sgd_reversed;
    bool improved = false; // gain_sgd >= gamma / 2
    double wall_time_s = 0.0; // diagnostics only, never serialized
    std::string notes;
};

// Samples one instance, computes its certificate and (when C1 holds) trains
// in the requested modes with the prescribed or overridden eta/T/B.
// Divergence is recorded in notes; the trial is never dropped.
TrialResult run_trial(const TrialSpec& spec, long long trial_id);

struct WilsonInterval {
    double low = 0.0;
    double high = 0.0;
};

// 95% Wilson score interval for `successes` out of `trials`.
WilsonInterval wilson_ci(long long successes, long long trials);

struct ExperimentReport {
    std::string name;
    ordered_json config = ordered_json::object();
    long long n_trials = 0;
    long long n_c1 = 0;
    long long n_improved = 0; // gain_sgd >= gamma/2
    long long n_positive = 0; // gain_sgd > 0
    double fraction = 0.0;    // n_improved / n_c1 (0 when n_c1 = 0)
    WilsonInterval wilson;
    std::string notes;
    ordered_json metrics = ordered_json::object();
    std::vector<std::pair<std::string, bool>> assertions;
    bool passed = true;
    std::vector<TrialResult> trials;
};

// Runs body(0..n) on `workers` threads. Work items must be independent;
// determinism comes from indexing results, never from scheduling.
void parallel_for(long long n, int workers, const std::function<void(long long)>& body);

struct SweepGrid {
    std::vector<int> dims;
    std::vector<double> alpha0s;
    std::vector<double> alpha_cs;
    std::vector<double> alpha_rs;
    std::vector<double> deltas{0.1};
    std::vector<int> batches{0}; // 0: batch = d
    long long trials = 1;
    bool run_population = true;
    bool run_sgd = true;
    bool run_reversed = false;
    std::optional<double> eta_override;
    std::optional<long long> steps_override;
};

struct SweepCell {
    long long cell_index = 0;
    TrialSpec base;
    bool skipped = false;
    std::string skip_reason;
    ExperimentReport report;
};

struct SweepResult {
    std::vector<SweepCell> cells;
};

// Cross-product of the grid; per-trial stream seeds derive from
// (master_seed, cell_index, trial_index), so output is byte-identical for
// any worker count. Invalid cells (alpha_c <= alpha_r) are skipped with a
// recorded note.
SweepResult sweep(const SweepGrid& grid, std::uint64_t master_seed, int workers);

// Named verification experiments. Parameter defaults are the acceptance
// scenarios; each report carries named assertions and a `passed` flag.

// Monte Carlo mean of pref_grad against -(1/sqrt(2*pi)) v_delta.
ExperimentReport verify_gradient(int dim, long long n_samples, std::uint64_t seed);

// zo_loss_mc against the arccos law over random students.
ExperimentReport verify_loss(int dim, int n_thetas, long long n_samples, std::uint64_t seed);

// f'(0) identities, kappa relation, finite-difference slopes and the f''
// bound over random ray configurations.
ExperimentReport verify_ray(long long n_configs, std::uint64_t seed);

// Population training to horizon H* gains at least Gamma on every kappa > 0
// instance (deterministic Taylor bound).
ExperimentReport verify_population_gain(int dim, long long n_instances, std::uint64_t seed);

// Remark-2 scenario: unit student at 80% accuracy, teachers at 70%/60%,
// fraction of sampled pairs with kappa > 0, plus the d* evaluation.
ExperimentReport verify_remark2(double delta_prob, long long trials, int dim,
                                std::uint64_t seed, int workers);

// SGD vs population final-iterate distance against the certificate bound.
ExperimentReport verify_deviation(int dim, int batch, double eta, long long steps,
                                  double delta_prob, long long trials, std::uint64_t seed,
                                  int workers);

// Theorem-1 end-to-end: prescribed eta/T at the Remark-2 accuracies, SGD
// gain >= Gamma/2 among C1 trials, positive mean gain, and the reversed-
// teacher control (median reversed gain < 0).
ExperimentReport verify_theorem1(int dim, int batch, double delta_prob, double acc0,
                                 double acc_c, double acc_r, long long trials,
                                 std::uint64_t seed, int workers);

} // namespace deltasim
