#include "deltasim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace deltasim {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

void add_assertion(ExperimentReport& rep, const std::string& name, bool ok) {
    rep.assertions.emplace_back(name, ok);
    rep.passed = rep.passed && ok;
}

void aggregate_trials(ExperimentReport& rep) {
    rep.n_trials = static_cast<long long>(rep.trials.size());
    rep.n_c1 = 0;
    rep.n_improved = 0;
    rep.n_positive = 0;
    std::string notes;
    for (const TrialResult& t : rep.trials) {
        if (t.c1_holds) ++rep.n_c1;
        if (t.improved) ++rep.n_improved;
        if (t.gain_sgd && *t.gain_sgd > 0.0) ++rep.n_positive;
        if (!t.notes.empty() && notes.size() < 2000)
            notes += "trial " + std::to_string(t.trial_id) + ": " + t.notes + "; ";
    }
    rep.fraction = rep.n_c1 > 0 ? static_cast<double>(rep.n_improved) /
                                      static_cast<double>(rep.n_c1)
                                : 0.0;
    rep.wilson = wilson_ci(rep.n_improved, rep.n_c1);
    rep.notes += notes;
}

} // namespace

Instance sample_instance(int dim, double alpha0, double alpha_c, double alpha_r,
                         std::uint64_t seed) {
    if (dim < 2) throw std::invalid_argument("dimension must be >= 2");
    Instance inst;
    RngStream star_stream(seed, kStreamThetaStar);
    inst.task.theta_star = sample_unit_sphere(dim, star_stream);
    RngStream student_stream(seed, kStreamTheta0);
    inst.theta0 = sample_at_cosine(inst.task.theta_star, alpha0, student_stream);
    RngStream teacher_stream(seed, kStreamTeachers);
    inst.teachers = sample_teacher_pair(inst.task, alpha_c, alpha_r, teacher_stream);
    return inst;
}

TrialResult run_trial(const TrialSpec& spec, long long trial_id) {
    const auto t_start = std::chrono::steady_clock::now();
    const int batch = spec.batch > 0 ? spec.batch : spec.dim;

    TrialResult res;
    res.trial_id = trial_id;
    res.seed = spec.seed;
    res.dim = spec.dim;
    res.alpha0 = spec.alpha0;
    res.alpha_c = spec.alpha_c;
    res.alpha_r = spec.alpha_r;

    const Instance inst =
        sample_instance(spec.dim, spec.alpha0, spec.alpha_c, spec.alpha_r, spec.seed);
    const Certificate cert =
        prescribe(inst.theta0, inst.teachers, inst.task, batch, spec.delta_prob);

    res.kappa = cert.kappa;
    res.c1_holds = cert.c1_holds;
    res.v_delta_norm_sq = cert.v_delta_norm_sq;
    res.gamma = cert.gamma;

    if (cert.c1_holds) {
        const double eta = spec.eta_override ? *spec.eta_override : *cert.eta;
        const long long steps = spec.steps_override ? *spec.steps_override : *cert.steps;
        res.eta = eta;
        res.steps = steps;

        TrainConfig cfg;
        cfg.eta = eta;
        cfg.steps = steps;
        cfg.batch = batch;
        cfg.record_every = 0;
        cfg.sampler = spec.sampler;

        if (spec.run_population) {
            cfg.mode = TrainMode::population;
            RngStream unused(spec.seed, kStreamSgd);
            try {
                res.gain_population =
                    train(inst.theta0, inst.teachers, inst.task, cfg, unused).gain;
            } catch (const divergence_error& e) {
                res.notes += std::string(e.what()) + " (population); ";
            }
        }
        if (spec.run_sgd) {
            cfg.mode = TrainMode::empirical;
            RngStream sgd_stream(spec.seed, kStreamSgd);
            try {
                res.gain_sgd = train(inst.theta0, inst.teachers, inst.task, cfg, sgd_stream).gain;
            } catch (const divergence_error& e) {
                res.notes += std::string(e.what()) + " (sgd); ";
            }
        }
        if (spec.run_reversed) {
            // Swapped teachers have kappa_rev = -kappa, so no prescription of
            // their own; the control reuses the forward eta and T.
            TeacherPair swapped{inst.teachers.theta_r, inst.teachers.theta_c,
                                inst.teachers.alpha_r, inst.teachers.alpha_c};
            cfg.mode = TrainMode::empirical;
            RngStream rev_stream(spec.seed, kStreamSgdReversed);
            try {
                res.gain_sgd_reversed =
                    train(inst.theta0, swapped, inst.task, cfg, rev_stream).gain;
            } catch (const divergence_error& e) {
                res.notes += std::string(e.what()) + " (reversed); ";
            }
        }
    }

    res.improved = res.c1_holds && res.gain_sgd && res.gamma &&
                   *res.gain_sgd >= 0.5 * *res.gamma;
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

WilsonInterval wilson_ci(long long successes, long long trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054; // Phi^{-1}(0.975)
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void parallel_for(long long n, int workers, const std::function<void(long long)>& body) {
    if (workers < 1) workers = 1;
    const int used = static_cast<int>(std::min<long long>(workers, n));
    if (used <= 1) {
        for (long long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const long long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(used));
    for (int w = 0; w < used; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

SweepResult sweep(const SweepGrid& grid, std::uint64_t master_seed, int workers) {
    if (grid.dims.empty() || grid.alpha0s.empty() || grid.alpha_cs.empty() ||
        grid.alpha_rs.empty() || grid.deltas.empty() || grid.batches.empty() ||
        grid.trials < 1)
        throw std::invalid_argument("sweep grid must be nonempty with trials >= 1");

    SweepResult result;
    long long cell_index = 0;
    for (int d : grid.dims)
        for (double a0 : grid.alpha0s)
            for (double ac : grid.alpha_cs)
                for (double ar : grid.alpha_rs)
                    for (double delta : grid.deltas)
                        for (int b : grid.batches) {
                            SweepCell cell;
                            cell.cell_index = cell_index++;
                            cell.base = TrialSpec{d,
                                                  a0,
                                                  ac,
                                                  ar,
                                                  delta,
                                                  b,
                                                  grid.run_population,
                                                  grid.run_sgd,
                                                  grid.run_reversed,
                                                  grid.eta_override,
                                                  grid.steps_override,
                                                  BatchSampler::auto_select,
                                                  0};
                            if (!(ac > ar)) {
                                cell.skipped = true;
                                cell.skip_reason = "no performance delta: alpha_c <= alpha_r";
                            }
                            cell.report.name = "sweep/cell" + std::to_string(cell.cell_index);
                            cell.report.config = {
                                {"d", d},     {"alpha0", a0},   {"alpha_c", ac},
                                {"alpha_r", ar}, {"delta", delta}, {"batch", b},
                                {"trials", grid.trials}};
                            result.cells.push_back(std::move(cell));
                        }

    struct Item {
        std::size_t cell;
        long long trial;
    };
    std::vector<Item> items;
    for (std::size_t ci = 0; ci < result.cells.size(); ++ci) {
        if (result.cells[ci].skipped) {
            result.cells[ci].report.notes = result.cells[ci].skip_reason;
            continue;
        }
        result.cells[ci].report.trials.resize(static_cast<std::size_t>(grid.trials));
        for (long long t = 0; t < grid.trials; ++t)
            items.push_back({ci, t});
    }

    parallel_for(static_cast<long long>(items.size()), workers, [&](long long k) {
        const Item item = items[static_cast<std::size_t>(k)];
        SweepCell& cell = result.cells[item.cell];
        TrialSpec spec = cell.base;
        spec.seed = derive_seed(master_seed, static_cast<std::uint64_t>(cell.cell_index),
                                static_cast<std::uint64_t>(item.trial));
        cell.report.trials[static_cast<std::size_t>(item.trial)] = run_trial(spec, item.trial);
    });

    for (SweepCell& cell : result.cells)
        if (!cell.skipped) aggregate_trials(cell.report);
    return result;
}

ExperimentReport verify_gradient(int dim, long long n_samples, std::uint64_t seed) {
    if (dim < 2 || n_samples < 1)
        throw std::invalid_argument("verify_gradient requires dim >= 2, n_samples >= 1");

    ExperimentReport rep;
    rep.name = "gradient";
    rep.config = {{"d", dim}, {"n_samples", n_samples}, {"seed", seed}};

    TeacherPair teachers;
    teachers.theta_c.assign(static_cast<std::size_t>(dim), 0.0);
    teachers.theta_r.assign(static_cast<std::size_t>(dim), 0.0);
    teachers.theta_c[0] = 1.0; // e1
    teachers.theta_r[1] = 1.0; // e2
    teachers.alpha_c = 1.0;
    teachers.alpha_r = 0.0;

    const DenseVector theta(static_cast<std::size_t>(dim), 0.0);
    DenseVector mean(static_cast<std::size_t>(dim), 0.0);
    DenseVector m2(static_cast<std::size_t>(dim), 0.0);

    RngStream rng(seed, 0);
    for (long long i = 0; i < n_samples; ++i) {
        const PreferenceExample ex = deltasim::make_pair(teachers, sample_gaussian(dim, rng));
        const DenseVector g = pref_grad(theta, ex);
        for (int k = 0; k < dim; ++k) {
            mean[k] += g[k];
            m2[k] += g[k] * g[k];
        }
    }
    const double n = static_cast<double>(n_samples);
    DenseVector target = population_direction(teachers);
    for (double& x : target) x *= -kInvSqrt2Pi;

    double err_sq = 0.0;
    ordered_json zscores = ordered_json::array();
    for (int k = 0; k < dim; ++k) {
        mean[k] /= n;
        const double var = std::max(0.0, m2[k] / n - mean[k] * mean[k]);
        const double se = std::sqrt(var / n);
        const double diff = mean[k] - target[k];
        err_sq += diff * diff;
        zscores.push_back(se > 0.0 ? diff / se : 0.0);
    }
    const double err = std::sqrt(err_sq);

    rep.metrics = {{"error_norm", err},
                   {"tolerance", 0.01},
                   {"target_scale", kInvSqrt2Pi},
                   {"z_scores", zscores}};
    add_assertion(rep, "gradient_error_norm<=0.01", err <= 0.01);
    return rep;
}

ExperimentReport verify_loss(int dim, int n_thetas, long long n_samples, std::uint64_t seed) {
    ExperimentReport rep;
    rep.name = "loss";
    rep.config = {{"d", dim}, {"n_thetas", n_thetas}, {"n_samples", n_samples}, {"seed", seed}};

    RngStream star_stream(seed, 0);
    Task task{sample_unit_sphere(dim, star_stream)};

    double max_err = 0.0;
    ordered_json rows = ordered_json::array();
    for (int k = 0; k < n_thetas; ++k) {
        RngStream gen(seed, 10 + static_cast<std::uint64_t>(k));
        const double alpha = gen.uniform(-0.99, 0.99);
        const DenseVector theta = sample_at_cosine(task.theta_star, alpha, gen);
        const double exact = zo_loss_exact(theta, task);
        RngStream mc_stream(seed, 1000 + static_cast<std::uint64_t>(k));
        const double mc = zo_loss_mc(theta, task, n_samples, mc_stream);
        const double err = std::abs(mc - exact);
        max_err = std::max(max_err, err);
        rows.push_back({{"alpha", alpha}, {"exact", exact}, {"mc", mc}, {"abs_err", err}});
    }

    rep.metrics = {{"max_abs_err", max_err}, {"tolerance", 0.012}, {"per_theta", rows}};
    add_assertion(rep, "loss_max_abs_err<=0.012", max_err <= 0.012);
    return rep;
}

ExperimentReport verify_ray(long long n_configs, std::uint64_t seed) {
    ExperimentReport rep;
    rep.name = "ray";
    rep.config = {{"n_configs", n_configs}, {"seed", seed}};

    RngStream rng(seed, 0);
    const int dims[] = {3, 8, 32};

    double max_identity_gap = 0.0;
    double max_fd_rel_err = 0.0;
    double max_second_excess = -1.0;
    long long resampled = 0;

    for (long long i = 0; i < n_configs; ++i) {
        const int d = dims[i % 3];
        Task task{sample_unit_sphere(d, rng)};
        double kap, scale;
        DenseVector theta0, v;
        for (;;) {
            const double ac = rng.uniform(-0.85, 0.95);
            const double lo = std::max(-0.95, ac - 0.8);
            const double ar = rng.uniform(lo, ac - 0.05);
            const double a0 = rng.uniform(-0.95, 0.95);
            scale = rng.uniform(0.5, 2.0);
            const TeacherPair teachers = sample_teacher_pair(task, ac, ar, rng);
            theta0 = scaled(sample_at_cosine(task.theta_star, a0, rng), scale);
            v = population_direction(teachers);
            kap = kappa(theta0, teachers, task);
            // |f'(0)| * |theta0| / |v| = |kappa| / |v|; keep it away from zero
            // so the relative finite-difference comparison stays meaningful.
            if (std::abs(kap) / norm(v) >= 1e-3) break;
            ++resampled;
        }

        const double n0 = norm(theta0);
        const double nv = norm(v);
        const double fp = f_prime_zero(theta0, v, task);
        max_identity_gap = std::max(max_identity_gap, std::abs(fp - kap / n0));

        const double h = 1e-6 * n0 / nv;
        const double fd =
            (f_along_ray(theta0, v, task, h) - f_along_ray(theta0, v, task, -h)) / (2.0 * h);
        max_fd_rel_err = std::max(max_fd_rel_err, std::abs(fd - fp) / std::abs(fp));

        const double lambda_max = 0.5 * n0 / nv;
        const double h2 = 1e-5 * n0 / nv;
        const double bound = f_second_bound_interval(theta0, v, -h2, lambda_max + h2);
        for (int j = 0; j < 50; ++j) {
            const double lam = lambda_max * static_cast<double>(j) / 49.0;
            const double sd = (f_along_ray(theta0, v, task, lam + h2) -
                               2.0 * f_along_ray(theta0, v, task, lam) +
                               f_along_ray(theta0, v, task, lam - h2)) /
                              (h2 * h2);
            max_second_excess = std::max(max_second_excess, std::abs(sd) - bound);
        }
    }

    rep.n_trials = n_configs;
    rep.metrics = {{"max_identity_gap", max_identity_gap},
                   {"max_fd_rel_err", max_fd_rel_err},
                   {"max_second_diff_excess", max_second_excess},
                   {"resampled_configs", resampled}};
    add_assertion(rep, "fprime_matches_kappa<=1e-10", max_identity_gap <= 1e-10);
    add_assertion(rep, "fprime_fd_rel_err<=1e-5", max_fd_rel_err <= 1e-5);
    add_assertion(rep, "second_diff_within_bound+1e-4", max_second_excess <= 1e-4);
    return rep;
}

ExperimentReport verify_population_gain(int dim, long long n_instances, std::uint64_t seed) {
    ExperimentReport rep;
    rep.name = "population_gain";
    rep.config = {{"d", dim}, {"n_instances", n_instances}, {"seed", seed}};

    double min_margin = std::numeric_limits<double>::infinity();
    double min_norm_ratio = std::numeric_limits<double>::infinity();
    long long achieved = 0;

    for (long long i = 0; i < n_instances; ++i) {
        RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(i)), 0);
        Task task{sample_unit_sphere(dim, rng)};
        DenseVector theta0;
        TeacherPair teachers;
        double kap = 0.0;
        do {
            const double acc0 = rng.uniform(0.55, 0.95);
            const double acc_c = rng.uniform(0.55, 0.90);
            const double acc_r = std::max(0.50, acc_c - rng.uniform(0.05, 0.25));
            if (!(acc_c > acc_r)) continue;
            teachers = sample_teacher_pair(task, accuracy_to_alpha(acc_c),
                                           accuracy_to_alpha(acc_r), rng);
            theta0 = sample_at_cosine(task.theta_star, accuracy_to_alpha(acc0), rng);
            kap = kappa(theta0, teachers, task);
            // keep kappa away from numerical zero: gamma scales like kappa^2
            // and the gain >= gamma check must sit far above rounding noise
        } while (!(kap > 1e-3));

        const DenseVector v = population_direction(teachers);
        const auto gh = gamma_and_horizon(kap, norm(theta0), norm_sq(v));

        TrainConfig cfg;
        cfg.mode = TrainMode::population;
        cfg.steps = 8;
        cfg.eta = gh.horizon / 8.0; // power-of-two split: eta * steps == H* exactly
        cfg.record_every = 1;
        RngStream unused(seed, 1);
        const TrainTrace trace = train(theta0, teachers, task, cfg, unused);

        min_margin = std::min(min_margin, trace.gain - gh.gamma);
        if (trace.gain >= gh.gamma) ++achieved;
        for (const TracePoint& pt : trace.recorded)
            min_norm_ratio = std::min(min_norm_ratio, pt.norm / norm(theta0));
    }

    rep.n_trials = n_instances;
    rep.metrics = {{"achieved", achieved},
                   {"min_gain_minus_gamma", min_margin},
                   {"min_norm_ratio", min_norm_ratio}};
    add_assertion(rep, "population_gain>=gamma_all", achieved == n_instances);
    add_assertion(rep, "norm_floor>=0.5", min_norm_ratio >= 0.5 - 1e-9);
    return rep;
}

ExperimentReport verify_remark2(double delta_prob, long long trials, int dim,
                                std::uint64_t seed, int workers) {
    ExperimentReport rep;
    rep.name = "remark2";
    rep.config = {{"delta", delta_prob}, {"trials", trials}, {"d", dim}, {"seed", seed},
                  {"acc0", 0.8},          {"acc_c", 0.7},     {"acc_r", 0.6}};

    const double a0 = accuracy_to_alpha(0.8);
    const double ac = accuracy_to_alpha(0.7);
    const double ar = accuracy_to_alpha(0.6);
    const double ds = d_star(a0, ac, ar, 1.0, delta_prob);

    rep.trials.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, workers, [&](long long t) {
        TrialSpec spec;
        spec.dim = dim;
        spec.alpha0 = a0;
        spec.alpha_c = ac;
        spec.alpha_r = ar;
        spec.delta_prob = delta_prob;
        spec.run_population = false;
        spec.run_sgd = false;
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        rep.trials[static_cast<std::size_t>(t)] = run_trial(spec, t);
    });
    aggregate_trials(rep);

    const double fraction_c1 =
        static_cast<double>(rep.n_c1) / static_cast<double>(rep.n_trials);
    const WilsonInterval ci = wilson_ci(rep.n_c1, rep.n_trials);
    rep.metrics = {{"d_star", ds},
                   {"d_star_expected", 1613.7},
                   {"d_star_tolerance", 0.5},
                   {"fraction_c1", fraction_c1},
                   {"wilson_c1", {ci.low, ci.high}}};
    // the >= 0.90 guarantee only exists above the d* threshold; below it the
    // fraction is reported without an assertion
    if (static_cast<double>(dim) > ds)
        add_assertion(rep, "fraction_c1>=0.90", fraction_c1 >= 0.90);
    else
        rep.notes += "d <= d_star: fraction reported without assertion; ";
    add_assertion(rep, "d_star=1613.7+-0.5", std::abs(ds - 1613.7) <= 0.5);
    return rep;
}

ExperimentReport verify_deviation(int dim, int batch, double eta, long long steps,
                                  double delta_prob, long long trials, std::uint64_t seed,
                                  int workers) {
    ExperimentReport rep;
    rep.name = "deviation";
    rep.config = {{"d", dim},     {"batch", batch},   {"eta", eta},  {"steps", steps},
                  {"delta", delta_prob}, {"trials", trials}, {"seed", seed}};

    const double bound = deviation_bound(eta, dim, steps, batch, delta_prob);
    const double a0 = accuracy_to_alpha(0.8);
    const double ac = accuracy_to_alpha(0.7);
    const double ar = accuracy_to_alpha(0.6);

    std::vector<double> deviations(static_cast<std::size_t>(trials), 0.0);
    parallel_for(trials, workers, [&](long long t) {
        const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        const Instance inst = sample_instance(dim, a0, ac, ar, trial_seed);

        TrainConfig cfg;
        cfg.eta = eta;
        cfg.steps = steps;
        cfg.batch = batch;
        cfg.record_every = 0;
        cfg.sampler = BatchSampler::direct;

        cfg.mode = TrainMode::empirical;
        RngStream sgd_stream(trial_seed, kStreamSgd);
        const TrainTrace sgd = train(inst.theta0, inst.teachers, inst.task, cfg, sgd_stream);

        cfg.mode = TrainMode::population;
        RngStream unused(trial_seed, kStreamSgdReversed);
        const TrainTrace pop = train(inst.theta0, inst.teachers, inst.task, cfg, unused);

        deviations[static_cast<std::size_t>(t)] = deviation(sgd, pop);
    });

    long long within = 0;
    double max_dev = 0.0, sum_dev = 0.0;
    for (double dv : deviations) {
        if (dv <= bound) ++within;
        max_dev = std::max(max_dev, dv);
        sum_dev += dv;
    }
    const double fraction_within =
        static_cast<double>(within) / static_cast<double>(trials);

    rep.n_trials = trials;
    rep.metrics = {{"bound", bound},
                   {"fraction_within", fraction_within},
                   {"mean_deviation", sum_dev / static_cast<double>(trials)},
                   {"max_deviation", max_dev}};
    add_assertion(rep, "fraction_within_bound>=0.90", fraction_within >= 0.90);
    return rep;
}

ExperimentReport verify_theorem1(int dim, int batch, double delta_prob, double acc0,
                                 double acc_c, double acc_r, long long trials,
                                 std::uint64_t seed, int workers) {
    ExperimentReport rep;
    rep.name = "theorem1";
    rep.config = {{"d", dim},     {"batch", batch}, {"delta", delta_prob}, {"acc0", acc0},
                  {"acc_c", acc_c}, {"acc_r", acc_r}, {"trials", trials},    {"seed", seed}};

    const double a0 = accuracy_to_alpha(acc0);
    const double ac = accuracy_to_alpha(acc_c);
    const double ar = accuracy_to_alpha(acc_r);

    rep.trials.resize(static_cast<std::size_t>(trials));
    std::atomic<long long> done{0};
    parallel_for(trials, workers, [&](long long t) {
        TrialSpec spec;
        spec.dim = dim;
        spec.alpha0 = a0;
        spec.alpha_c = ac;
        spec.alpha_r = ar;
        spec.delta_prob = delta_prob;
        spec.batch = batch;
        spec.run_population = true;
        spec.run_sgd = true;
        spec.run_reversed = true;
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        rep.trials[static_cast<std::size_t>(t)] = run_trial(spec, t);
        const long long k = done.fetch_add(1) + 1;
        if (k % 10 == 0)
            std::fprintf(stderr, "  theorem1: %lld/%lld trials\n", k, trials);
    });
    aggregate_trials(rep);

    double mean_gain = 0.0;
    std::vector<double> reversed_gains;
    long long n_gain = 0;
    long long sum_steps = 0;
    for (const TrialResult& t : rep.trials) {
        if (!t.c1_holds) continue;
        if (t.gain_sgd) {
            mean_gain += *t.gain_sgd;
            ++n_gain;
        }
        if (t.gain_sgd_reversed) reversed_gains.push_back(*t.gain_sgd_reversed);
        if (t.steps) sum_steps += *t.steps;
    }
    if (n_gain > 0) mean_gain /= static_cast<double>(n_gain);
    const double median_reversed = median_of(reversed_gains);

    rep.metrics = {{"fraction_improved", rep.fraction},
                   {"wilson", {rep.wilson.low, rep.wilson.high}},
                   {"mean_gain_sgd", mean_gain},
                   {"median_gain_sgd_reversed", median_reversed},
                   {"n_positive", rep.n_positive},
                   {"sum_prescribed_steps", sum_steps}};
    add_assertion(rep, "n_c1>0", rep.n_c1 > 0);
    add_assertion(rep, "fraction_gain>=gamma/2>=0.90", rep.fraction >= 0.90);
    add_assertion(rep, "mean_gain_sgd>0", mean_gain > 0.0);
    add_assertion(rep, "median_reversed_gain<0", median_reversed < 0.0);
    return rep;
}

} // namespace deltasim
