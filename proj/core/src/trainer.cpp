#include "deltasim/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "fastmath.hpp"

namespace deltasim {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

// Above this many example draws per run, auto_select switches to the
// aggregate sampler.
constexpr long long kAggregateThreshold = 1LL << 23;

double log_sigmoid(double z) {
    return z < 0.0 ? z - std::log1p(std::exp(z)) : -std::log1p(std::exp(-z));
}

double log_prob(int y, double z) { return y == 1 ? log_sigmoid(z) : log_sigmoid(-z); }

struct RecordPlan {
    long long next(long long current, long long total, long long every) const {
        if (every <= 0) return total;
        const long long k = (current / every + 1) * every;
        return k < total ? k : total;
    }
};

void record_point(TrainTrace& trace, long long step, const DenseVector& theta,
                  const Task& task) {
    trace.recorded.push_back({step, cosine(theta, task.theta_star), norm(theta)});
}

void validate(const DenseVector& theta0, const TeacherPair& teachers, const Task& task,
              const TrainConfig& cfg) {
    if (theta0.size() != task.theta_star.size() ||
        teachers.theta_c.size() != theta0.size() || teachers.theta_r.size() != theta0.size())
        throw dimension_error("dimension mismatch between student, teachers and task");
    if (norm_sq(theta0) == 0.0)
        throw std::invalid_argument("degenerate direction: zero initial student");
    if (!(cfg.eta >= 0.0) || !std::isfinite(cfg.eta))
        throw std::invalid_argument("learning rate must be finite and >= 0");
    if (cfg.steps < 1) throw std::invalid_argument("step count must be >= 1");
    if (cfg.mode == TrainMode::empirical && cfg.batch < 1)
        throw std::invalid_argument("batch size must be >= 1");
}

// In-plane geometry of the two-teacher disagreement region. The teacher
// span is an orthonormal basis (b1, b2) with b1 = theta_c direction; the
// folded disagreement wedge is the angular interval [-pi/2, psi - pi/2).
struct DisagreementPlane {
    DenseVector b1, b2;
    double psi = 0.0;    // angle between the teachers
    double p_dis = 0.0;  // disagreement probability psi / pi

    DisagreementPlane(const TeacherPair& teachers) {
        b1 = normalized(teachers.theta_c);
        const DenseVector tr = normalized(teachers.theta_r);
        const double c = std::clamp(dot(b1, tr), -1.0, 1.0);
        psi = std::acos(c);
        p_dis = psi / M_PI;
        DenseVector resid(tr);
        axpy(-c, b1, resid);
        const double rn = norm(resid);
        if (rn >= 1e-12) {
            b2 = scaled(resid, 1.0 / rn);
        } else {
            // Teachers (anti-)parallel: complete the basis with the axis
            // least aligned with b1. Any completion gives the same law.
            std::size_t k = 0;
            for (std::size_t i = 1; i < b1.size(); ++i)
                if (std::abs(b1[i]) < std::abs(b1[k])) k = i;
            DenseVector e(b1.size(), 0.0);
            e[k] = 1.0;
            axpy(-b1[k], b1, e);
            b2 = normalized(e);
        }
    }

    // Adds sum over n_examples iid terms of s_i * x_i (s_i = y_c - y_r) into
    // accum, scaled by `scale`. Exact in distribution; see BatchSampler docs.
    void accumulate(long long n_examples, double scale, DenseVector& accum,
                    DenseVector& scratch, RngStream& rng) const {
        const long long m = rng.next_binomial(n_examples, p_dis);
        if (m == 0) return;

        constexpr int kBlock = 2048;
        thread_local std::vector<double> u1(kBlock), u2(kBlock), o1(kBlock), o2(kBlock);
        double s1 = 0.0, s2 = 0.0;
        long long left = m;
        while (left > 0) {
            const int n = static_cast<int>(std::min<long long>(left, kBlock));
            for (int j = 0; j < n; ++j) u1[j] = rng.next_double();
            for (int j = 0; j < n; ++j) u2[j] = rng.next_double();
            wedge_block(u1.data(), u2.data(), o1.data(), o2.data(), n);
            for (int j = 0; j < n; ++j) s1 += o1[j];
            for (int j = 0; j < n; ++j) s2 += o2[j];
            left -= n;
        }

        rng.fill_gaussian(scratch.data(), scratch.size());
        const double w1 = dot(scratch, b1);
        const double w2 = dot(scratch, b2);
        const double root_m = std::sqrt(static_cast<double>(m));
        for (std::size_t i = 0; i < accum.size(); ++i)
            accum[i] += scale * ((s1 - root_m * w1) * b1[i] + (s2 - root_m * w2) * b2[i] +
                                 root_m * scratch[i]);
    }

    // One folded disagreement draw per element: direction uniform on the
    // wedge [-pi/2, psi - pi/2), radius Rayleigh. Pure-arithmetic kernels so
    // the loop vectorizes.
    void wedge_block(const double* u1, const double* u2, double* out1, double* out2,
                     int n) const {
        const double w = psi;
        for (int j = 0; j < n; ++j) {
            const double phi = -M_PI_2 + w * u1[j];
            const double r = std::sqrt(-2.0 * detail::poly_log(1.0 - u2[j]));
            out1[j] = r * detail::poly_cos(phi);
            out2[j] = r * detail::poly_sin(phi);
        }
    }
};

} // namespace

double pref_loss(const DenseVector& theta, const PreferenceExample& ex) {
    if (theta.size() != ex.x.size()) throw dimension_error("dimension mismatch in pref_loss");
    const double z = dot(theta, ex.x);
    return -(log_prob(ex.y_c, z) - log_prob(ex.y_r, z));
}

DenseVector pref_grad(const DenseVector& theta, const PreferenceExample& ex) {
    if (theta.size() != ex.x.size()) throw dimension_error("dimension mismatch in pref_grad");
    return scaled(ex.x, -static_cast<double>(ex.y_c - ex.y_r));
}

DenseVector population_direction(const TeacherPair& teachers) {
    if (teachers.theta_c.size() != teachers.theta_r.size())
        throw dimension_error("dimension mismatch between teachers");
    const DenseVector tc = normalized(teachers.theta_c);
    const DenseVector tr = normalized(teachers.theta_r);
    DenseVector out(tc);
    axpy(-1.0, tr, out);
    return out;
}

TrainTrace train(const DenseVector& theta0, const TeacherPair& teachers, const Task& task,
                 const TrainConfig& cfg, RngStream& rng) {
    validate(theta0, teachers, task, cfg);

    TrainTrace trace;
    trace.initial_theta = theta0;
    trace.eta = cfg.eta;
    trace.steps = cfg.steps;
    trace.batch = cfg.batch;
    trace.mode = cfg.mode;

    DenseVector theta(theta0);
    record_point(trace, 0, theta, task);

    const std::size_t d = theta.size();
    const RecordPlan plan;

    auto finish = [&](DenseVector final_theta) {
        trace.final_theta = std::move(final_theta);
        trace.gain = trace.recorded.back().cosine - trace.recorded.front().cosine;
        return trace;
    };

    if (cfg.mode == TrainMode::population) {
        const DenseVector v = population_direction(teachers);
        for (long long t = 1; t <= cfg.steps; ++t) {
            axpy(cfg.eta, v, theta);
            if (!all_finite(theta)) throw divergence_error(t, trace);
            if (t == cfg.steps || (cfg.record_every > 0 && t % cfg.record_every == 0))
                record_point(trace, t, theta, task);
        }
        return finish(std::move(theta));
    }

    BatchSampler sampler = cfg.sampler;
    if (sampler == BatchSampler::auto_select) {
        const double draws = static_cast<double>(cfg.steps) * static_cast<double>(cfg.batch);
        sampler = draws > static_cast<double>(kAggregateThreshold) ? BatchSampler::aggregate
                                                                   : BatchSampler::direct;
    }

    const double step_scale = cfg.eta * kSqrt2Pi / static_cast<double>(cfg.batch);

    if (sampler == BatchSampler::direct) {
        DenseVector x(d), gsum(d);
        for (long long t = 1; t <= cfg.steps; ++t) {
            std::fill(gsum.begin(), gsum.end(), 0.0);
            for (int i = 0; i < cfg.batch; ++i) {
                rng.fill_gaussian(x.data(), d);
                const int y_c = dot(teachers.theta_c, x) >= 0.0 ? 1 : 0;
                const int y_r = dot(teachers.theta_r, x) >= 0.0 ? 1 : 0;
                const int s = y_c - y_r;
                if (s != 0) axpy(static_cast<double>(s), x, gsum);
            }
            axpy(step_scale, gsum, theta);
            if (!all_finite(theta)) throw divergence_error(t, trace);
            if (t == cfg.steps || (cfg.record_every > 0 && t % cfg.record_every == 0))
                record_point(trace, t, theta, task);
        }
        return finish(std::move(theta));
    }

    // Aggregate sampler: advance from one recorded step to the next in a
    // single exact draw of the summed update. Divergence is therefore
    // detected at chunk boundaries rather than per step.
    const DisagreementPlane plane(teachers);
    DenseVector scratch(d);
    long long t = 0;
    while (t < cfg.steps) {
        const long long target = plan.next(t, cfg.steps, cfg.record_every);
        const long long n_examples = (target - t) * static_cast<long long>(cfg.batch);
        plane.accumulate(n_examples, step_scale, theta, scratch, rng);
        if (!all_finite(theta)) throw divergence_error(target, trace);
        record_point(trace, target, theta, task);
        t = target;
    }
    return finish(std::move(theta));
}

double deviation(const TrainTrace& trace_sgd, const TrainTrace& trace_pop) {
    if (trace_sgd.initial_theta != trace_pop.initial_theta ||
        trace_sgd.eta != trace_pop.eta || trace_sgd.steps != trace_pop.steps)
        throw std::invalid_argument("deviation requires identical theta0, eta and steps");
    DenseVector diff(trace_sgd.final_theta);
    axpy(-1.0, trace_pop.final_theta, diff);
    return norm(diff);
}

} // namespace deltasim
