#pragma once

#include <stdexcept>
#include <vector>

#include "deltasim/task.hpp"

namespace deltasim {

enum class TrainMode { empirical, population };

// How empirical batches are realized.
//
//   direct    — draws every covariate in full, exactly as the update rule is
//               written. Cost per step: batch * d normals.
//   aggregate — samples the sufficient statistic of the summed batch
//               gradient instead. Because the per-example gradient
//               -(y_c - y_r) x does not depend on theta, the iterate over
//               any step range is theta_0 plus an iid sum of example terms,
//               and that sum factors exactly: a Binomial(N, psi/pi) count of
//               teacher disagreements, the in-plane law of a 2-D Gaussian
//               conditioned on the disagreement wedge (with the rejected
//               side folded through the origin), and a single Gaussian
//               carrying the orthogonal components scaled by sqrt(count).
//               Identical in distribution to `direct`, with cost per step
//               proportional to the expected number of disagreements; this
//               is what makes the prescribed step counts (1e6-1e8 at d=128)
//               tractable. Iterates are materialized only at recorded steps.
//   auto_select — aggregate once steps * batch exceeds a fixed threshold.
enum class BatchSampler { direct, aggregate, auto_select };

struct TrainConfig {
    TrainMode mode = TrainMode::empirical;
    double eta = 0.0;          // >= 0, finite
    long long steps = 1;       // T
    int batch = 1;             // B, ignored in population mode
    long long record_every = 0; // 0: record initial and final points only
    BatchSampler sampler = BatchSampler::auto_select;
};

struct TracePoint {
    long long step;
    double cosine;
    double norm;
};

struct TrainTrace {
    std::vector<TracePoint> recorded;
    DenseVector initial_theta;
    DenseVector final_theta;
    double eta = 0.0;
    long long steps = 0;
    int batch = 1;
    TrainMode mode = TrainMode::empirical;
    double gain = 0.0; // final cosine - initial cosine
};

// A step produced non-finite entries; carries the trace up to the failure.
class divergence_error : public std::runtime_error {
public:
    divergence_error(long long step, TrainTrace partial)
        : std::runtime_error("divergence at step " + std::to_string(step)),
          step_(step),
          partial_(std::move(partial)) {}

    long long step() const { return step_; }
    const TrainTrace& partial_trace() const { return partial_; }

private:
    long long step_;
    TrainTrace partial_;
};

// Naive preference loss -(log p(y_c|x) - log p(y_r|x)) under the logistic
// model p(y=1|x) = sigma(<theta, x>), via numerically stable log-sigmoid.
double pref_loss(const DenseVector& theta, const PreferenceExample& ex);

// Closed-form gradient -(y_c - y_r) x; independent of theta.
DenseVector pref_grad(const DenseVector& theta, const PreferenceExample& ex);

// v_delta = theta_c/|theta_c| - theta_r/|theta_r|, the negative population
// gradient up to the 1/sqrt(2*pi) factor (reported separately).
DenseVector population_direction(const TeacherPair& teachers);

// Runs one training trajectory from theta0.
//
// Empirical mode: each step draws B fresh Gaussian covariates, pseudo-labels
// them with both teachers, averages the per-example gradients, scales by
// sqrt(2*pi) and applies theta <- theta - eta * g. With this scaling the
// expected empirical step equals the population step theta <- theta +
// eta * v_delta exactly, so the two modes trace directly comparable paths.
TrainTrace train(const DenseVector& theta0, const TeacherPair& teachers, const Task& task,
                 const TrainConfig& cfg, RngStream& rng);

// |theta_T - theta_bar_T| between final iterates of an SGD trace and a
// population trace; requires identical theta0, eta and step count.
double deviation(const TrainTrace& trace_sgd, const TrainTrace& trace_pop);

} // namespace deltasim
