#pragma once

#include <optional>

#include "deltasim/task.hpp"

namespace deltasim {

// Exact constant of the certified-gain formula gamma = coeff * kappa^2 /
// |v_delta|^2, namely (sqrt(3)/8) * (2/sqrt(3) - 2/3) ~= 0.1056624.
extern const double kGammaCoeff;

// Every closed-form quantity for one (student, teacher-pair) instance.
// When c1_holds is false the prescription fields stay empty.
struct Certificate {
    double kappa = 0.0;
    bool c1_holds = false;
    DenseVector v_delta;
    double v_delta_norm_sq = 0.0;
    std::optional<double> gamma;
    std::optional<double> horizon; // H* = eta * T
    double d_star = 0.0;
    std::optional<double> eta;
    std::optional<long long> steps;
    std::optional<double> deviation_bound;
    double delta_prob = 0.1;
    std::optional<bool> dim_condition_ok; // advisory log-dimension check

    // instance echo
    int dim = 0;
    double alpha0 = 0.0, alpha_c = 0.0, alpha_r = 0.0;
    double theta0_norm = 1.0;
    int batch = 1;
};

// kappa = (alpha_c - alpha_r)(1 - alpha0^2)
//         - alpha0 * <proj_{theta*^perp}(theta0/|theta0|), proj_{theta*^perp}(v_delta)>.
// Training improves the student iff kappa > 0 (condition C1).
double kappa(const DenseVector& theta0, const TeacherPair& teachers, const Task& task);

// f(lambda) = cos(theta0 + lambda * v_delta, theta_star).
double f_along_ray(const DenseVector& theta0, const DenseVector& v_delta, const Task& task,
                   double lambda);

// f'(0) via <proj_{theta0^perp}(v_delta), theta*>/|theta0|. Also evaluates the
// projection-decomposed identity and insists the two agree within 1e-10;
// both equal kappa / |theta0|.
double f_prime_zero(const DenseVector& theta0, const DenseVector& v_delta, const Task& task);

// sup over [0, lambda_max] of (2/sqrt(3)) |v_delta|^2 / |theta0 + lambda v_delta|^2,
// via the closed-form minimum of the norm quadratic on the interval.
double f_second_bound(const DenseVector& theta0, const DenseVector& v_delta,
                      double lambda_max);

// Same bound over an arbitrary interval [lo, hi].
double f_second_bound_interval(const DenseVector& theta0, const DenseVector& v_delta,
                               double lo, double hi);

struct GainHorizon {
    double gamma;
    double horizon;
};

// horizon H* = kappa |theta0| / (4 |v_delta|^2);
// gamma = kGammaCoeff * kappa^2 / |v_delta|^2. Requires kappa > 0.
GainHorizon gamma_and_horizon(double kappa, double theta0_norm, double v_delta_norm_sq);

// Dimension threshold above which most random teacher pairs satisfy C1:
// 2 ln(4/delta) * (|a0| |theta0| (sqrt(1-ac^2)+sqrt(1-ar^2)) / ((ac-ar)(1-a0^2)))^2 + 1.
double d_star(double alpha0, double alpha_c, double alpha_r, double theta0_norm,
              double delta_prob);

// High-probability bound on |theta_T - theta_bar_T| without the sqrt(2*pi)
// update scaling: eta * [sqrt((2 d T / B) ln((d+1)/(delta/2))) + 4 sqrt(d) ln((d+1)/(delta/2))].
double deviation_bound_unscaled(double eta, int d, long long steps, int batch,
                                double delta_prob);

// The certificate bound: sqrt(2*pi) times the unscaled formula, matching the
// explicit sqrt(2*pi) factor in the empirical update.
double deviation_bound(double eta, int d, long long steps, int batch, double delta_prob);

// Full certificate: kappa and C1; when C1 holds, gamma, H*, the learning
// rate eta = min{ gamma |theta0| / (16 b), gamma^2 |theta0|^2 / (256 a^2) }
// with a = sqrt((2 d H*/B) ln((d+1)/(delta/2))), b = 4 sqrt(d) ln((d+1)/(delta/2)),
// steps = ceil(H*/eta), the deviation bound at those values, and the
// advisory dimension condition d >= ln((kappa + |v|^2)/(delta^2 kappa |v|^2)).
Certificate prescribe(const DenseVector& theta0, const TeacherPair& teachers,
                      const Task& task, int batch, double delta_prob);

} // namespace deltasim
