#include "deltasim/certificates.hpp"

#include <algorithm>
#include <cmath>

#include "deltasim/trainer.hpp"

namespace deltasim {

const double kGammaCoeff = (std::sqrt(3.0) / 8.0) * (2.0 / std::sqrt(3.0) - 2.0 / 3.0);

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

double log_term(int d, double delta_prob) {
    return std::log((static_cast<double>(d) + 1.0) / (delta_prob / 2.0));
}

} // namespace

double kappa(const DenseVector& theta0, const TeacherPair& teachers, const Task& task) {
    if (norm_sq(theta0) == 0.0)
        throw std::invalid_argument("degenerate direction: zero student");
    const DenseVector v = population_direction(teachers);
    const double a0 = cosine(theta0, task.theta_star);
    const double ac = cosine(teachers.theta_c, task.theta_star);
    const double ar = cosine(teachers.theta_r, task.theta_star);
    const DenseVector t0_unit = normalized(theta0);
    const DenseVector p0 = project_orthogonal(t0_unit, task.theta_star);
    const DenseVector pv = project_orthogonal(v, task.theta_star);
    return (ac - ar) * (1.0 - a0 * a0) - a0 * dot(p0, pv);
}

double f_along_ray(const DenseVector& theta0, const DenseVector& v_delta, const Task& task,
                   double lambda) {
    DenseVector point(theta0);
    axpy(lambda, v_delta, point);
    if (norm_sq(point) == 0.0)
        throw std::invalid_argument("degenerate point on ray");
    return cosine(point, task.theta_star);
}

double f_prime_zero(const DenseVector& theta0, const DenseVector& v_delta, const Task& task) {
    const double n0 = norm(theta0);
    if (n0 == 0.0) throw std::invalid_argument("degenerate direction: zero student");

    // First identity: <proj_{theta0^perp}(v_delta), theta*> / |theta0|.
    const double first = dot(project_orthogonal(v_delta, theta0), task.theta_star) / n0;

    // Second identity, decomposed along theta* and its complement.
    const DenseVector t0_unit = scaled(theta0, 1.0 / n0);
    const double a0 = dot(t0_unit, task.theta_star);
    const double vs = dot(v_delta, task.theta_star);
    const DenseVector p0 = project_orthogonal(t0_unit, task.theta_star);
    const DenseVector pv = project_orthogonal(v_delta, task.theta_star);
    const double second = (vs * (1.0 - a0 * a0) - a0 * dot(p0, pv)) / n0;

    if (std::abs(first - second) > 1e-10)
        throw std::runtime_error("f'(0) identities disagree beyond 1e-10");
    return first;
}

double f_second_bound_interval(const DenseVector& theta0, const DenseVector& v_delta,
                               double lo, double hi) {
    if (lo > hi) std::swap(lo, hi);
    const double vv = norm_sq(v_delta);
    if (vv == 0.0) return 0.0;
    // |theta0 + lambda v|^2 is quadratic in lambda; its minimum over the
    // interval is at the unconstrained vertex clamped into [lo, hi].
    const double tv = dot(theta0, v_delta);
    const double tt = norm_sq(theta0);
    const double vertex = std::clamp(-tv / vv, lo, hi);
    const double min_norm_sq = tt + 2.0 * vertex * tv + vertex * vertex * vv;
    if (min_norm_sq < 1e-60)
        throw std::invalid_argument("ray passes within 1e-30 of the origin");
    return (2.0 / std::sqrt(3.0)) * vv / min_norm_sq;
}

double f_second_bound(const DenseVector& theta0, const DenseVector& v_delta,
                      double lambda_max) {
    if (lambda_max < 0.0) throw std::invalid_argument("lambda_max must be >= 0");
    return f_second_bound_interval(theta0, v_delta, 0.0, lambda_max);
}

GainHorizon gamma_and_horizon(double kappa, double theta0_norm, double v_delta_norm_sq) {
    if (!(kappa > 0.0)) throw std::invalid_argument("C1 violated: kappa <= 0");
    if (!(theta0_norm > 0.0) || !(v_delta_norm_sq > 0.0))
        throw std::invalid_argument("norms must be positive");
    const double horizon = kappa * theta0_norm / (4.0 * v_delta_norm_sq);
    const double gamma = kGammaCoeff * kappa * kappa / v_delta_norm_sq;
    return {gamma, horizon};
}

double d_star(double alpha0, double alpha_c, double alpha_r, double theta0_norm,
              double delta_prob) {
    if (alpha_c <= alpha_r)
        throw std::invalid_argument("no performance delta: alpha_c must exceed alpha_r");
    if (std::abs(alpha0) >= 1.0)
        throw std::invalid_argument("|alpha0| must be < 1");
    if (!(delta_prob > 0.0 && delta_prob < 1.0))
        throw std::invalid_argument("delta_prob must lie in (0, 1)");
    const double num = std::abs(alpha0) * theta0_norm *
                       (std::sqrt(1.0 - alpha_c * alpha_c) + std::sqrt(1.0 - alpha_r * alpha_r));
    const double den = (alpha_c - alpha_r) * (1.0 - alpha0 * alpha0);
    const double ratio = num / den;
    return 2.0 * std::log(4.0 / delta_prob) * ratio * ratio + 1.0;
}

double deviation_bound_unscaled(double eta, int d, long long steps, int batch,
                                double delta_prob) {
    if (d < 1 || steps < 1 || batch < 1)
        throw std::invalid_argument("d, steps and batch must be positive");
    if (!(delta_prob > 0.0 && delta_prob < 1.0))
        throw std::invalid_argument("delta_prob must lie in (0, 1)");
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
    const double L = log_term(d, delta_prob);
    const double dd = static_cast<double>(d);
    const double first =
        std::sqrt(2.0 * dd * static_cast<double>(steps) / static_cast<double>(batch) * L);
    const double second = 4.0 * std::sqrt(dd) * L;
    return eta * (first + second);
}

double deviation_bound(double eta, int d, long long steps, int batch, double delta_prob) {
    return kSqrt2Pi * deviation_bound_unscaled(eta, d, steps, batch, delta_prob);
}

Certificate prescribe(const DenseVector& theta0, const TeacherPair& teachers,
                      const Task& task, int batch, double delta_prob) {
    if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
    if (!(delta_prob > 0.0 && delta_prob < 1.0))
        throw std::invalid_argument("delta_prob must lie in (0, 1)");

    Certificate cert;
    cert.dim = static_cast<int>(theta0.size());
    cert.batch = batch;
    cert.delta_prob = delta_prob;
    cert.theta0_norm = norm(theta0);
    cert.alpha0 = cosine(theta0, task.theta_star);
    cert.alpha_c = cosine(teachers.theta_c, task.theta_star);
    cert.alpha_r = cosine(teachers.theta_r, task.theta_star);
    cert.v_delta = population_direction(teachers);
    cert.v_delta_norm_sq = norm_sq(cert.v_delta);
    cert.kappa = kappa(theta0, teachers, task);
    cert.c1_holds = cert.kappa > 0.0;
    cert.d_star = d_star(cert.alpha0, cert.alpha_c, cert.alpha_r, cert.theta0_norm, delta_prob);

    if (!cert.c1_holds) return cert;

    const auto gh = gamma_and_horizon(cert.kappa, cert.theta0_norm, cert.v_delta_norm_sq);
    cert.gamma = gh.gamma;
    cert.horizon = gh.horizon;

    const double L = log_term(cert.dim, delta_prob);
    const double dd = static_cast<double>(cert.dim);
    const double a =
        std::sqrt(2.0 * dd * gh.horizon / static_cast<double>(batch) * L);
    const double b = 4.0 * std::sqrt(dd) * L;
    const double eta = std::min(gh.gamma * cert.theta0_norm / (16.0 * b),
                                gh.gamma * gh.gamma * cert.theta0_norm * cert.theta0_norm /
                                    (256.0 * a * a));
    cert.eta = eta;
    cert.steps = static_cast<long long>(std::ceil(gh.horizon / eta));
    cert.deviation_bound = deviation_bound(eta, cert.dim, *cert.steps, batch, delta_prob);

    const double dim_threshold = std::log((cert.kappa + cert.v_delta_norm_sq) /
                                          (delta_prob * delta_prob * cert.kappa *
                                           cert.v_delta_norm_sq));
    cert.dim_condition_ok = dd >= dim_threshold;
    return cert;
}

} // namespace deltasim
