#include "deltasim/task.hpp"

#include <cmath>

namespace deltasim {

int true_label(const Task& task, const DenseVector& x) {
    return dot(task.theta_star, x) >= 0.0 ? 1 : 0;
}

double zo_loss_exact(const DenseVector& theta, const Task& task) {
    return std::acos(cosine(theta, task.theta_star)) / M_PI;
}

double zo_loss_mc(const DenseVector& theta, const Task& task, long long n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    if (theta.size() != task.theta_star.size())
        throw dimension_error("dimension mismatch in zo_loss_mc");
    if (norm_sq(theta) == 0.0)
        throw std::invalid_argument("degenerate direction: zero theta");
    const std::size_t d = theta.size();
    DenseVector x(d);
    long long wrong = 0;
    for (long long i = 0; i < n; ++i) {
        rng.fill_gaussian(x.data(), d);
        const bool pred = dot(theta, x) >= 0.0;
        const bool truth = dot(task.theta_star, x) >= 0.0;
        if (pred != truth) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(n);
}

double accuracy_to_alpha(double acc) {
    if (acc < 0.0 || acc > 1.0)
        throw std::invalid_argument("accuracy outside [0, 1]");
    return std::cos(M_PI * (1.0 - acc));
}

double alpha_to_accuracy(double alpha) {
    if (alpha < -1.0 || alpha > 1.0)
        throw std::invalid_argument("alpha outside [-1, 1]");
    return 1.0 - std::acos(alpha) / M_PI;
}

PreferenceExample make_pair(const TeacherPair& teachers, DenseVector x) {
    const int y_c = dot(teachers.theta_c, x) >= 0.0 ? 1 : 0;
    const int y_r = dot(teachers.theta_r, x) >= 0.0 ? 1 : 0;
    return PreferenceExample{std::move(x), y_c, y_r};
}

TeacherPair sample_teacher_pair(const Task& task, double alpha_c, double alpha_r,
                                RngStream& rng) {
    if (alpha_c <= alpha_r)
        throw std::invalid_argument("no performance delta: alpha_c must exceed alpha_r");
    if (alpha_c > 1.0 || alpha_r < -1.0)
        throw std::invalid_argument("alpha outside [-1, 1]");
    TeacherPair out;
    out.theta_c = sample_at_cosine(task.theta_star, alpha_c, rng);
    out.theta_r = sample_at_cosine(task.theta_star, alpha_r, rng);
    out.alpha_c = alpha_c;
    out.alpha_r = alpha_r;
    return out;
}

} // namespace deltasim
