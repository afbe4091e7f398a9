#pragma once

#include "deltasim/geometry.hpp"

namespace deltasim {

// Linearly separable binary classification task: labels are
// 1{<theta_star, x> >= 0} for a unit-norm ground-truth parameter.
struct Task {
    DenseVector theta_star;

    int dim() const { return static_cast<int>(theta_star.size()); }
};

// Two fixed teacher parameter vectors with their target alignments to
// theta_star. alpha_c > alpha_r: the chosen teacher is the stronger one.
struct TeacherPair {
    DenseVector theta_c;
    DenseVector theta_r;
    double alpha_c = 0.0;
    double alpha_r = 0.0;
};

// Covariate with the pseudo-labels the two teachers assign to it.
struct PreferenceExample {
    DenseVector x;
    int y_c = 0;
    int y_r = 0;
};

// 1{<theta_star, x> >= 0}; the zero-product boundary maps to 1.
int true_label(const Task& task, const DenseVector& x);

// Population 0-1 loss of theta: (1/pi) * arccos(cos(theta, theta_star)).
double zo_loss_exact(const DenseVector& theta, const Task& task);

// Monte Carlo estimate of the same quantity: fraction of n Gaussian draws
// where theta and theta_star disagree (same >= 0 boundary convention).
double zo_loss_mc(const DenseVector& theta, const Task& task, long long n, RngStream& rng);

// Alignment of a classifier with a given population accuracy: cos(pi(1-acc)).
double accuracy_to_alpha(double acc);

// Exact inverse: 1 - arccos(alpha)/pi.
double alpha_to_accuracy(double alpha);

// Pseudo-labels x with both teachers' sign rules.
PreferenceExample make_pair(const TeacherPair& teachers, DenseVector x);

// Draws theta_c, theta_r uniformly over the unit-sphere slices at alpha_c and
// alpha_r (two independent sample_at_cosine draws from the given stream).
TeacherPair sample_teacher_pair(const Task& task, double alpha_c, double alpha_r,
                                RngStream& rng);

} // namespace deltasim
