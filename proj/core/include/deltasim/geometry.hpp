#pragma once

#include <stdexcept>
#include <vector>

#include "deltasim/rng.hpp"

namespace deltasim {

// Dense d-dimensional parameter/covariate vector, 64-bit precision.
using DenseVector = std::vector<double>;

class dimension_error : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double dot(const DenseVector& u, const DenseVector& v);
double norm_sq(const DenseVector& v);
double norm(const DenseVector& v);

// y += a * x
void axpy(double a, const DenseVector& x, DenseVector& y);

DenseVector scaled(const DenseVector& v, double a);
DenseVector normalized(const DenseVector& v);

bool all_finite(const DenseVector& v);

// <u,v> / (|u||v|), clamped into [-1,1] so downstream arccos never sees an
// out-of-range value from rounding. Throws on zero vectors ("degenerate
// direction") or mismatched dimensions.
double cosine(const DenseVector& u, const DenseVector& v);

// v - (<u,v>/|u|^2) u. Throws on zero u.
DenseVector project_orthogonal(const DenseVector& v, const DenseVector& u);

// d iid standard normals.
DenseVector sample_gaussian(int d, RngStream& rng);

// Uniform on the unit sphere S^{d-1} (normalized Gaussian draw).
DenseVector sample_unit_sphere(int d, RngStream& rng);

// Uniform over {theta on the unit sphere : cos(theta, theta_star) = alpha}:
// returns alpha * theta_star + sqrt(1-alpha^2) * u with u uniform on the unit
// sphere of the orthogonal complement of theta_star. The complement draw
// projects a fresh Gaussian and redraws if the projected norm is below 1e-30.
// theta_star must be unit norm; d >= 2 is required whenever |alpha| < 1.
DenseVector sample_at_cosine(const DenseVector& theta_star, double alpha, RngStream& rng);

} // namespace deltasim
