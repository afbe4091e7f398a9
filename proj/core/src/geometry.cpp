#include "deltasim/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace deltasim {

namespace {

void require_same_dim(const DenseVector& u, const DenseVector& v) {
    if (u.size() != v.size())
        throw dimension_error("dimension mismatch: " + std::to_string(u.size()) +
                              " vs " + std::to_string(v.size()));
}

} // namespace

double dot(const DenseVector& u, const DenseVector& v) {
    require_same_dim(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm_sq(const DenseVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double norm(const DenseVector& v) { return std::sqrt(norm_sq(v)); }

void axpy(double a, const DenseVector& x, DenseVector& y) {
    require_same_dim(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

DenseVector scaled(const DenseVector& v, double a) {
    DenseVector out(v);
    for (double& x : out) x *= a;
    return out;
}

DenseVector normalized(const DenseVector& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("degenerate direction: zero vector");
    return scaled(v, 1.0 / n);
}

bool all_finite(const DenseVector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double cosine(const DenseVector& u, const DenseVector& v) {
    require_same_dim(u, v);
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0 || nv == 0.0)
        throw std::invalid_argument("degenerate direction: zero vector in cosine");
    const double c = dot(u, v) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

DenseVector project_orthogonal(const DenseVector& v, const DenseVector& u) {
    require_same_dim(v, u);
    const double uu = norm_sq(u);
    if (uu == 0.0)
        throw std::invalid_argument("degenerate direction: zero vector in projection");
    const double coeff = dot(u, v) / uu;
    DenseVector out(v);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] -= coeff * u[i];
    return out;
}

DenseVector sample_gaussian(int d, RngStream& rng) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    DenseVector out(static_cast<std::size_t>(d));
    rng.fill_gaussian(out.data(), out.size());
    return out;
}

DenseVector sample_unit_sphere(int d, RngStream& rng) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    DenseVector v(static_cast<std::size_t>(d));
    double n;
    do {
        rng.fill_gaussian(v.data(), v.size());
        n = norm(v);
    } while (n < 1e-30);
    for (double& x : v) x /= n;
    return v;
}

DenseVector sample_at_cosine(const DenseVector& theta_star, double alpha, RngStream& rng) {
    if (std::abs(alpha) > 1.0)
        throw std::invalid_argument("alpha outside [-1, 1]");
    const int d = static_cast<int>(theta_star.size());
    if (alpha == 1.0) return theta_star;
    if (alpha == -1.0) return scaled(theta_star, -1.0);
    if (d < 2)
        throw std::invalid_argument("orthogonal complement empty: d = 1 with |alpha| < 1");

    DenseVector u(theta_star.size());
    double n;
    do {
        rng.fill_gaussian(u.data(), u.size());
        const double c = dot(u, theta_star); // theta_star is unit norm
        for (std::size_t i = 0; i < u.size(); ++i) u[i] -= c * theta_star[i];
        n = norm(u);
    } while (n < 1e-30);

    const double ortho = std::sqrt(1.0 - alpha * alpha);
    DenseVector out(theta_star.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = alpha * theta_star[i] + ortho * (u[i] / n);
    return out;
}

} // namespace deltasim
