#include <cmath>
#include <doctest.h>

#include "deltasim/task.hpp"

using namespace deltasim;

namespace {

Task axis_task(int d) {
    DenseVector star(d, 0.0);
    star[0] = 1.0;
    return Task{star};
}

} // namespace

TEST_CASE("true_label boundary convention") {
    const Task task = axis_task(3);
    CHECK(true_label(task, task.theta_star) == 1);
    CHECK(true_label(task, scaled(task.theta_star, -1.0)) == 0);
    CHECK(true_label(task, {0.0, 1.0, 0.0}) == 1); // exactly zero product -> 1
    CHECK_THROWS_AS(true_label(task, {1.0, 0.0}), dimension_error);
}

TEST_CASE("zo_loss_exact is the arccos law") {
    const Task task = axis_task(4);
    CHECK(zo_loss_exact(task.theta_star, task) == 0.0);
    CHECK(zo_loss_exact({0.0, 1.0, 0.0, 0.0}, task) == doctest::Approx(0.5).epsilon(1e-15));

    // cosine 0.809017 -> loss 0.2
    const double c = std::cos(0.2 * M_PI), s = std::sin(0.2 * M_PI);
    CHECK(zo_loss_exact({c, s, 0.0, 0.0}, task) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(zo_loss_exact({0, 0, 0, 0}, task), std::invalid_argument);
}

TEST_CASE("zo_loss_mc matches the exact law") {
    const Task task = axis_task(4);
    RngStream rng(20, 0);
    CHECK(zo_loss_mc(task.theta_star, task, 2000, rng) == 0.0);
    CHECK(zo_loss_mc(scaled(task.theta_star, -1.0), task, 2000, rng) == 1.0);

    const double c = std::cos(0.2 * M_PI), s = std::sin(0.2 * M_PI);
    const double mc = zo_loss_mc({c, s, 0.0, 0.0}, task, 100000, rng);
    CHECK(std::abs(mc - 0.2) < 0.01); // 4-sigma binomial band is ~0.005

    CHECK_THROWS_AS(zo_loss_mc(task.theta_star, task, 0, rng), std::invalid_argument);
}

TEST_CASE("zo_loss_mc within 4-sigma of exact for random students") {
    const int d = 32;
    const long long n = 100000;
    RngStream rng(21, 0);
    Task task{sample_unit_sphere(d, rng)};
    for (int k = 0; k < 20; ++k) {
        const double alpha = rng.uniform(-0.99, 0.99);
        const DenseVector theta = sample_at_cosine(task.theta_star, alpha, rng);
        const double exact = zo_loss_exact(theta, task);
        RngStream mc_rng(21, 100 + (std::uint64_t)k);
        const double mc = zo_loss_mc(theta, task, n, mc_rng);
        const double band = 4.0 * std::sqrt(exact * (1.0 - exact) / (double)n);
        CHECK(std::abs(mc - exact) <= band + 1e-12);
    }
}

TEST_CASE("accuracy/alpha conversion") {
    CHECK(accuracy_to_alpha(1.0) == 1.0);
    CHECK(std::abs(accuracy_to_alpha(0.5)) <= 1e-12);
    CHECK(accuracy_to_alpha(0.8) == doctest::Approx(0.8090169943749475).epsilon(1e-14));
    CHECK_THROWS_AS(accuracy_to_alpha(1.2), std::invalid_argument);
    CHECK_THROWS_AS(alpha_to_accuracy(-1.0001), std::invalid_argument);

    for (int i = 0; i <= 100; ++i) {
        const double acc = i / 100.0;
        CHECK(std::abs(alpha_to_accuracy(accuracy_to_alpha(acc)) - acc) <= 1e-12);
    }
}

TEST_CASE("make_pair pseudo-labeling") {
    TeacherPair teachers{{1, 0, 0}, {0, 1, 0}, 0.0, 0.0};

    const PreferenceExample both = make_pair(teachers, {1.0, 1.0, 0.0});
    CHECK(both.y_c == 1);
    CHECK(both.y_r == 1);

    const PreferenceExample split = make_pair(teachers, {1.0, -1.0, 0.0});
    CHECK(split.y_c == 1);
    CHECK(split.y_r == 0);

    RngStream rng(22, 0);
    for (int i = 0; i < 200; ++i) {
        const DenseVector x = sample_gaussian(3, rng);
        const PreferenceExample a = deltasim::make_pair(teachers, x);
        const PreferenceExample b = deltasim::make_pair(teachers, scaled(x, -1.0));
        // sign antisymmetry away from the boundary
        CHECK(a.y_c + b.y_c == 1);
        CHECK(a.y_r + b.y_r == 1);
    }
}

TEST_CASE("sample_teacher_pair invariants") {
    RngStream rng(23, 0);
    Task task{sample_unit_sphere(24, rng)};

    const TeacherPair exact = sample_teacher_pair(task, 1.0, -1.0, rng);
    CHECK(exact.theta_c == task.theta_star);

    const TeacherPair pair = sample_teacher_pair(task, 0.587785, 0.309017, rng);
    CHECK(std::abs(cosine(pair.theta_c, task.theta_star) - 0.587785) <= 1e-12);
    CHECK(std::abs(cosine(pair.theta_r, task.theta_star) - 0.309017) <= 1e-12);
    CHECK(std::abs(norm(pair.theta_c) - 1.0) <= 1e-12);
    CHECK(std::abs(norm(pair.theta_r) - 1.0) <= 1e-12);
    CHECK(alpha_to_accuracy(pair.alpha_c) == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(alpha_to_accuracy(pair.alpha_r) == doctest::Approx(0.6).epsilon(1e-6));

    CHECK_THROWS_WITH_AS(sample_teacher_pair(task, 0.3, 0.5, rng),
                         doctest::Contains("no performance delta"), std::invalid_argument);
    CHECK_THROWS_AS(sample_teacher_pair(task, 0.5, 0.5, rng), std::invalid_argument);
}

TEST_CASE("pseudo-label disagreement follows the arccos law") {
    const int d = 8;
    const long long n = 100000;
    RngStream rng(24, 0);
    Task task{sample_unit_sphere(d, rng)};
    const TeacherPair pair = sample_teacher_pair(task, 0.7, 0.2, rng);

    const double p_disagree = std::acos(cosine(pair.theta_c, pair.theta_r)) / M_PI;
    const double p_c_correct = 1.0 - zo_loss_exact(pair.theta_c, task);

    long long disagree = 0, c_correct = 0;
    for (long long i = 0; i < n; ++i) {
        const DenseVector x = sample_gaussian(d, rng);
        const PreferenceExample ex = deltasim::make_pair(pair, x);
        if (ex.y_c != ex.y_r) ++disagree;
        if (ex.y_c == true_label(task, x)) ++c_correct;
    }
    const double nn = (double)n;
    CHECK(std::abs(disagree / nn - p_disagree) <=
          4.0 * std::sqrt(p_disagree * (1 - p_disagree) / nn));
    CHECK(std::abs(c_correct / nn - p_c_correct) <=
          4.0 * std::sqrt(p_c_correct * (1 - p_c_correct) / nn));
}
