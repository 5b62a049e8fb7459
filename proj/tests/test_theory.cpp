#include <doctest.h>

#include <cmath>

#include "symadex/theory.hpp"

using namespace symadex;
using namespace symadex::theory;

TEST_CASE("delta bound") {
    CHECK(delta_bound({5, 0.3, 1.0, 1}) == 0.0);
    CHECK(delta_bound({2, 0.5, std::sqrt(2.0) / 2, 1}) == doctest::Approx(0.5));

    // grid maximization over unit slopes with cosine at least omega
    // grid search over unit normals n = (sin b, cos b) of the cut, keeping cos b >= omega;
    // the cut then drops by sigma * |n_0 / n_1| across a box face of width sigma
    for (double alpha : {0.1, 0.3, 0.6}) {
        const double omega = std::cos(alpha);
        const double sigma = 0.5;
        const double formula = delta_bound({2, sigma, omega, 1});
        double best = 0.0;
        for (int i = 0; i <= 200000; ++i) {
            const double b = -1.5 + 3.0 * i / 200000.0;
            const double n0 = std::sin(b), n1 = std::cos(b);
            if (n1 < omega) continue;
            best = std::max(best, sigma * std::abs(n0 / n1));
        }
        CHECK(best <= formula + 1e-12);
        CHECK(formula - best < 1e-4);
    }
    // monotone: decreasing in omega, increasing in d
    double prev = 1e300;
    for (double w = 0.1; w <= 1.0; w += 0.1) {
        const double d = delta_bound({4, 0.5, w, 1});
        CHECK(d <= prev);
        prev = d;
    }
    for (int d = 2; d < 10; ++d) CHECK(delta_bound({d + 1, 0.5, 0.9, 1}) >= delta_bound({d, 0.5, 0.9, 1}));
    CHECK_THROWS_AS(delta_bound({2, 0.5, 0.0, 1}), Error);
}

TEST_CASE("epsilon") {
    CHECK(epsilon_i({Vector{{0.1, 0.5}}}, 0.5, 1) == 0.0);
    CHECK(epsilon_i({Vector{{0.7, 0.1}}}, 0.5, 1) == 0.5);
    CHECK(epsilon_i({}, 0.5, 0) == 0.5);
    CHECK(epsilon_i({Vector{{0.1, 0.1}}, Vector{{0.4, 0.2}}}, 0.5, 1) == doctest::Approx(0.4));
}

TEST_CASE("sample count formulas") {
    const Instance three{3, 0.5, 1.0, 1};
    CHECK(expected_samples_single(three, 0.5) == doctest::Approx(16.0));
    CHECK_THROWS_AS(expected_samples_single(three, 1.0), Error);
    CHECK(expected_samples_single(three, 0.999) > 1e3);
    CHECK(expected_samples_region(three, 0.5) == doctest::Approx(16.0));

    const Instance big{100, 0.8, 1.0, 100};
    CHECK(expected_samples_region(big, 0.9) == doctest::Approx(4.7e12).epsilon(0.02));
    CHECK(expected_samples_region(big, 0.95) == doctest::Approx(9.6e12).epsilon(0.02));
    CHECK_THROWS_AS(expected_samples_region(big, 1.0), Error);
    // increasing in V and in d
    CHECK(expected_samples_region(big, 0.95) > expected_samples_region(big, 0.9));
    CHECK(expected_samples_region({101, 0.8, 1.0, 100}, 0.9) > expected_samples_region(big, 0.9));

    CHECK(expected_samples_progress(1.0, 0.5, 0.5) == doctest::Approx(4.0));
    CHECK(expected_samples_progress(0.5 + 1e-9, 0.5, 0.5) > 1e8);
    CHECK_THROWS_AS(expected_samples_progress(0.5, 0.5, 0.5), Error);
}

TEST_CASE("Monte Carlo agrees with the closed forms") {
    const ChainTrace single = simulate_cut_chain({3, 0.5, 1.0, 1}, 0.5, 10000, 1);
    CHECK(std::abs(single.mean() - 16.0) / 16.0 < 0.05);
    const ChainTrace progress = simulate_progress_chain(1.0, 0.5, 0.5, 10000, 1);
    CHECK(std::abs(progress.mean() - 4.0) / 4.0 < 0.05);

    const ChainTrace again = simulate_cut_chain({3, 0.5, 1.0, 1}, 0.5, 10000, 1);
    CHECK(again.counts == single.counts);
    CHECK(uniform01(3, 4, 5) == uniform01(3, 4, 5));
    CHECK(uniform01(3, 4, 5) != uniform01(3, 4, 6));

    const ChainTrace chain = simulate_progress_chain(1.0, 0.5, 0.5, 100, 2, 5);
    CHECK(chain.counts.size() == 500);
}
