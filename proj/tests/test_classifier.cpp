#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "symadex/classifier.hpp"

using namespace symadex;

namespace {
std::vector<Vector> scalars(std::initializer_list<double> xs) {
    std::vector<Vector> out;
    for (double x : xs) out.push_back(Vector{{x}});
    return out;
}
}  // namespace

TEST_CASE("separable one-dimensional data") {
    const auto pos = scalars({0.1, 0.2});
    const auto neg = scalars({0.8, 0.9});
    const LinearSeparator s = fit_separator(pos, neg);
    for (const Vector& p : pos) CHECK(s.keeps(p));
    for (const Vector& n : neg) CHECK_FALSE(s.keeps(n));
    const double threshold = s.c / s.w(0);
    CHECK(threshold > 0.2);
    CHECK(threshold < 0.8);
}

TEST_CASE("a stray positive is sacrificed for the counterexamples") {
    std::mt19937_64 rng(1);
    std::vector<Vector> pos, neg;
    for (int i = 0; i < 40; ++i) pos.push_back(oracle::uniform_point(rng, Vector{{0.0, 0.0}}, Vector{{0.4, 1.0}}));
    for (int i = 0; i < 40; ++i) neg.push_back(oracle::uniform_point(rng, Vector{{0.6, 0.0}}, Vector{{1.0, 1.0}}));
    pos.push_back(Vector{{0.8, 0.5}});
    const LinearSeparator s = fit_separator(pos, neg);
    for (const Vector& n : neg) CHECK_FALSE(s.keeps(n));
    int kept = 0;
    for (const Vector& p : pos) kept += s.keeps(p);
    CHECK(kept >= 40);
}

TEST_CASE("separable data in several dimensions") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 10; ++k) {
        const int n = 2 + k % 4;
        Vector normal = oracle::uniform_point(rng, -Vector::Ones(n), Vector::Ones(n)).normalized();
        std::vector<Vector> pos, neg;
        while (pos.size() < 30 || neg.size() < 30) {
            const Vector x = oracle::uniform_point(rng, Vector::Zero(n), Vector::Ones(n));
            const double s = normal.dot(x - Vector::Constant(n, 0.5));
            if (s < -0.05 && pos.size() < 30) pos.push_back(x);
            if (s > 0.05 && neg.size() < 30) neg.push_back(x);
        }
        const LinearSeparator sep = fit_separator(pos, neg);
        CHECK(sep.w.norm() == doctest::Approx(1.0));
        for (const Vector& p : pos) CHECK(sep.keeps(p));
        for (const Vector& q : neg) CHECK_FALSE(sep.keeps(q));

        // uniform scaling of the data leaves every decision unchanged
        std::vector<Vector> pos3, neg3;
        for (const Vector& p : pos) pos3.push_back(3.0 * p);
        for (const Vector& q : neg) neg3.push_back(3.0 * q);
        const LinearSeparator scaled = fit_separator(pos3, neg3);
        for (std::size_t i = 0; i < pos.size(); ++i) CHECK(scaled.keeps(pos3[i]) == sep.keeps(pos[i]));
        for (std::size_t i = 0; i < neg.size(); ++i) CHECK(scaled.keeps(neg3[i]) == sep.keeps(neg[i]));
    }
}

TEST_CASE("degenerate inputs") {
    const LinearSeparator s = fit_separator(scalars({0.5}), scalars({0.5}));
    CHECK(s.w.norm() > 0.0);
    CHECK_THROWS_AS(fit_separator({}, scalars({0.5})), Error);
}
