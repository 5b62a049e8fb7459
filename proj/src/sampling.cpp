#include "symadex/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace symadex {

namespace {

Vector random_direction(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector d(n);
    for (Eigen::Index j = 0; j < n; ++j) d(j) = normal(rng);
    return d;
}

}  // namespace

std::optional<Vector> worst_concrete_counterexample(const Network& net, const Polyhedron& region, Eigen::Index y_t,
                                                    std::uint64_t seed) {
    constexpr int kStarts = 3;
    constexpr int kMaxIterations = 100;
    constexpr double kGapTolerance = 1e-4;
    std::mt19937_64 rng(seed);
    std::optional<Vector> best;
    double best_value = 0.0;
    for (int s = 0; s < kStarts; ++s) {
        Vector x = optimize_linear(region, random_direction(rng, region.dim()), lp::Sense::Minimize).primal;
        double value = margin(net, x, y_t);
        for (int k = 0; k < kMaxIterations; ++k) {
            const Vector g = margin_gradient(net, x, y_t);
            if (g.isZero(0.0)) break;
            const Vector vertex = optimize_linear(region, g, lp::Sense::Minimize).primal;
            const Vector dir = vertex - x;
            if (g.dot(-dir) <= kGapTolerance) break;
            double step_value = value;
            double step = 0.0;
            for (int i = 0; i <= 10; ++i) {
                const double gamma = std::ldexp(1.0, -i);
                const double v = margin(net, Vector(x + gamma * dir), y_t);
                if (v < step_value) {
                    step_value = v;
                    step = gamma;
                }
            }
            if (step == 0.0) break;
            x += step * dir;
            value = step_value;
        }
        if (!classifies_as(evaluate(net, x), y_t) && (!best || value < best_value)) {
            best = x;
            best_value = value;
        }
    }
    return best;
}

FarPoint far_point(const Polyhedron& region, const Vector& x) {
    const Eigen::Index n = region.dim();
    if (x.size() != n) throw DimensionError("point dimension does not match region");
    FarPoint best;
    best.distance = -1.0;
    auto consider = [&](const Vector& signs) {
        const lp::Solution sol = optimize_linear(region, signs, lp::Sense::Maximize);
        const double d = (sol.primal - x).lpNorm<1>();
        if (d > best.distance) best = {sol.primal, d};
        return sol.primal;
    };
    if (n <= kExactFarPointDim) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
            Vector signs(n);
            for (Eigen::Index j = 0; j < n; ++j) signs(j) = (mask >> j) & 1 ? -1.0 : 1.0;
            consider(signs);
        }
        return best;
    }
    const Vector centre = 0.5 * (region.lower + region.upper);
    Vector signs = (centre - x).unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
    for (int round = 0; round < 50; ++round) {
        const Vector p = consider(signs);
        Vector next = signs;
        for (Eigen::Index j = 0; j < n; ++j)
            if (p(j) != x(j)) next(j) = p(j) > x(j) ? 1.0 : -1.0;
        if (next == signs) break;
        signs = std::move(next);
    }
    return best;
}

CounterexampleTest CounterexampleTest::concrete(const Network& net, Eigen::Index y_t) {
    CounterexampleTest t;
    t.net_ = &net;
    t.target_ = y_t;
    t.mode_ = SampleMode::Concrete;
    return t;
}

CounterexampleTest CounterexampleTest::abstract(const Network& net, const RelaxationState& state,
                                                const SolveRecord& record) {
    CounterexampleTest t;
    t.net_ = &net;
    t.state_ = &state;
    t.record_ = &record;
    t.target_ = record.target;
    t.mode_ = SampleMode::Abstract;
    return t;
}

bool CounterexampleTest::operator()(const Vector& x) const {
    if (mode_ == SampleMode::Concrete) return !classifies_as(evaluate(*net_, x), target_);
    return approx_abstract_eval(*net_, *state_, *record_, x).objective < 0.0;
}

bool CounterexampleTest::exact(const Vector& x) const {
    if (mode_ == SampleMode::Concrete) return (*this)(x);
    return exact_objective_at(*net_, *state_, target_, x) < 0.0;
}

CounterexampleBatch gaussian_sample(const Polyhedron& region, const Vector& x_star, const Vector& x_plus,
                                    std::size_t s_minus, const CounterexampleTest& test, std::uint64_t seed,
                                    const SamplerConfig& cfg) {
    CounterexampleBatch batch;
    batch.mode = test.mode();
    if (s_minus == 0) return batch;
    const int centers = std::max(1, cfg.centers);
    const double diameter = (region.upper - region.lower).maxCoeff();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto draw = [&](const Vector& c, double rho) {
        Vector x(c.size());
        for (Eigen::Index j = 0; j < x.size(); ++j)
            x(j) = std::clamp(c(j) + rho * normal(rng), region.lower(j), region.upper(j));
        return x;
    };
    auto accepted = [&](const Vector& x) {
        ++batch.evaluations;
        return contains(region, x) && test(x);
    };

    std::vector<Vector> centre(static_cast<std::size_t>(centers));
    std::vector<double> spread(static_cast<std::size_t>(centers), 0.0);
    for (int k = 0; k < centers; ++k) {
        const double t = centers == 1 ? 0.0 : static_cast<double>(k) / (centers - 1);
        centre[static_cast<std::size_t>(k)] = x_star + t * (x_plus - x_star);
        if (!(diameter > 0.0)) continue;
        double lo = 1e-4 * diameter;
        double hi = diameter;
        double chosen = lo;
        for (int step = 0; step < cfg.search_steps; ++step) {
            const double mid = std::sqrt(lo * hi);
            // acceptance rate among the probes that land inside the region
            int inside = 0;
            int hits = 0;
            for (int i = 0; i < cfg.probe_samples; ++i) {
                const Vector x = draw(centre[static_cast<std::size_t>(k)], mid);
                ++batch.evaluations;
                if (!contains(region, x)) continue;
                ++inside;
                hits += test(x);
            }
            if (inside > 0 && hits >= cfg.threshold * inside) {
                chosen = mid;
                lo = mid;
            } else {
                hi = mid;
            }
        }
        spread[static_cast<std::size_t>(k)] = chosen;
    }

    const std::size_t quota = (s_minus + static_cast<std::size_t>(centers) - 1) / static_cast<std::size_t>(centers);
    for (int k = 0; k < centers && batch.points.size() < s_minus; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const std::size_t attempts = diameter > 0.0 ? 4 * quota : 1;
        std::size_t taken = 0;
        for (std::size_t i = 0; i < attempts && taken < quota && batch.points.size() < s_minus; ++i) {
            Vector x = draw(centre[ku], spread[ku]);
            if (!accepted(x)) continue;
            batch.points.push_back(std::move(x));
            batch.center.push_back(k);
            batch.rho.push_back(spread[ku]);
            ++taken;
        }
    }

    if (batch.points.empty() && test.mode() == SampleMode::Abstract) {
        for (int i = 0; i < cfg.fallback_samples; ++i) {
            const int k = i % centers;
            Vector x = draw(centre[static_cast<std::size_t>(k)], spread[static_cast<std::size_t>(k)]);
            ++batch.evaluations;
            if (!contains(region, x) || !test.exact(x)) continue;
            batch.points.push_back(std::move(x));
            batch.center.push_back(k);
            batch.rho.push_back(spread[static_cast<std::size_t>(k)]);
        }
    }
    return batch;
}

HistorySet::HistorySet(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

void HistorySet::update(CounterexampleBatch batch) {
    batches_.push_back(std::move(batch));
    while (batches_.size() > capacity_) batches_.pop_front();
}

std::vector<Vector> HistorySet::filtered(const Polyhedron& region) const {
    std::vector<Vector> out;
    for (const auto& b : batches_)
        for (const Vector& p : b.points)
            if (contains(region, p)) out.push_back(p);
    return out;
}

}  // namespace symadex
