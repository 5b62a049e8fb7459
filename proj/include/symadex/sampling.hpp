#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "symadex/geometry.hpp"
#include "symadex/network.hpp"
#include "symadex/relaxation.hpp"

namespace symadex {

/// Local minimizer of the concrete margin over the region found by
/// Frank-Wolfe with an LP oracle, started from a few random LP vertices.
/// Empty when every minimum found is still classified as y_t.
std::optional<Vector> worst_concrete_counterexample(const Network& net, const Polyhedron& region, Eigen::Index y_t,
                                                    std::uint64_t seed);

struct FarPoint {
    Vector point;
    double distance = 0.0;
};

/// Point of the region at maximal L1 distance from x. Exact (one LP per
/// orthant) up to kExactFarPointDim inputs; above that a sign-ascent local
/// search.
inline constexpr Eigen::Index kExactFarPointDim = 8;
FarPoint far_point(const Polyhedron& region, const Vector& x);

enum class SampleMode { Concrete, Abstract };

struct SamplerConfig {
    int centers = 6;
    int probe_samples = 64;
    double threshold = 0.5;
    int search_steps = 12;
    int fallback_samples = 32;
};

struct CounterexampleBatch {
    SampleMode mode = SampleMode::Concrete;
    std::vector<Vector> points;
    std::vector<int> center;  // per point
    std::vector<double> rho;  // per point
    std::size_t evaluations = 0;
};

/// Predicate deciding whether a sample is a counterexample of the chosen kind.
class CounterexampleTest {
public:
    static CounterexampleTest concrete(const Network& net, Eigen::Index y_t);
    /// Negative approximate relaxed objective, mimicking `record`.
    static CounterexampleTest abstract(const Network& net, const RelaxationState& state, const SolveRecord& record);

    SampleMode mode() const { return mode_; }
    bool operator()(const Vector& x) const;
    /// Exact relaxed objective below zero (abstract mode only).
    bool exact(const Vector& x) const;

private:
    const Network* net_ = nullptr;
    const RelaxationState* state_ = nullptr;
    const SolveRecord* record_ = nullptr;
    Eigen::Index target_ = 0;
    SampleMode mode_ = SampleMode::Concrete;
};

/// Gaussian samples around equally spaced centres on the segment from x_star
/// to x_plus, each centre's spread set by binary search on the acceptance
/// rate. Every returned point lies in the region and passes `test`.
CounterexampleBatch gaussian_sample(const Polyhedron& region, const Vector& x_star, const Vector& x_plus,
                                    std::size_t s_minus, const CounterexampleTest& test, std::uint64_t seed,
                                    const SamplerConfig& cfg = {});

/// The last n counterexample batches.
class HistorySet {
public:
    explicit HistorySet(std::size_t capacity = 5);

    void update(CounterexampleBatch batch);
    std::size_t size() const { return batches_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<CounterexampleBatch>& batches() const { return batches_; }

    /// All stored points that lie in the region.
    std::vector<Vector> filtered(const Polyhedron& region) const;

private:
    std::size_t capacity_;
    std::deque<CounterexampleBatch> batches_;
};

}  // namespace symadex
