#pragma once

#include <vector>

#include "symadex/common.hpp"
#include "symadex/geometry.hpp"

namespace symadex {

/// Half-space w . x <= c that keeps the adversarial side.
struct LinearSeparator {
    Vector w;
    double c = 0.0;

    HalfSpace half_space() const { return {w, c}; }
    bool keeps(const Vector& x) const { return w.dot(x) <= c; }
};

struct ClassifierConfig {
    double negative_weight = 100.0;
    double positive_weight = 1.0;
    double l2 = 1e-6;
    int max_iterations = 5000;
    double gradient_tolerance = 1e-6;
};

/// Weighted logistic regression between adversarial points (kept) and
/// counterexamples (removed). When the fitted direction separates the two
/// sets, the offset is moved so that every counterexample is strictly removed.
LinearSeparator fit_separator(const std::vector<Vector>& positives, const std::vector<Vector>& negatives,
                              const ClassifierConfig& cfg = {});

}  // namespace symadex
