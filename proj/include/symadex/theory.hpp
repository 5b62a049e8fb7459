#pragma once

#include <cstdint>
#include <vector>

#include "symadex/common.hpp"

namespace symadex::theory {

/// Adversarial hyperbox [0, sigma]^d inside the unit cube, cuts whose normals
/// have cosine similarity at least omega_min with the axis they should match.
struct Instance {
    int d = 2;
    double sigma = 0.5;
    double omega_min = 1.0;
    int m = 1;

    void validate() const;
};

/// Largest width a cut with cosine similarity omega can remove beyond the ideal one.
double delta_bound(const Instance& inst);

/// max over points inside [0, sigma]^d of sigma - p[kappa]; sigma when none qualifies.
double epsilon_i(const std::vector<Vector>& points, double sigma, Eigen::Index kappa);

/// Expected uniform samples until one cut keeps at least a fraction v of the box.
double expected_samples_single(const Instance& inst, double v);

/// Same for m cuts keeping a total fraction V.
double expected_samples_region(const Instance& inst, double V);

/// Expected samples to improve a cut at u > sigma by a fraction v of the gap.
double expected_samples_progress(double u, double sigma, double v);

/// Counter-based generator: the value depends only on (seed, stream, index).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct ChainTrace {
    std::vector<double> counts;        // samples drawn per trial (or per iteration)
    std::vector<double> running_mean;
    double mean() const { return running_mean.empty() ? 0.0 : running_mean.back(); }
};

/// Per trial, uniform samples in [0,1]^d until one lands in
/// [0, sigma]^(d-1) x [sigma - eps, sigma] with eps = sigma - delta - v sigma.
ChainTrace simulate_cut_chain(const Instance& inst, double v, std::size_t trials, std::uint64_t seed);

/// Per trial, uniform samples on [0, u] until one lands in the strip
/// [sigma, sigma + (u - sigma) v]. With iterations > 1 the chain continues
/// from u set to the hit coordinate and records each iteration's count.
ChainTrace simulate_progress_chain(double u, double sigma, double v, std::size_t trials, std::uint64_t seed,
                                   int iterations = 1);

}  // namespace symadex::theory
