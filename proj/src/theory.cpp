#include "symadex/theory.hpp"

#include <cmath>
#include <string>

namespace symadex::theory {

void Instance::validate() const {
    if (d < 1) throw Error("dimension must be at least 1");
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error("sigma must lie in (0, 1)");
    if (!(omega_min > 0.0 && omega_min <= 1.0)) throw Error("omega must lie in (0, 1]");
    if (m < 1) throw Error("m must be at least 1");
}

double delta_bound(const Instance& inst) {
    inst.validate();
    const double w = inst.omega_min;
    return inst.sigma * std::sqrt((inst.d - 1) * std::max(0.0, 1.0 - w * w)) / w;
}

double epsilon_i(const std::vector<Vector>& points, double sigma, Eigen::Index kappa) {
    double best = -1.0;
    for (const Vector& p : points) {
        if (kappa < 0 || kappa >= p.size()) throw DimensionError("kappa out of range");
        if ((p.array() < 0.0).any() || (p.array() > sigma).any()) continue;
        best = std::max(best, sigma - p(kappa));
    }
    return best < 0.0 ? sigma : best;
}

double expected_samples_single(const Instance& inst, double v) {
    const double delta = delta_bound(inst);
    const double room = 1.0 - delta / inst.sigma;
    if (!(v >= 0.0 && v < room))
        throw Error("v must lie in [0, " + std::to_string(room) + ")");
    return 1.0 / (std::pow(inst.sigma, inst.d) * (room - v));
}

double expected_samples_region(const Instance& inst, double V) {
    const double delta = delta_bound(inst);
    const double room = 1.0 - delta / inst.sigma;
    const double per_cut = std::pow(V, 1.0 / inst.m);
    if (!(V >= 0.0 && per_cut < room))
        throw Error("V must lie in [0, " + std::to_string(std::pow(room, inst.m)) + ")");
    return 1.0 / (std::pow(inst.sigma, inst.d) * (room - per_cut));
}

double expected_samples_progress(double u, double sigma, double v) {
    if (!(u > sigma)) throw Error("u must exceed sigma");
    if (!(v > 0.0 && v <= 1.0)) throw Error("v must lie in (0, 1]");
    return u / ((u - sigma) * v);
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    // SplitMix64 finalizer over a combined counter
    std::uint64_t z = seed * 0xD1B54A32D192ED03ULL + stream * 0x9E3779B97F4A7C15ULL + index * 0xF1357AEA2E62A9C5ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

namespace {
void push(ChainTrace& trace, double count) {
    const double n = static_cast<double>(trace.counts.size());
    const double prev = trace.running_mean.empty() ? 0.0 : trace.running_mean.back();
    trace.counts.push_back(count);
    trace.running_mean.push_back(prev + (count - prev) / (n + 1.0));
}
}  // namespace

ChainTrace simulate_cut_chain(const Instance& inst, double v, std::size_t trials, std::uint64_t seed) {
    const double delta = delta_bound(inst);
    const double eps = inst.sigma - delta - v * inst.sigma;
    if (!(eps > 0.0)) throw Error("v leaves no strip to hit");
    ChainTrace trace;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::uint64_t index = 0;
        double count = 0.0;
        for (;;) {
            ++count;
            bool hit = true;
            for (int j = 0; j < inst.d; ++j) {
                const double x = uniform01(seed, trial, index++);
                const bool last = j + 1 == inst.d;
                hit = hit && (last ? (x >= inst.sigma - eps && x <= inst.sigma) : x <= inst.sigma);
            }
            if (hit) break;
        }
        push(trace, count);
    }
    return trace;
}

ChainTrace simulate_progress_chain(double u, double sigma, double v, std::size_t trials, std::uint64_t seed,
                                   int iterations) {
    expected_samples_progress(u, sigma, v);
    ChainTrace trace;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::uint64_t index = 0;
        double bound = u;
        for (int it = 0; it < iterations; ++it) {
            const double strip_hi = sigma + (bound - sigma) * v;
            double count = 0.0;
            double hit = bound;
            for (;;) {
                ++count;
                const double x = bound * uniform01(seed, trial, index++);
                if (x >= sigma && x <= strip_hi) {
                    hit = x;
                    break;
                }
            }
            push(trace, count);
            bound = hit;
            if (!(bound > sigma)) break;
        }
    }
    return trace;
}

}  // namespace symadex::theory
