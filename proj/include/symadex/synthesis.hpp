#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symadex/attack.hpp"
#include "symadex/classifier.hpp"
#include "symadex/geometry.hpp"
#include "symadex/network.hpp"
#include "symadex/relaxation.hpp"
#include "symadex/sampling.hpp"

namespace symadex {

enum class Method { FW, LP };
std::string_view to_string(Method m);

struct SynthesisConfig {
    std::size_t s_plus = 400;
    std::size_t s_minus = 256;
    int t_max = 20;
    int period = 5;
    std::size_t history = 5;
    RelaxationKind kind = RelaxationKind::Triangle;
    std::uint64_t seed = 0;
    int stall_limit = 3;  // consecutive steps with margin gain below 1e-6
    AttackConfig attack;
    SamplerConfig sampler;
    ClassifierConfig classifier;
    bool verbose = true;  // per-iteration lines on stderr

    void validate() const;
};

/// Everything one cutting step needs to know about the current region.
struct StepContext {
    const Network& net;
    Eigen::Index y_t;
    const Polyhedron& region;
    const RelaxationState& state;
    const Verification& verification;
    const std::vector<Vector>& positives;  // attacks inside the region
    std::size_t s_minus;
    const SamplerConfig& sampler;
    const ClassifierConfig& classifier;
};

struct StepResult {
    Polyhedron region;
    bool progress = false;
    std::size_t negatives = 0;  // size of the fresh counterexample batch
    SampleMode mode = SampleMode::Concrete;
};

/// One cut: collect counterexamples with `method`, add them to the history,
/// fit a separator and intersect. Without usable counterexamples, or when the
/// cut would drop every adversarial point, the region is returned unchanged
/// with progress = false.
StepResult generate_region_step(const StepContext& ctx, Method method, HistorySet& history, std::uint64_t seed);

/// Keeps `previous` unless t is a multiple of the period; otherwise runs a
/// trial step with each method on a copy of the history and picks the one
/// with the larger margin gain per unit of work (ties pick FW).
Method choose_method(int t, Method previous, int period, const StepContext& ctx, const HistorySet& history,
                     std::uint64_t seed);

/// Facets moved toward x_c: c - theta (c - W x_c), and the box likewise.
Polyhedron shrink(const Polyhedron& region, const Vector& x_c, double theta);

struct ShrinkResult {
    bool ok = false;
    Polyhedron region;
    double theta = 1.0;
    Vector center;
    Verification verification;
    std::string failure;
};

/// Smallest verified shrink factor by binary search, centred at the
/// coordinate median of the adversarial points.
ShrinkResult shrink_region(const Network& net, const Polyhedron& region, const std::vector<Vector>& positives,
                           Eigen::Index y_t, RelaxationKind kind);

struct IterationLog {
    int t = 0;
    Method method = Method::FW;
    double margin = 0.0;
    std::size_t negatives = 0;
    std::size_t positives = 0;
};

struct RegionReport {
    Polyhedron region;
    bool verified = false;
    double margin = 0.0;
    std::size_t cuts = 0;
    bool shrunk = false;
    double theta = 0.0;
    std::vector<IterationLog> trace;
    std::vector<Vector> attacks;
    BoxApprox over;
    BoxApprox under;
    std::uint64_t effort = 0;
    double seconds = 0.0;
    std::string failure;  // empty on success
};

/// Raised when the attack phase finds no adversarial example.
class NoAttacks : public Error {
public:
    using Error::Error;
};

RegionReport synthesize(const Network& net, const LabeledQuery& q, const SynthesisConfig& cfg);

/// Same loop starting from a given set of adversarial points.
RegionReport synthesize_from(const Network& net, const LabeledQuery& q, std::vector<Vector> attacks,
                             const SynthesisConfig& cfg);

}  // namespace symadex
