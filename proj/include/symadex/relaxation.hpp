#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "symadex/common.hpp"
#include "symadex/geometry.hpp"
#include "symadex/network.hpp"

namespace symadex {

enum class RelaxationKind { Triangle, DeepPoly };

std::string_view to_string(RelaxationKind kind);
RelaxationKind parse_relaxation_kind(std::string_view name);

enum class Phase { StableActive, StableInactive, Unstable };

Phase classify_phase(double lower, double upper);

/// Upper line z_r <= slope * z_a + intercept of an unstable ReLU with
/// pre-activation bounds [lower, upper] (lower < 0 < upper).
struct ReluUpperLine {
    double slope;
    double intercept;
};
ReluUpperLine relu_upper_line(double lower, double upper);

/// DeepPoly keeps one lower line z_r >= slope * z_a with slope in {0, 1},
/// picking the one that minimizes the area of the relaxation.
double deeppoly_lower_slope(double lower, double upper);

/// Affine forms a x + b for every neuron of a layer, one row per neuron.
struct LayerForms {
    Matrix coeffs;
    Vector constant;
};

/// Pre-activation bounds, phases and (for DeepPoly) input-level symbolic
/// bounds of every hidden neuron, valid over one input region.
struct RelaxationState {
    RelaxationKind kind = RelaxationKind::Triangle;
    std::vector<Vector> lower;  // per hidden layer
    std::vector<Vector> upper;
    std::vector<std::vector<Phase>> phase;
    std::vector<LayerForms> symbolic_lower;  // DeepPoly only
    std::vector<LayerForms> symbolic_upper;
    std::size_t bound_lps = 0;  // number of LPs solved while building

    std::size_t num_hidden_layers() const { return lower.size(); }
    std::size_t count(Phase p) const;
};

/// Witness of a relaxed verification LP: the input minimizing the margin
/// against one rival class and the value of every relaxation variable.
struct SolveRecord {
    RelaxationKind kind = RelaxationKind::Triangle;
    double objective = 0.0;
    Eigen::Index target = 0;
    Eigen::Index rival = 0;
    Vector input;
    std::vector<Vector> pre;   // every layer, output included
    std::vector<Vector> post;  // hidden layers
};

struct Verification {
    bool verified = false;
    double margin = 0.0;
    SolveRecord record;
};

/// Builds the relaxation of `net` over `region`.
///
/// Triangle: interval seeds per layer, then two LPs for every neuron that
/// is still unstable. With `previous` (built for a superset region) stable
/// neurons keep their phase and are not re-solved, and every bound is
/// intersected with the previous one.
/// DeepPoly: back-substitution to the input layer, each bound finished by a
/// small LP over the region.
RelaxationState build_relaxation(const Network& net, const Polyhedron& region, RelaxationKind kind,
                                 const RelaxationState* previous = nullptr);

RelaxationState deeppoly_bounds(const Network& net, const Polyhedron& region);

/// Relaxed margin min_{y != target} min_{x in region} (z_target - z_y).
/// Verified iff the margin is strictly positive.
Verification verify_region(const Network& net, const Polyhedron& region, Eigen::Index target,
                           const RelaxationState& state);
Verification verify_region(const Network& net, const Polyhedron& region, Eigen::Index target,
                           RelaxationKind kind);

/// Input of the worst abstract counterexample. Throws when the record has a
/// nonnegative objective.
Vector worst_abstract_counterexample(const SolveRecord& record);

/// Relaxed objective at a single input, using the neuron bounds of `state`
/// (that is, the relaxation built for the whole region) and minimizing over
/// every rival class.
double exact_objective_at(const Network& net, const RelaxationState& state, Eigen::Index target, const Vector& x);

struct ApproxEvaluation {
    double objective = 0.0;
    std::vector<Vector> pre;
    std::vector<Vector> post;
};

/// Feedforward assignment of the relaxation variables at x that mimics, for
/// every unstable neuron, where the witness in `record` sat between its lower
/// and upper line. The assignment is feasible, so its objective bounds the
/// exact relaxed objective at x from above.
ApproxEvaluation approx_abstract_eval(const Network& net, const RelaxationState& state, const SolveRecord& record,
                                      const Vector& x);

}  // namespace symadex
