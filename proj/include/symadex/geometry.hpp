#pragma once

#include <optional>

#include "symadex/common.hpp"
#include "symadex/lp.hpp"

namespace symadex {

/// Candidate region {x : W x <= c, lower <= x <= upper}.
///
/// The bounding box is always present; it carries the initial attack box and
/// the epsilon ball intersected with the unit cube.
struct Polyhedron {
    Matrix W;
    Vector c;
    Vector lower;
    Vector upper;

    static Polyhedron box(Vector lower, Vector upper);

    Eigen::Index dim() const { return lower.size(); }
    Eigen::Index num_cuts() const { return W.rows(); }

    /// Throws DimensionError when the invariants do not hold.
    void validate() const;
};

struct HalfSpace {
    Vector normal;
    double offset = 0.0;  // normal . x <= offset
};

bool contains(const Polyhedron& region, const Vector& x, double slack = tol::membership);

/// region ∩ {x : h.normal . x <= h.offset}; the row is appended.
Polyhedron intersect(const Polyhedron& region, const HalfSpace& h);

/// LP over the region's input variables with an optional objective.
lp::LinearProgram region_program(const Polyhedron& region);

/// Minimizes or maximizes coeffs . x + constant over the region.
/// Throws InfeasibleRegion when the region is empty.
lp::Solution optimize_linear(const Polyhedron& region, const Vector& coeffs, lp::Sense sense);

bool is_empty(const Polyhedron& region);

enum class BoxKind { Over, Under };

struct BoxApprox {
    Vector lower;
    Vector upper;
    BoxKind kind = BoxKind::Over;
    double log10_count = 0.0;
};

inline constexpr int kDefaultLevels = 256;

/// Per-coordinate extrema of the region (2 n LPs).
BoxApprox overapprox_box(const Polyhedron& region, int levels = kDefaultLevels);

/// Inscribed axis-aligned box maximizing the smallest half-width, with a
/// small volume-like secondary term breaking ties.
BoxApprox underapprox_box(const Polyhedron& region, int levels = kDefaultLevels);

/// True when the whole box satisfies every row of the region (worst-corner test).
bool box_inside(const Polyhedron& region, const Vector& lower, const Vector& upper, double slack = tol::membership);

/// sum_j log10(floor((upper_j - lower_j) (levels - 1)) + 1)
double log10_discrete_count(const Vector& lower, const Vector& upper, int levels = kDefaultLevels);
double log10_discrete_count(const BoxApprox& box, int levels = kDefaultLevels);

/// Number of discrete values each coordinate can take inside the box, in [1, levels].
Eigen::VectorXi sensitivity_map(const BoxApprox& box, int levels = kDefaultLevels);

}  // namespace symadex
