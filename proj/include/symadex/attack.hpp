#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "symadex/geometry.hpp"
#include "symadex/network.hpp"

namespace symadex {

/// x_o with correct label y_c, adversarial target y_t and L-infinity radius epsilon.
struct LabeledQuery {
    Vector x_o;
    Eigen::Index y_c = 0;
    Eigen::Index y_t = 1;
    double epsilon = 0.0;

    void validate(const Network& net) const;
};

/// The epsilon ball around x_o clipped to the unit cube.
Polyhedron epsilon_ball(const LabeledQuery& q);

enum class AttackMethod { PGD, FW };

struct AttackConfig {
    std::uint64_t seed = 0;
    int steps = 40;
    double step_size = 0.0;  // 0 selects epsilon / 10
    int restarts = 1;
    AttackMethod method = AttackMethod::PGD;
};

/// A point of the clipped ball that the network assigns to y_t, if the
/// attack finds one. Deterministic given cfg.seed.
std::optional<Vector> attack(const Network& net, const LabeledQuery& q, const AttackConfig& cfg);

/// Up to s_plus distinct adversarial points: the first half from PGD, the
/// rest from Frank-Wolfe, attack i seeded with base_seed + i.
std::vector<Vector> collect_attacks(const Network& net, const LabeledQuery& q, std::size_t s_plus,
                                    std::uint64_t base_seed, AttackConfig base = {});

/// Coordinate-wise bounding box of the points.
Polyhedron bounding_box(const std::vector<Vector>& points);

/// Bounding box of the attacks intersected with the clipped epsilon ball.
Polyhedron initial_region(const std::vector<Vector>& points, const LabeledQuery& q);

}  // namespace symadex
