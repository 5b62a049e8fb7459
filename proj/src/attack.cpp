#include "symadex/attack.hpp"

#include <cmath>
#include <random>
#include <string>

namespace symadex {

void LabeledQuery::validate(const Network& net) const {
    if (x_o.size() != net.input_dim()) throw DimensionError("query input does not match the network");
    if (y_c < 0 || y_c >= net.output_dim() || y_t < 0 || y_t >= net.output_dim())
        throw DimensionError("query labels out of range");
    if (y_c == y_t) throw DimensionError("target label equals the correct label");
    if (!(epsilon > 0.0)) throw DimensionError("epsilon must be positive");
}

Polyhedron epsilon_ball(const LabeledQuery& q) {
    return Polyhedron::box((q.x_o.array() - q.epsilon).cwiseMax(0.0), (q.x_o.array() + q.epsilon).cwiseMin(1.0));
}

namespace {

Vector random_start(std::mt19937_64& rng, const Polyhedron& ball) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector x(ball.dim());
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = ball.lower(j) + unit(rng) * (ball.upper(j) - ball.lower(j));
    return x;
}

Vector clip(const Vector& x, const Polyhedron& ball) { return x.cwiseMax(ball.lower).cwiseMin(ball.upper); }

bool adversarial(const Network& net, const Vector& x, Eigen::Index target) {
    return classifies_as(evaluate(net, x), target);
}

std::optional<Vector> pgd(const Network& net, const LabeledQuery& q, const Polyhedron& ball, std::mt19937_64& rng,
                          int steps, double step) {
    Vector x = random_start(rng, ball);
    std::optional<Vector> last;
    for (int k = 0; k < steps; ++k) {
        const Vector g = margin_gradient(net, x, q.y_t);
        x = clip(x + step * g.array().sign().matrix(), ball);
        if (adversarial(net, x, q.y_t)) last = x;
    }
    return last;
}

std::optional<Vector> frank_wolfe(const Network& net, const LabeledQuery& q, const Polyhedron& ball,
                                  std::mt19937_64& rng, int steps) {
    Vector x = random_start(rng, ball);
    double value = margin(net, x, q.y_t);
    std::optional<Vector> last;
    if (value > 0.0) last = x;
    for (int k = 0; k < steps; ++k) {
        const Vector g = margin_gradient(net, x, q.y_t);
        Vector corner = x;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            if (g(j) > 0.0) corner(j) = ball.upper(j);
            else if (g(j) < 0.0) corner(j) = ball.lower(j);
        }
        const Vector dir = corner - x;
        if (dir.cwiseAbs().maxCoeff() == 0.0) break;
        double best = value;
        double best_gamma = 0.0;
        for (int i = 0; i <= 10; ++i) {
            const double gamma = std::ldexp(1.0, -i);
            const double v = margin(net, Vector(x + gamma * dir), q.y_t);
            if (v > best) {
                best = v;
                best_gamma = gamma;
            }
        }
        if (best_gamma == 0.0) break;
        x = clip(x + best_gamma * dir, ball);
        value = best;
        if (adversarial(net, x, q.y_t)) last = x;
    }
    return last;
}

}  // namespace

std::optional<Vector> attack(const Network& net, const LabeledQuery& q, const AttackConfig& cfg) {
    q.validate(net);
    if (cfg.steps < 1) throw Error("attack needs at least one step");
    if (cfg.step_size < 0.0) throw Error("attack step size must be positive");
    const Polyhedron ball = epsilon_ball(q);
    const double step = cfg.step_size > 0.0 ? cfg.step_size : q.epsilon / 10.0;
    std::mt19937_64 rng(cfg.seed);
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        std::optional<Vector> found = cfg.method == AttackMethod::PGD ? pgd(net, q, ball, rng, cfg.steps, step)
                                                                       : frank_wolfe(net, q, ball, rng, cfg.steps);
        // never trust the optimizer: replay membership and the label
        if (found && contains(ball, *found) && adversarial(net, *found, q.y_t)) return found;
    }
    return std::nullopt;
}

std::vector<Vector> collect_attacks(const Network& net, const LabeledQuery& q, std::size_t s_plus,
                                    std::uint64_t base_seed, AttackConfig base) {
    if (s_plus == 0) throw Error("s_plus must be at least 1");
    std::vector<Vector> points;
    const std::size_t pgd_count = (s_plus + 1) / 2;
    for (std::size_t i = 0; i < s_plus; ++i) {
        AttackConfig cfg = base;
        cfg.seed = base_seed + i;
        cfg.method = i < pgd_count ? AttackMethod::PGD : AttackMethod::FW;
        std::optional<Vector> p = attack(net, q, cfg);
        if (!p) continue;
        bool duplicate = false;
        for (const Vector& other : points)
            if ((other - *p).cwiseAbs().maxCoeff() <= 1e-9) {
                duplicate = true;
                break;
            }
        if (!duplicate) points.push_back(std::move(*p));
    }
    return points;
}

Polyhedron bounding_box(const std::vector<Vector>& points) {
    if (points.empty()) throw Error("cannot bound an empty dataset");
    Vector lo = points.front();
    Vector hi = points.front();
    for (const Vector& p : points) {
        if (p.size() != lo.size()) throw DimensionError("dataset points differ in dimension");
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return Polyhedron::box(std::move(lo), std::move(hi));
}

Polyhedron initial_region(const std::vector<Vector>& points, const LabeledQuery& q) {
    const Polyhedron box = bounding_box(points);
    const Polyhedron ball = epsilon_ball(q);
    const Vector lo = box.lower.cwiseMax(ball.lower);
    const Vector hi = box.upper.cwiseMin(ball.upper).cwiseMax(lo);
    return Polyhedron::box(lo, hi);
}

}  // namespace symadex
