#include "symadex/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symadex {

Polyhedron Polyhedron::box(Vector lower, Vector upper) {
    Polyhedron p;
    const Eigen::Index n = lower.size();
    p.W = Matrix::Zero(0, n);
    p.c = Vector::Zero(0);
    p.lower = std::move(lower);
    p.upper = std::move(upper);
    p.validate();
    return p;
}

void Polyhedron::validate() const {
    if (upper.size() != lower.size()) throw DimensionError("box bounds differ in length");
    if (W.cols() != dim()) throw DimensionError("cut matrix has wrong column count");
    if (W.rows() != c.size()) throw DimensionError("cut matrix and offsets differ in length");
    if ((lower.array() > upper.array()).any()) throw DimensionError("box lower bound exceeds upper bound");
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        const double norm = W.row(i).norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) throw DimensionError("cut " + std::to_string(i) + " has a zero or non-finite normal");
    }
}

bool contains(const Polyhedron& region, const Vector& x, double slack) {
    if (x.size() != region.dim()) throw DimensionError("point dimension does not match region");
    if ((x.array() < region.lower.array() - slack).any()) return false;
    if ((x.array() > region.upper.array() + slack).any()) return false;
    if (region.num_cuts() == 0) return true;
    return ((region.W * x - region.c).array() <= slack).all();
}

Polyhedron intersect(const Polyhedron& region, const HalfSpace& h) {
    if (h.normal.size() != region.dim()) throw DimensionError("half-space dimension does not match region");
    if (!(h.normal.norm() > 0.0)) throw DimensionError("half-space has a zero normal");
    Polyhedron out = region;
    const Eigen::Index m = region.num_cuts();
    out.W.conservativeResize(m + 1, Eigen::NoChange);
    out.W.row(m) = h.normal.transpose();
    out.c.conservativeResize(m + 1);
    out.c(m) = h.offset;
    return out;
}

lp::LinearProgram region_program(const Polyhedron& region) {
    lp::LinearProgram program(region.dim());
    for (Eigen::Index j = 0; j < region.dim(); ++j) program.set_bounds(j, region.lower(j), region.upper(j));
    for (Eigen::Index i = 0; i < region.num_cuts(); ++i)
        program.add_constraint(region.W.row(i).transpose(), lp::Relation::LessEqual, region.c(i));
    return program;
}

lp::Solution optimize_linear(const Polyhedron& region, const Vector& coeffs, lp::Sense sense) {
    lp::LinearProgram program = region_program(region);
    program.set_objective(coeffs, sense);
    lp::Solution sol = lp::solve(program);
    if (sol.status == lp::Status::Infeasible) throw InfeasibleRegion("region is empty");
    if (!sol.optimal()) throw Error(std::string("region LP failed: ") + std::string(lp::to_string(sol.status)));
    return sol;
}

bool is_empty(const Polyhedron& region) {
    lp::LinearProgram program = region_program(region);
    return lp::solve(program).status == lp::Status::Infeasible;
}

BoxApprox overapprox_box(const Polyhedron& region, int levels) {
    const Eigen::Index n = region.dim();
    BoxApprox box;
    box.kind = BoxKind::Over;
    box.lower = region.lower;
    box.upper = region.upper;
    if (region.num_cuts() > 0) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Vector e = Vector::Unit(n, j);
            box.lower(j) = optimize_linear(region, e, lp::Sense::Minimize).objective;
            box.upper(j) = optimize_linear(region, e, lp::Sense::Maximize).objective;
        }
    } else if (is_empty(region)) {
        throw InfeasibleRegion("region is empty");
    }
    box.log10_count = log10_discrete_count(box.lower, box.upper, levels);
    return box;
}

BoxApprox underapprox_box(const Polyhedron& region, int levels) {
    const Eigen::Index n = region.dim();
    // variables: center (n), half-widths (n), min half-width t
    const Eigen::Index nv = 2 * n + 1;
    const Eigen::Index t = 2 * n;
    lp::LinearProgram program(nv);
    for (Eigen::Index j = 0; j < n; ++j) program.set_bounds(n + j, 0.0, lp::kInfinity);
    program.set_bounds(t, 0.0, lp::kInfinity);

    for (Eigen::Index i = 0; i < region.num_cuts(); ++i) {
        Vector row = Vector::Zero(nv);
        row.head(n) = region.W.row(i).transpose();
        row.segment(n, n) = region.W.row(i).cwiseAbs().transpose();
        program.add_constraint(std::move(row), lp::Relation::LessEqual, region.c(i));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        Vector up = Vector::Zero(nv);
        up(j) = 1.0;
        up(n + j) = 1.0;
        program.add_constraint(std::move(up), lp::Relation::LessEqual, region.upper(j));
        Vector down = Vector::Zero(nv);
        down(j) = -1.0;
        down(n + j) = 1.0;
        program.add_constraint(std::move(down), lp::Relation::LessEqual, -region.lower(j));
        Vector floor = Vector::Zero(nv);
        floor(n + j) = 1.0;
        floor(t) = -1.0;
        program.add_constraint(std::move(floor), lp::Relation::GreaterEqual, 0.0);
    }
    Vector objective = Vector::Zero(nv);
    objective.segment(n, n).setConstant(1e-6);
    objective(t) = 1.0;
    program.set_objective(std::move(objective), lp::Sense::Maximize);

    const lp::Solution sol = lp::solve(program);
    if (sol.status == lp::Status::Infeasible) throw InfeasibleRegion("region is empty");
    if (!sol.optimal()) throw Error(std::string("inscribed box LP failed: ") + std::string(lp::to_string(sol.status)));

    const Vector center = sol.primal.head(n);
    const Vector radius = sol.primal.segment(n, n).cwiseMax(0.0);
    BoxApprox box;
    box.kind = BoxKind::Under;
    box.lower = (center - radius).cwiseMax(region.lower);
    box.upper = (center + radius).cwiseMin(region.upper);
    box.upper = box.upper.cwiseMax(box.lower);
    box.log10_count = log10_discrete_count(box.lower, box.upper, levels);
    return box;
}

bool box_inside(const Polyhedron& region, const Vector& lower, const Vector& upper, double slack) {
    if ((lower.array() < region.lower.array() - slack).any()) return false;
    if ((upper.array() > region.upper.array() + slack).any()) return false;
    const Vector center = 0.5 * (lower + upper);
    const Vector radius = 0.5 * (upper - lower);
    for (Eigen::Index i = 0; i < region.num_cuts(); ++i) {
        const double worst = region.W.row(i).dot(center) + region.W.row(i).cwiseAbs().dot(radius);
        if (worst > region.c(i) + slack) return false;
    }
    return true;
}

namespace {
long discrete_values(double width, int levels) {
    const double cells = std::floor(std::max(0.0, width) * (levels - 1) + 1e-9);
    return static_cast<long>(std::min<double>(cells, levels - 1)) + 1;
}
}  // namespace

double log10_discrete_count(const Vector& lower, const Vector& upper, int levels) {
    if (lower.size() != upper.size()) throw DimensionError("box bounds differ in length");
    double total = 0.0;
    for (Eigen::Index j = 0; j < lower.size(); ++j)
        total += std::log10(static_cast<double>(discrete_values(upper(j) - lower(j), levels)));
    return total;
}

double log10_discrete_count(const BoxApprox& box, int levels) {
    return log10_discrete_count(box.lower, box.upper, levels);
}

Eigen::VectorXi sensitivity_map(const BoxApprox& box, int levels) {
    Eigen::VectorXi map(box.lower.size());
    for (Eigen::Index j = 0; j < map.size(); ++j)
        map(j) = static_cast<int>(discrete_values(box.upper(j) - box.lower(j), levels));
    return map;
}

}  // namespace symadex
