#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "symadex/common.hpp"

namespace symadex::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(Status status);

struct Constraint {
    Vector coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// Dense linear program. Variables are free unless bounds are set.
class LinearProgram {
public:
    explicit LinearProgram(Eigen::Index num_vars);

    Eigen::Index num_vars() const { return lower_.size(); }

    LinearProgram& set_objective(Vector coeffs, Sense sense);
    LinearProgram& add_constraint(Vector coeffs, Relation relation, double rhs);
    LinearProgram& set_bounds(Eigen::Index var, double lower, double upper);

    const Vector& objective() const { return objective_; }
    Sense sense() const { return sense_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

    /// Largest violation of any constraint or bound at x.
    double max_violation(const Vector& x) const;

private:
    Vector objective_;
    Sense sense_ = Sense::Minimize;
    std::vector<Constraint> constraints_;
    Vector lower_;
    Vector upper_;
};

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    Vector primal;
    std::size_t pivots = 0;

    bool optimal() const { return status == Status::Optimal; }
};

/// Two-phase dense tableau simplex.
///
/// Pivoting starts with Dantzig's rule and switches to Bland's rule for the
/// remainder of a phase after a run of degenerate pivots; all ties go to the
/// lowest variable index, so identical inputs give identical outputs.
/// Exceeding the pivot cap yields Status::IterationLimit, never a wrong answer.
Solution solve(const LinearProgram& program, std::size_t max_pivots = 1'000'000);

}  // namespace symadex::lp
