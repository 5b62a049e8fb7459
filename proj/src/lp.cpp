#include "symadex/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symadex::lp {

std::string_view to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

LinearProgram::LinearProgram(Eigen::Index num_vars)
    : objective_(Vector::Zero(num_vars)),
      lower_(Vector::Constant(num_vars, -kInfinity)),
      upper_(Vector::Constant(num_vars, kInfinity)) {
    if (num_vars < 1) throw Error("linear program needs at least one variable");
}

LinearProgram& LinearProgram::set_objective(Vector coeffs, Sense sense) {
    if (coeffs.size() != num_vars()) throw DimensionError("objective length does not match variable count");
    if (!coeffs.allFinite()) throw Error("objective has non-finite coefficients");
    objective_ = std::move(coeffs);
    sense_ = sense;
    return *this;
}

LinearProgram& LinearProgram::add_constraint(Vector coeffs, Relation relation, double rhs) {
    if (coeffs.size() != num_vars()) throw DimensionError("constraint length does not match variable count");
    if (!coeffs.allFinite() || !std::isfinite(rhs)) throw Error("constraint has non-finite coefficients");
    constraints_.push_back({std::move(coeffs), relation, rhs});
    return *this;
}

LinearProgram& LinearProgram::set_bounds(Eigen::Index var, double lower, double upper) {
    if (var < 0 || var >= num_vars()) throw DimensionError("bound index out of range");
    if (std::isnan(lower) || std::isnan(upper)) throw Error("NaN variable bound");
    lower_(var) = lower;
    upper_(var) = upper;
    return *this;
}

double LinearProgram::max_violation(const Vector& x) const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < num_vars(); ++j) {
        worst = std::max(worst, lower_(j) - x(j));
        worst = std::max(worst, x(j) - upper_(j));
    }
    for (const Constraint& con : constraints_) {
        const double lhs = con.coeffs.dot(x);
        switch (con.relation) {
            case Relation::LessEqual: worst = std::max(worst, lhs - con.rhs); break;
            case Relation::GreaterEqual: worst = std::max(worst, con.rhs - lhs); break;
            case Relation::Equal: worst = std::max(worst, std::abs(lhs - con.rhs)); break;
        }
    }
    return worst;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr std::size_t kDegenerateRunBeforeBland = 50;

// x_j = offset + pos_sign * y[pos] - y[neg]
struct VariableMap {
    double offset = 0.0;
    Eigen::Index pos = -1;
    double pos_sign = 1.0;
    Eigen::Index neg = -1;
};

struct StandardRow {
    Vector coeffs;  // over the y columns
    Relation relation;
    double rhs;
};

class Tableau {
public:
    Tableau(const std::vector<StandardRow>& rows, Eigen::Index num_structural)
        : num_structural_(num_structural) {
        const auto m = static_cast<Eigen::Index>(rows.size());
        Eigen::Index num_slack = 0;
        Eigen::Index num_art = 0;
        for (const StandardRow& row : rows) {
            if (row.relation != Relation::Equal) ++num_slack;
            if (row.relation != Relation::LessEqual) ++num_art;
        }
        first_art_ = num_structural_ + num_slack;
        num_cols_ = first_art_ + num_art;
        table_ = Matrix::Zero(m, num_cols_ + 1);
        basis_.assign(static_cast<std::size_t>(m), -1);

        Eigen::Index slack = num_structural_;
        Eigen::Index art = first_art_;
        for (Eigen::Index i = 0; i < m; ++i) {
            const StandardRow& row = rows[static_cast<std::size_t>(i)];
            table_.row(i).head(num_structural_) = row.coeffs.transpose();
            table_(i, num_cols_) = row.rhs;
            switch (row.relation) {
                case Relation::LessEqual:
                    table_(i, slack) = 1.0;
                    basis_[static_cast<std::size_t>(i)] = slack++;
                    break;
                case Relation::GreaterEqual:
                    table_(i, slack++) = -1.0;
                    table_(i, art) = 1.0;
                    basis_[static_cast<std::size_t>(i)] = art++;
                    break;
                case Relation::Equal:
                    table_(i, art) = 1.0;
                    basis_[static_cast<std::size_t>(i)] = art++;
                    break;
            }
        }
    }

    Eigen::Index rows() const { return table_.rows(); }
    bool has_artificials() const { return first_art_ < num_cols_; }

    // Minimizes costs . columns. Returns Optimal, Unbounded or IterationLimit.
    Status minimize(const Vector& costs, bool allow_artificial, std::size_t& pivots, std::size_t max_pivots) {
        reduced_ = Vector::Zero(num_cols_ + 1);
        reduced_.head(costs.size()) = costs;
        for (Eigen::Index i = 0; i < rows(); ++i) {
            const double cb = reduced_(basis_[static_cast<std::size_t>(i)]);
            if (cb != 0.0) reduced_ -= cb * table_.row(i).transpose();
        }
        const Eigen::Index entering_limit = allow_artificial ? num_cols_ : first_art_;
        bool bland = false;
        std::size_t degenerate_run = 0;
        while (true) {
            Eigen::Index enter = -1;
            double best = -tol::optimality;
            for (Eigen::Index j = 0; j < entering_limit; ++j) {
                if (reduced_(j) < best) {
                    enter = j;
                    if (bland) break;
                    best = reduced_(j);
                }
            }
            if (enter < 0) return Status::Optimal;

            Eigen::Index leave = -1;
            double best_ratio = 0.0;
            for (Eigen::Index i = 0; i < rows(); ++i) {
                const double a = table_(i, enter);
                if (a <= kPivotTol) continue;
                const double ratio = std::max(0.0, table_(i, num_cols_)) / a;
                if (leave < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio <= best_ratio + 1e-12 &&
                     basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return Status::Unbounded;
            if (pivots >= max_pivots) return Status::IterationLimit;

            degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
            if (degenerate_run >= kDegenerateRunBeforeBland) bland = true;
            pivot(leave, enter);
            ++pivots;
        }
    }

    double rhs(Eigen::Index i) const { return table_(i, num_cols_); }
    Eigen::Index basic(Eigen::Index i) const { return basis_[static_cast<std::size_t>(i)]; }
    bool is_artificial(Eigen::Index col) const { return col >= first_art_; }
    Eigen::Index first_artificial() const { return first_art_; }
    Eigen::Index num_cols() const { return num_cols_; }

    // Moves basic artificials (at level zero) out of the basis where possible.
    void evict_artificials(std::size_t& pivots) {
        for (Eigen::Index i = 0; i < rows(); ++i) {
            if (!is_artificial(basic(i))) continue;
            for (Eigen::Index j = 0; j < first_art_; ++j) {
                if (std::abs(table_(i, j)) > kPivotTol) {
                    pivot(i, j);
                    ++pivots;
                    break;
                }
            }
            // A row with no eligible column is redundant; its artificial stays
            // basic at zero and can never enter again.
        }
    }

    Vector structural_values() const {
        Vector y = Vector::Zero(num_structural_);
        for (Eigen::Index i = 0; i < rows(); ++i) {
            const Eigen::Index b = basic(i);
            if (b < num_structural_) y(b) = std::max(0.0, rhs(i));
        }
        return y;
    }

private:
    void pivot(Eigen::Index row, Eigen::Index col) {
        table_.row(row) /= table_(row, col);
        for (Eigen::Index i = 0; i < rows(); ++i) {
            if (i == row) continue;
            const double f = table_(i, col);
            if (f != 0.0) table_.row(i) -= f * table_.row(row);
        }
        const double f = reduced_.size() > 0 ? reduced_(col) : 0.0;
        if (f != 0.0) reduced_ -= f * table_.row(row).transpose();
        basis_[static_cast<std::size_t>(row)] = col;
        effort::add(static_cast<std::uint64_t>(table_.size()));
    }

    Eigen::Index num_structural_;
    Eigen::Index first_art_ = 0;
    Eigen::Index num_cols_ = 0;
    Matrix table_;
    Vector reduced_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

Solution solve(const LinearProgram& program, std::size_t max_pivots) {
    const Eigen::Index n = program.num_vars();
    Solution result;
    result.primal = Vector::Zero(n);

    // Map every original variable onto nonnegative columns.
    std::vector<VariableMap> maps(static_cast<std::size_t>(n));
    Eigen::Index ny = 0;
    std::vector<std::pair<Eigen::Index, double>> range_rows;  // y[col] <= width
    for (Eigen::Index j = 0; j < n; ++j) {
        const double lo = program.lower()(j);
        const double hi = program.upper()(j);
        if (lo > hi) return result;  // empty bound interval
        VariableMap& map = maps[static_cast<std::size_t>(j)];
        if (std::isfinite(lo)) {
            map.offset = lo;
            map.pos = ny++;
            if (std::isfinite(hi)) range_rows.emplace_back(map.pos, hi - lo);
        } else if (std::isfinite(hi)) {
            map.offset = hi;
            map.pos = ny++;
            map.pos_sign = -1.0;
        } else {
            map.pos = ny++;
            map.neg = ny++;
        }
    }

    auto to_columns = [&](const Vector& coeffs, double& constant) {
        Vector out = Vector::Zero(ny);
        constant = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const VariableMap& map = maps[static_cast<std::size_t>(j)];
            const double a = coeffs(j);
            if (a == 0.0) continue;
            constant += a * map.offset;
            out(map.pos) += a * map.pos_sign;
            if (map.neg >= 0) out(map.neg) -= a;
        }
        return out;
    };

    std::vector<StandardRow> rows;
    rows.reserve(program.constraints().size() + range_rows.size());
    auto push_row = [&](Vector coeffs, Relation rel, double rhs) {
        if (rhs < 0.0) {
            coeffs = -coeffs;
            rhs = -rhs;
            if (rel == Relation::LessEqual)
                rel = Relation::GreaterEqual;
            else if (rel == Relation::GreaterEqual)
                rel = Relation::LessEqual;
        }
        rows.push_back({std::move(coeffs), rel, rhs});
    };
    for (const Constraint& con : program.constraints()) {
        double constant = 0.0;
        Vector coeffs = to_columns(con.coeffs, constant);
        push_row(std::move(coeffs), con.relation, con.rhs - constant);
    }
    for (const auto& [col, width] : range_rows) {
        Vector coeffs = Vector::Zero(ny);
        coeffs(col) = 1.0;
        push_row(std::move(coeffs), Relation::LessEqual, width);
    }

    double objective_constant = 0.0;
    Vector costs = to_columns(program.objective(), objective_constant);
    if (program.sense() == Sense::Maximize) costs = -costs;

    if (rows.empty()) {
        // Only sign constraints on y: optimum at y = 0 unless some cost is negative.
        if ((costs.array() < -tol::optimality).any()) {
            result.status = Status::Unbounded;
            return result;
        }
    }

    Tableau tableau(rows, ny);
    std::size_t pivots = 0;

    if (tableau.has_artificials()) {
        Vector phase1 = Vector::Zero(tableau.num_cols());
        phase1.tail(tableau.num_cols() - tableau.first_artificial()).setOnes();
        const Status s = tableau.minimize(phase1, true, pivots, max_pivots);
        if (s == Status::IterationLimit) {
            result.status = s;
            result.pivots = pivots;
            return result;
        }
        double infeasibility = 0.0;
        double scale = 1.0;
        for (const StandardRow& row : rows) scale = std::max(scale, std::abs(row.rhs));
        for (Eigen::Index i = 0; i < tableau.rows(); ++i)
            if (tableau.is_artificial(tableau.basic(i))) infeasibility += std::max(0.0, tableau.rhs(i));
        if (infeasibility > tol::feasibility * scale) {
            result.status = Status::Infeasible;
            result.pivots = pivots;
            return result;
        }
        tableau.evict_artificials(pivots);
    }

    Vector phase2 = Vector::Zero(tableau.num_cols());
    phase2.head(ny) = costs;
    const Status s = tableau.minimize(phase2, false, pivots, max_pivots);
    result.pivots = pivots;
    if (s != Status::Optimal) {
        result.status = s;
        return result;
    }

    const Vector y = tableau.structural_values();
    for (Eigen::Index j = 0; j < n; ++j) {
        const VariableMap& map = maps[static_cast<std::size_t>(j)];
        double v = map.offset + map.pos_sign * y(map.pos);
        if (map.neg >= 0) v -= y(map.neg);
        result.primal(j) = std::clamp(v, program.lower()(j), program.upper()(j));
    }
    result.status = Status::Optimal;
    result.objective = program.objective().dot(result.primal);
    return result;
}

}  // namespace symadex::lp
