#include "symadex/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symadex {

std::string_view to_string(RelaxationKind kind) {
    return kind == RelaxationKind::Triangle ? "triangle" : "deeppoly";
}

RelaxationKind parse_relaxation_kind(std::string_view name) {
    if (name == "triangle") return RelaxationKind::Triangle;
    if (name == "deeppoly") return RelaxationKind::DeepPoly;
    throw Error("unknown relaxation '" + std::string(name) + "' (expected triangle or deeppoly)");
}

Phase classify_phase(double lower, double upper) {
    if (lower >= 0.0) return Phase::StableActive;
    if (upper <= 0.0) return Phase::StableInactive;
    return Phase::Unstable;
}

ReluUpperLine relu_upper_line(double lower, double upper) {
    const double width = upper - lower;
    return {upper / width, -lower * upper / width};
}

double deeppoly_lower_slope(double lower, double upper) { return upper > -lower ? 1.0 : 0.0; }

std::size_t RelaxationState::count(Phase p) const {
    std::size_t n = 0;
    for (const auto& layer : phase) n += static_cast<std::size_t>(std::count(layer.begin(), layer.end(), p));
    return n;
}

namespace {

double snap(double v) { return std::abs(v) <= tol::bound_snap ? 0.0 : v; }

void finalize_bounds(Vector& lower, Vector& upper, std::vector<Phase>& phase) {
    phase.resize(static_cast<std::size_t>(lower.size()));
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
        lower(j) = snap(lower(j));
        upper(j) = snap(upper(j));
        if (lower(j) > upper(j)) {
            // only reachable through rounding
            const double mid = 0.5 * (lower(j) + upper(j));
            lower(j) = upper(j) = mid;
        }
        phase[static_cast<std::size_t>(j)] = classify_phase(lower(j), upper(j));
    }
}

// Post-activation interval of a hidden layer.
void post_interval(const Vector& lower, const Vector& upper, Vector& post_lo, Vector& post_hi) {
    post_lo = lower.cwiseMax(0.0);
    post_hi = upper.cwiseMax(0.0);
}

void affine_interval(const Layer& layer, const Vector& in_lo, const Vector& in_hi, Vector& out_lo, Vector& out_hi) {
    const Matrix pos = layer.weights.cwiseMax(0.0);
    const Matrix neg = layer.weights.cwiseMin(0.0);
    out_lo = pos * in_lo + neg * in_hi + layer.bias;
    out_hi = pos * in_hi + neg * in_lo + layer.bias;
}

Vector padded(const Eigen::Ref<const Vector>& v, Eigen::Index size) {
    Vector out = Vector::Zero(size);
    out.head(v.size()) = v;
    return out;
}

/// LP encoding of the triangle relaxation.
///
/// Variables are the inputs followed by one output variable per unstable
/// ReLU. Affine and stable neurons are substituted as linear forms over
/// those variables, so the program only carries inequality rows.
class TriangleEncoder {
public:
    TriangleEncoder(const Network& net, const Polyhedron& region) : net_(net), region_(region) {
        num_vars_ = region.dim();
        post_.coeffs = Matrix::Identity(num_vars_, num_vars_);
        post_.constant = Vector::Zero(num_vars_);
    }

    Eigen::Index num_vars() const { return num_vars_; }

    LayerForms pre_forms(std::size_t layer) const {
        const Layer& l = net_.layer(layer);
        return {l.weights * post_.coeffs, l.weights * post_.constant + l.bias};
    }

    void add_hidden_layer(const LayerForms& pre, const Vector& lower, const Vector& upper,
                          const std::vector<Phase>& phase) {
        pre_history_.push_back(pre);
        const Eigen::Index n = pre.coeffs.rows();
        const auto unstable = static_cast<Eigen::Index>(std::count(phase.begin(), phase.end(), Phase::Unstable));
        const Eigen::Index total = num_vars_ + unstable;
        LayerForms post{Matrix::Zero(n, total), Vector::Zero(n)};
        Eigen::Index next = num_vars_;
        for (Eigen::Index j = 0; j < n; ++j) {
            switch (phase[static_cast<std::size_t>(j)]) {
                case Phase::StableActive:
                    post.coeffs.row(j).head(num_vars_) = pre.coeffs.row(j);
                    post.constant(j) = pre.constant(j);
                    break;
                case Phase::StableInactive: break;
                case Phase::Unstable: {
                    const Eigen::Index v = next++;
                    post.coeffs(j, v) = 1.0;
                    relu_vars_.push_back(v);
                    // z_a - z_r <= 0
                    Vector above = padded(pre.coeffs.row(j).transpose(), total);
                    above(v) = -1.0;
                    rows_.push_back({std::move(above), -pre.constant(j)});
                    // z_r - slope z_a <= slope c + intercept
                    const ReluUpperLine line = relu_upper_line(lower(j), upper(j));
                    Vector below = padded(-line.slope * pre.coeffs.row(j).transpose(), total);
                    below(v) = 1.0;
                    rows_.push_back({std::move(below), line.slope * pre.constant(j) + line.intercept});
                    break;
                }
            }
        }
        num_vars_ = total;
        post_ = std::move(post);
        post_history_.push_back(post_);
    }

    lp::LinearProgram program() const {
        lp::LinearProgram p(num_vars_);
        const Eigen::Index n0 = region_.dim();
        for (Eigen::Index j = 0; j < n0; ++j) p.set_bounds(j, region_.lower(j), region_.upper(j));
        for (Eigen::Index v : relu_vars_) p.set_bounds(v, 0.0, lp::kInfinity);
        for (Eigen::Index i = 0; i < region_.num_cuts(); ++i)
            p.add_constraint(padded(region_.W.row(i).transpose(), num_vars_), lp::Relation::LessEqual, region_.c(i));
        for (const auto& [coeffs, rhs] : rows_)
            p.add_constraint(padded(coeffs, num_vars_), lp::Relation::LessEqual, rhs);
        return p;
    }

    // Values of every relaxation variable at an LP solution.
    void recover(const Vector& primal, const LayerForms& output, SolveRecord& record) const {
        auto eval = [&](const LayerForms& f) -> Vector {
            return f.coeffs * primal.head(f.coeffs.cols()) + f.constant;
        };
        record.input = primal.head(region_.dim());
        record.pre.clear();
        record.post.clear();
        for (std::size_t i = 0; i < pre_history_.size(); ++i) {
            record.pre.push_back(eval(pre_history_[i]));
            record.post.push_back(eval(post_history_[i]));
        }
        record.pre.push_back(eval(output));
    }

private:
    struct Row {
        Vector coeffs;
        double rhs;
    };

    const Network& net_;
    const Polyhedron& region_;
    Eigen::Index num_vars_ = 0;
    LayerForms post_;
    std::vector<Row> rows_;
    std::vector<Eigen::Index> relu_vars_;
    std::vector<LayerForms> pre_history_;
    std::vector<LayerForms> post_history_;
};

double solve_bound(const lp::LinearProgram& base, const Vector& coeffs, double constant, lp::Sense sense) {
    lp::LinearProgram p = base;
    p.set_objective(coeffs, sense);
    const lp::Solution sol = lp::solve(p);
    if (sol.status == lp::Status::Infeasible) throw InfeasibleRegion("region is empty");
    if (!sol.optimal()) throw Error("bound LP failed: " + std::string(lp::to_string(sol.status)));
    return sol.objective + constant;
}

RelaxationState build_triangle(const Network& net, const Polyhedron& region, const RelaxationState* previous) {
    if (previous && (previous->kind != RelaxationKind::Triangle ||
                     previous->num_hidden_layers() + 1 != net.num_layers()))
        previous = nullptr;
    if (is_empty(region)) throw InfeasibleRegion("region is empty");

    RelaxationState state;
    state.kind = RelaxationKind::Triangle;
    TriangleEncoder encoder(net, region);
    Vector in_lo = region.lower;
    Vector in_hi = region.upper;

    for (std::size_t i = 0; i + 1 < net.num_layers(); ++i) {
        const LayerForms pre = encoder.pre_forms(i);
        Vector lo;
        Vector hi;
        affine_interval(net.layer(i), in_lo, in_hi, lo, hi);
        std::vector<bool> keep(static_cast<std::size_t>(lo.size()), false);
        if (previous) {
            lo = lo.cwiseMax(previous->lower[i]);
            hi = hi.cwiseMin(previous->upper[i]);
            for (std::size_t j = 0; j < keep.size(); ++j)
                keep[j] = previous->phase[i][j] != Phase::Unstable;
        }

        lp::LinearProgram base(1);
        bool have_base = false;
        for (Eigen::Index j = 0; j < lo.size(); ++j) {
            if (keep[static_cast<std::size_t>(j)]) continue;
            if (classify_phase(snap(lo(j)), snap(hi(j))) != Phase::Unstable) continue;
            if (!have_base) {
                base = encoder.program();
                have_base = true;
            }
            const Vector row = pre.coeffs.row(j).transpose();
            lo(j) = std::max(lo(j), solve_bound(base, row, pre.constant(j), lp::Sense::Minimize));
            hi(j) = std::min(hi(j), solve_bound(base, row, pre.constant(j), lp::Sense::Maximize));
            state.bound_lps += 2;
        }

        std::vector<Phase> phase;
        finalize_bounds(lo, hi, phase);
        if (previous) {
            for (std::size_t j = 0; j < keep.size(); ++j)
                if (keep[j]) phase[j] = previous->phase[i][j];
        }
        encoder.add_hidden_layer(pre, lo, hi, phase);
        post_interval(lo, hi, in_lo, in_hi);
        for (std::size_t j = 0; j < phase.size(); ++j)
            if (phase[j] == Phase::StableInactive) in_lo(static_cast<Eigen::Index>(j)) = in_hi(static_cast<Eigen::Index>(j)) = 0.0;
        state.lower.push_back(std::move(lo));
        state.upper.push_back(std::move(hi));
        state.phase.push_back(std::move(phase));
    }
    return state;
}

struct NeuronLine {
    double slope;
    double intercept;
};

// Lower/upper relational line of a hidden neuron, in terms of its pre-activation.
NeuronLine neuron_line(const RelaxationState& state, std::size_t layer, Eigen::Index j, bool upper) {
    switch (state.phase[layer][static_cast<std::size_t>(j)]) {
        case Phase::StableActive: return {1.0, 0.0};
        case Phase::StableInactive: return {0.0, 0.0};
        case Phase::Unstable: break;
    }
    const double l = state.lower[layer](j);
    const double u = state.upper[layer](j);
    if (upper) {
        const ReluUpperLine line = relu_upper_line(l, u);
        return {line.slope, line.intercept};
    }
    return {deeppoly_lower_slope(l, u), 0.0};
}

/// Back-substitutes forms over the pre-activations of `layer` down to the
/// input. In lower mode the result bounds the forms from below. When
/// `use_upper` is given it receives, per hidden neuron, whether row 0 took
/// the neuron's upper line.
LayerForms backsubstitute(const Network& net, const RelaxationState& state, std::size_t layer, Matrix coeffs,
                          Vector constant, bool lower_mode, std::vector<std::vector<bool>>* use_upper) {
    if (use_upper) {
        use_upper->assign(state.num_hidden_layers(), {});
        for (std::size_t h = 0; h < state.num_hidden_layers(); ++h)
            (*use_upper)[h].assign(static_cast<std::size_t>(state.lower[h].size()), false);
    }
    for (std::size_t k = layer + 1; k-- > 0;) {
        const Layer& l = net.layer(k);
        constant += coeffs * l.bias;
        coeffs = coeffs * l.weights;
        if (k == 0) break;
        const std::size_t h = k - 1;
        for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
            const NeuronLine lo = neuron_line(state, h, j, false);
            const NeuronLine hi = neuron_line(state, h, j, true);
            for (Eigen::Index r = 0; r < coeffs.rows(); ++r) {
                const double a = coeffs(r, j);
                const bool take_upper = lower_mode ? a < 0.0 : a > 0.0;
                const NeuronLine& line = take_upper ? hi : lo;
                constant(r) += a * line.intercept;
                coeffs(r, j) = a * line.slope;
                if (use_upper && r == 0) (*use_upper)[h][static_cast<std::size_t>(j)] = take_upper;
            }
        }
        effort::add(static_cast<std::uint64_t>(coeffs.size()) * static_cast<std::uint64_t>(l.weights.rows()));
    }
    return {std::move(coeffs), std::move(constant)};
}

void check_target(const Network& net, Eigen::Index target) {
    if (target < 0 || target >= net.output_dim()) throw DimensionError("target label out of range");
    if (net.output_dim() < 2) throw DimensionError("network needs at least two classes");
}

Verification verify_triangle(const Network& net, const Polyhedron& region, Eigen::Index target,
                             const RelaxationState& state) {
    TriangleEncoder encoder(net, region);
    for (std::size_t i = 0; i < state.num_hidden_layers(); ++i)
        encoder.add_hidden_layer(encoder.pre_forms(i), state.lower[i], state.upper[i], state.phase[i]);
    const LayerForms out = encoder.pre_forms(net.num_layers() - 1);
    const lp::LinearProgram base = encoder.program();

    Verification result;
    bool first = true;
    for (Eigen::Index y = 0; y < net.output_dim(); ++y) {
        if (y == target) continue;
        lp::LinearProgram p = base;
        p.set_objective((out.coeffs.row(target) - out.coeffs.row(y)).transpose(), lp::Sense::Minimize);
        const lp::Solution sol = lp::solve(p);
        if (sol.status == lp::Status::Infeasible) throw InfeasibleRegion("region is empty");
        if (!sol.optimal()) throw Error("verification LP failed: " + std::string(lp::to_string(sol.status)));
        const double value = sol.objective + out.constant(target) - out.constant(y);
        if (first || value < result.margin) {
            first = false;
            result.margin = value;
            result.record.kind = RelaxationKind::Triangle;
            result.record.objective = value;
            result.record.target = target;
            result.record.rival = y;
            encoder.recover(sol.primal, out, result.record);
        }
    }
    result.verified = result.margin > 0.0;
    return result;
}

// Forward pass through the DeepPoly relaxation taking the recorded lines.
void deeppoly_forward(const Network& net, const RelaxationState& state, const std::vector<std::vector<bool>>& use_upper,
                      const Vector& x, SolveRecord& record) {
    record.input = x;
    record.pre.clear();
    record.post.clear();
    Vector current = x;
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const Layer& l = net.layer(i);
        Vector pre = l.weights * current + l.bias;
        record.pre.push_back(pre);
        if (i + 1 == net.num_layers()) break;
        Vector post(pre.size());
        for (Eigen::Index j = 0; j < pre.size(); ++j) {
            const NeuronLine line = neuron_line(state, i, j, use_upper[i][static_cast<std::size_t>(j)]);
            post(j) = line.slope * pre(j) + line.intercept;
        }
        record.post.push_back(post);
        current = std::move(post);
    }
}

LayerForms objective_form(const Network& net, const RelaxationState& state, Eigen::Index target, Eigen::Index y,
                          std::vector<std::vector<bool>>* use_upper) {
    Matrix coeffs = Matrix::Zero(1, net.output_dim());
    coeffs(0, target) = 1.0;
    coeffs(0, y) = -1.0;
    return backsubstitute(net, state, net.num_layers() - 1, std::move(coeffs), Vector::Zero(1), true, use_upper);
}

Verification verify_deeppoly(const Network& net, const Polyhedron& region, Eigen::Index target,
                             const RelaxationState& state) {
    Verification result;
    bool first = true;
    for (Eigen::Index y = 0; y < net.output_dim(); ++y) {
        if (y == target) continue;
        std::vector<std::vector<bool>> use_upper;
        const LayerForms form = objective_form(net, state, target, y, &use_upper);
        const lp::Solution sol = optimize_linear(region, form.coeffs.row(0).transpose(), lp::Sense::Minimize);
        const double value = sol.objective + form.constant(0);
        if (first || value < result.margin) {
            first = false;
            result.margin = value;
            result.record.kind = RelaxationKind::DeepPoly;
            result.record.objective = value;
            result.record.target = target;
            result.record.rival = y;
            deeppoly_forward(net, state, use_upper, sol.primal, result.record);
        }
    }
    result.verified = result.margin > 0.0;
    return result;
}

}  // namespace

RelaxationState deeppoly_bounds(const Network& net, const Polyhedron& region) {
    if (is_empty(region)) throw InfeasibleRegion("region is empty");
    RelaxationState state;
    state.kind = RelaxationKind::DeepPoly;
    for (std::size_t i = 0; i + 1 < net.num_layers(); ++i) {
        const Eigen::Index n = net.layer(i).size();
        LayerForms lower_form = backsubstitute(net, state, i, Matrix::Identity(n, n), Vector::Zero(n), true, nullptr);
        LayerForms upper_form = backsubstitute(net, state, i, Matrix::Identity(n, n), Vector::Zero(n), false, nullptr);
        Vector lo(n);
        Vector hi(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            lo(j) = optimize_linear(region, lower_form.coeffs.row(j).transpose(), lp::Sense::Minimize).objective +
                    lower_form.constant(j);
            hi(j) = optimize_linear(region, upper_form.coeffs.row(j).transpose(), lp::Sense::Maximize).objective +
                    upper_form.constant(j);
            state.bound_lps += 2;
        }
        std::vector<Phase> phase;
        finalize_bounds(lo, hi, phase);
        state.lower.push_back(std::move(lo));
        state.upper.push_back(std::move(hi));
        state.phase.push_back(std::move(phase));
        state.symbolic_lower.push_back(std::move(lower_form));
        state.symbolic_upper.push_back(std::move(upper_form));
    }
    return state;
}

RelaxationState build_relaxation(const Network& net, const Polyhedron& region, RelaxationKind kind,
                                 const RelaxationState* previous) {
    if (region.dim() != net.input_dim()) throw DimensionError("region dimension does not match network input");
    region.validate();
    if (kind == RelaxationKind::DeepPoly) return deeppoly_bounds(net, region);
    return build_triangle(net, region, previous);
}

Verification verify_region(const Network& net, const Polyhedron& region, Eigen::Index target,
                           const RelaxationState& state) {
    check_target(net, target);
    if (state.num_hidden_layers() + 1 != net.num_layers())
        throw DimensionError("relaxation state does not match the network depth");
    return state.kind == RelaxationKind::Triangle ? verify_triangle(net, region, target, state)
                                                  : verify_deeppoly(net, region, target, state);
}

Verification verify_region(const Network& net, const Polyhedron& region, Eigen::Index target, RelaxationKind kind) {
    check_target(net, target);
    const RelaxationState state = build_relaxation(net, region, kind);
    return verify_region(net, region, target, state);
}

Vector worst_abstract_counterexample(const SolveRecord& record) {
    if (record.objective >= 0.0)
        throw Error("record has a nonnegative objective; there is no abstract counterexample");
    return record.input;
}

double exact_objective_at(const Network& net, const RelaxationState& state, Eigen::Index target, const Vector& x) {
    check_target(net, target);
    if (x.size() != net.input_dim()) throw DimensionError("point dimension does not match network input");
    if (state.kind == RelaxationKind::DeepPoly) {
        double best = lp::kInfinity;
        for (Eigen::Index y = 0; y < net.output_dim(); ++y) {
            if (y == target) continue;
            const LayerForms form = objective_form(net, state, target, y, nullptr);
            best = std::min(best, form.coeffs.row(0).dot(x) + form.constant(0));
        }
        return best;
    }
    const Polyhedron point = Polyhedron::box(x, x);
    return verify_triangle(net, point, target, state).margin;
}

ApproxEvaluation approx_abstract_eval(const Network& net, const RelaxationState& state, const SolveRecord& record,
                                      const Vector& x) {
    if (x.size() != net.input_dim()) throw DimensionError("point dimension does not match network input");
    if (record.post.size() != state.num_hidden_layers() || record.pre.size() != net.num_layers())
        throw DimensionError("solve record does not match the relaxation");
    const bool triangle = state.kind == RelaxationKind::Triangle;
    ApproxEvaluation out;
    Vector current = x;
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const Layer& l = net.layer(i);
        Vector pre = l.weights * current + l.bias;
        out.pre.push_back(pre);
        if (i + 1 == net.num_layers()) break;
        Vector post(pre.size());
        for (Eigen::Index j = 0; j < pre.size(); ++j) {
            switch (state.phase[i][static_cast<std::size_t>(j)]) {
                case Phase::StableActive: post(j) = pre(j); continue;
                case Phase::StableInactive: post(j) = 0.0; continue;
                case Phase::Unstable: break;
            }
            const double lo = state.lower[i](j);
            const double hi = state.upper[i](j);
            const ReluUpperLine line = relu_upper_line(lo, hi);
            const double lower_slope = deeppoly_lower_slope(lo, hi);
            auto lower_at = [&](double a) { return triangle ? std::max(0.0, a) : lower_slope * a; };

            const double star_a = record.pre[i](j);
            const double star_r = record.post[i](j);
            const double d_lower = std::max(0.0, star_r - lower_at(star_a));
            const double d_upper = std::max(0.0, line.slope * star_a + line.intercept - star_r);

            const double lb = lower_at(pre(j));
            const double ub = std::max(lb, line.slope * pre(j) + line.intercept);
            const double total = d_lower + d_upper;
            post(j) = total > 1e-12 ? lb * (d_upper / total) + ub * (d_lower / total) : lb;
        }
        out.post.push_back(post);
        current = std::move(post);
    }
    const Vector& logits = out.pre.back();
    out.objective = logits(record.target) - logits(record.rival);
    return out;
}

}  // namespace symadex
