#include "symadex/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace symadex {

namespace {

double log1p_exp(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

struct Problem {
    Matrix Z;        // standardized samples, one per row
    Vector label;    // 1 for counterexamples
    Vector weight;   // normalized to sum 1
    double l2;

    // parameters: theta = (w, b), score = Z w - b
    double loss(const Vector& theta, Vector* grad) const {
        const Eigen::Index n = Z.cols();
        const Vector s = Z * theta.head(n) - Vector::Constant(Z.rows(), theta(n));
        double total = 0.0;
        Vector residual(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            total += weight(i) * (log1p_exp(s(i)) - label(i) * s(i));
            residual(i) = weight(i) * (sigmoid(s(i)) - label(i));
        }
        total += 0.5 * l2 * theta.head(n).squaredNorm();
        if (grad) {
            grad->resize(n + 1);
            grad->head(n) = Z.transpose() * residual + l2 * theta.head(n);
            (*grad)(n) = -residual.sum();
        }
        return total;
    }
};

}  // namespace

LinearSeparator fit_separator(const std::vector<Vector>& positives, const std::vector<Vector>& negatives,
                              const ClassifierConfig& cfg) {
    if (positives.empty() || negatives.empty()) throw Error("separator needs both adversarial points and counterexamples");
    const Eigen::Index n = positives.front().size();
    const auto rows = static_cast<Eigen::Index>(positives.size() + negatives.size());
    Matrix X(rows, n);
    Vector label(rows);
    Vector weight(rows);
    Eigen::Index r = 0;
    for (const Vector& p : positives) {
        if (p.size() != n) throw DimensionError("training points differ in dimension");
        X.row(r) = p.transpose();
        label(r) = 0.0;
        weight(r++) = cfg.positive_weight;
    }
    for (const Vector& p : negatives) {
        if (p.size() != n) throw DimensionError("training points differ in dimension");
        X.row(r) = p.transpose();
        label(r) = 1.0;
        weight(r++) = cfg.negative_weight;
    }
    weight /= weight.sum();

    const Vector mean = X.colwise().mean().transpose();
    Vector scale = ((X.rowwise() - mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    for (Eigen::Index j = 0; j < n; ++j)
        if (!(scale(j) > 1e-12)) scale(j) = 1.0;
    const Problem prob{(X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array(), label, weight,
                       cfg.l2};

    Vector theta = Vector::Zero(n + 1);
    Vector grad;
    double value = prob.loss(theta, &grad);
    double step = 1.0;
    for (int it = 0; it < cfg.max_iterations && grad.norm() > cfg.gradient_tolerance; ++it) {
        const double slope = grad.squaredNorm();
        bool moved = false;
        for (int k = 0; k < 60; ++k) {
            const Vector trial = theta - step * grad;
            const double v = prob.loss(trial, nullptr);
            if (v <= value - 1e-4 * step * slope) {
                theta = trial;
                value = prob.loss(theta, &grad);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        step = std::min(step * 2.0, 1e6);
    }
    effort::add(static_cast<std::uint64_t>(rows * n));

    LinearSeparator sep;
    sep.w = theta.head(n).cwiseQuotient(scale);
    sep.c = theta(n) + sep.w.dot(mean);
    const double norm = sep.w.norm();
    if (!(norm > 1e-12) || !std::isfinite(norm)) {
        // no usable direction: a cut that removes nothing
        sep.w = Vector::Unit(n, 0);
        sep.c = X.col(0).maxCoeff();
        return sep;
    }
    sep.w /= norm;
    sep.c /= norm;

    double pos_max = -std::numeric_limits<double>::infinity();
    double neg_min = std::numeric_limits<double>::infinity();
    for (const Vector& p : positives) pos_max = std::max(pos_max, sep.w.dot(p));
    for (const Vector& p : negatives) neg_min = std::min(neg_min, sep.w.dot(p));
    if (pos_max < neg_min && !(sep.c >= pos_max && sep.c < neg_min)) sep.c = 0.5 * (pos_max + neg_min);
    return sep;
}

}  // namespace symadex
