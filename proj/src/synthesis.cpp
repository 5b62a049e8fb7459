#include "symadex/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <random>

namespace symadex {

std::string_view to_string(Method m) { return m == Method::FW ? "FW" : "LP"; }

void SynthesisConfig::validate() const {
    if (s_plus == 0) throw Error("s_plus must be at least 1");
    if (t_max < 0) throw Error("t_max must be nonnegative");
    if (period < 1) throw Error("period must be at least 1");
    if (history == 0) throw Error("history must hold at least one batch");
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<Vector> inside(const std::vector<Vector>& points, const Polyhedron& region) {
    std::vector<Vector> out;
    for (const Vector& p : points)
        if (contains(region, p)) out.push_back(p);
    return out;
}

Verification verify_fresh(const Network& net, const Polyhedron& region, Eigen::Index y_t, RelaxationKind kind) {
    return verify_region(net, region, y_t, build_relaxation(net, region, kind));
}

}  // namespace

StepResult generate_region_step(const StepContext& ctx, Method method, HistorySet& history, std::uint64_t seed) {
    StepResult out{ctx.region, false, 0, SampleMode::Concrete};
    std::optional<Vector> x_star;
    std::optional<CounterexampleTest> test;
    if (method == Method::FW) {
        x_star = worst_concrete_counterexample(ctx.net, ctx.region, ctx.y_t, seed);
        if (x_star) test = CounterexampleTest::concrete(ctx.net, ctx.y_t);
    }
    if (!test) {
        // the LP witness also stands in when Frank-Wolfe finds no concrete counterexample
        if (ctx.verification.margin >= 0.0) return out;
        x_star = ctx.verification.record.input;
        test = CounterexampleTest::abstract(ctx.net, ctx.state, ctx.verification.record);
    }
    out.mode = test->mode();

    const FarPoint far = far_point(ctx.region, *x_star);
    CounterexampleBatch batch = gaussian_sample(ctx.region, *x_star, far.point, ctx.s_minus, *test, mix(seed, 1),
                                                ctx.sampler);
    out.negatives = batch.points.size();
    if (batch.points.empty() || ctx.positives.empty()) return out;
    history.update(std::move(batch));

    const std::vector<Vector> negatives = history.filtered(ctx.region);
    const LinearSeparator sep = fit_separator(ctx.positives, negatives, ctx.classifier);
    const bool keeps_some = std::any_of(ctx.positives.begin(), ctx.positives.end(),
                                        [&](const Vector& p) { return sep.keeps(p); });
    const bool removes_some =
        std::any_of(negatives.begin(), negatives.end(), [&](const Vector& p) { return !sep.keeps(p); });
    if (!keeps_some || !removes_some) return out;
    out.region = intersect(ctx.region, sep.half_space());
    out.progress = true;
    return out;
}

Method choose_method(int t, Method previous, int period, const StepContext& ctx, const HistorySet& history,
                     std::uint64_t seed) {
    if (t % period != 0) return previous;
    double score[2];
    for (Method m : {Method::FW, Method::LP}) {
        HistorySet scratch = history;
        const std::uint64_t start = effort::read();
        double gain = -std::numeric_limits<double>::infinity();
        try {
            const StepResult trial = generate_region_step(ctx, m, scratch, seed);
            if (trial.progress) {
                const RelaxationState s = build_relaxation(
                    ctx.net, trial.region, ctx.state.kind, ctx.state.kind == RelaxationKind::Triangle ? &ctx.state : nullptr);
                gain = verify_region(ctx.net, trial.region, ctx.y_t, s).margin - ctx.verification.margin;
            }
        } catch (const InfeasibleRegion&) {
        }
        const double spent = static_cast<double>(std::max<std::uint64_t>(1, effort::read() - start));
        score[m == Method::FW ? 0 : 1] = gain / spent;
    }
    return score[1] > score[0] ? Method::LP : Method::FW;
}

Polyhedron shrink(const Polyhedron& region, const Vector& x_c, double theta) {
    Polyhedron out = region;
    if (region.num_cuts() > 0) out.c = region.c - theta * (region.c - region.W * x_c);
    out.lower = region.lower + theta * (x_c - region.lower);
    out.upper = region.upper - theta * (region.upper - x_c);
    out.upper = out.upper.cwiseMax(out.lower);
    return out;
}

ShrinkResult shrink_region(const Network& net, const Polyhedron& region, const std::vector<Vector>& positives,
                           Eigen::Index y_t, RelaxationKind kind) {
    ShrinkResult result;
    result.region = region;
    if (positives.empty()) {
        result.failure = "no adversarial points to centre the shrink on";
        return result;
    }
    const Eigen::Index n = region.dim();
    Vector centre(n);
    std::vector<double> column(positives.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < positives.size(); ++i) column[i] = positives[i](j);
        std::sort(column.begin(), column.end());
        const std::size_t mid = column.size() / 2;
        centre(j) = column.size() % 2 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
    }
    if (!contains(region, centre)) {
        const Vector median = centre;
        double best = std::numeric_limits<double>::infinity();
        for (const Vector& p : positives) {
            const double d = (p - median).squaredNorm() + (contains(region, p) ? 0.0 : 1e300);
            if (d < best) {
                best = d;
                centre = p;
            }
        }
    }
    result.center = centre;
    if (!classifies_as(evaluate(net, centre), y_t)) {
        result.failure = "shrink centre is not adversarial";
        return result;
    }

    auto attempt = [&](double theta, Verification& v) {
        try {
            v = verify_fresh(net, shrink(region, centre, theta), y_t, kind);
            return v.verified;
        } catch (const InfeasibleRegion&) {
            return false;
        }
    };
    Verification best;
    if (!attempt(1.0, best)) {
        result.failure = "region does not verify even when shrunk to its centre";
        return result;
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int step = 0; step < 12; ++step) {
        const double mid = 0.5 * (lo + hi);
        Verification v;
        if (attempt(mid, v)) {
            hi = mid;
            best = std::move(v);
        } else {
            lo = mid;
        }
    }
    result.ok = true;
    result.theta = hi;
    result.region = shrink(region, centre, hi);
    result.verification = std::move(best);
    return result;
}

RegionReport synthesize(const Network& net, const LabeledQuery& q, const SynthesisConfig& cfg) {
    cfg.validate();
    q.validate(net);
    std::vector<Vector> attacks = collect_attacks(net, q, cfg.s_plus, cfg.seed, cfg.attack);
    if (attacks.empty()) throw NoAttacks("no adversarial examples found");
    return synthesize_from(net, q, std::move(attacks), cfg);
}

RegionReport synthesize_from(const Network& net, const LabeledQuery& q, std::vector<Vector> attacks,
                             const SynthesisConfig& cfg) {
    cfg.validate();
    q.validate(net);
    if (attacks.empty()) throw NoAttacks("no adversarial examples found");
    const auto clock_start = std::chrono::steady_clock::now();
    const std::uint64_t effort_start = effort::read();

    RegionReport report;
    report.attacks = std::move(attacks);
    Polyhedron region = initial_region(report.attacks, q);
    RelaxationState state = build_relaxation(net, region, cfg.kind);
    Verification v = verify_region(net, region, q.y_t, state);

    std::mt19937_64 rng(cfg.seed);
    Method method = rng() & 1 ? Method::LP : Method::FW;
    auto log = [&](const IterationLog& entry) {
        report.trace.push_back(entry);
        if (cfg.verbose)
            std::fprintf(stderr, "t=%d method=%s margin=%.6f negatives=%zu positives=%zu\n", entry.t,
                         std::string(to_string(entry.method)).c_str(), entry.margin, entry.negatives, entry.positives);
    };
    log({0, method, v.margin, 0, report.attacks.size()});

    HistorySet history(cfg.history);
    int stalled = 0;
    for (int t = 1; t <= cfg.t_max && !v.verified; ++t) {
        const std::vector<Vector> positives = inside(report.attacks, region);
        const StepContext ctx{net, q.y_t, region, state, v, positives, cfg.s_minus, cfg.sampler, cfg.classifier};
        const std::uint64_t seed = mix(cfg.seed, static_cast<std::uint64_t>(t));
        method = choose_method(t, method, cfg.period, ctx, history, seed);
        StepResult step = generate_region_step(ctx, method, history, seed);
        if (!step.progress) {
            log({t, method, v.margin, step.negatives, positives.size()});
            break;
        }
        region = std::move(step.region);
        ++report.cuts;
        state = build_relaxation(net, region, cfg.kind, cfg.kind == RelaxationKind::Triangle ? &state : nullptr);
        const double previous = v.margin;
        v = verify_region(net, region, q.y_t, state);
        log({t, method, v.margin, step.negatives, positives.size()});
        stalled = v.margin - previous < 1e-6 ? stalled + 1 : 0;
        if (stalled >= cfg.stall_limit) break;
    }

    if (!v.verified) {
        const ShrinkResult s = shrink_region(net, region, inside(report.attacks, region), q.y_t, cfg.kind);
        if (s.ok) {
            region = s.region;
            v = s.verification;
            report.shrunk = true;
            report.theta = s.theta;
        } else {
            report.failure = s.failure;
        }
        if (cfg.verbose)
            std::fprintf(stderr, "shrink %s theta=%.4f margin=%.6f\n", s.ok ? "verified" : "failed", s.theta,
                         s.ok ? v.margin : 0.0);
    }

    report.region = region;
    report.verified = v.verified;
    report.margin = v.margin;
    report.over = overapprox_box(region);
    report.under = underapprox_box(region);
    report.effort = effort::read() - effort_start;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return report;
}

}  // namespace symadex
