#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "symadex/relaxation.hpp"

using namespace symadex;

namespace {

Polyhedron reference_box() { return Polyhedron::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)); }

// Witness values of the reference example, listed in the order g1..g12.
SolveRecord reference_record() {
    SolveRecord r;
    r.kind = RelaxationKind::Triangle;
    r.objective = -4.0;
    r.target = 1;
    r.rival = 0;
    r.input = Vector{{1.0, -1.0}};
    r.pre = {Vector{{0.0, 2.0}}, Vector{{3.0, -1.0}}, Vector{{4.5, 0.5}}};
    r.post = {Vector{{1.0, 2.0}}, Vector{{3.0, 0.5}}};
    return r;
}

double concrete_margin(const Network& net, const Vector& x, Eigen::Index target) { return margin(net, x, target); }

}  // namespace

TEST_CASE("phase and line formulas") {
    CHECK(classify_phase(0.0, 1.0) == Phase::StableActive);
    CHECK(classify_phase(-1.0, 0.0) == Phase::StableInactive);
    CHECK(classify_phase(-1.0, 2.0) == Phase::Unstable);
    const ReluUpperLine line = relu_upper_line(-2.0, 2.0);
    CHECK(line.slope == 0.5);
    CHECK(line.intercept == 1.0);
    CHECK(deeppoly_lower_slope(-1.0, 2.0) == 1.0);
    CHECK(deeppoly_lower_slope(-2.0, 1.0) == 0.0);
    CHECK(deeppoly_lower_slope(-1.0, 1.0) == 0.0);
}

TEST_CASE("reference network bounds") {
    const Network net = oracle::reference_network();
    const RelaxationState s = build_relaxation(net, reference_box(), RelaxationKind::Triangle);
    CHECK(s.lower[0] == Vector::Constant(2, -2.0));
    CHECK(s.upper[0] == Vector::Constant(2, 2.0));
    CHECK(s.phase[1][0] == Phase::StableActive);
    CHECK(s.upper[1](0) == doctest::Approx(4.0));
    CHECK(s.lower[1](1) == doctest::Approx(-2.0));
    CHECK(s.upper[1](1) == doctest::Approx(2.0));

    const RelaxationState d = deeppoly_bounds(net, reference_box());
    CHECK(d.lower[0] == Vector::Constant(2, -2.0));
    CHECK(d.upper[0] == Vector::Constant(2, 2.0));
}

TEST_CASE("reference network verification") {
    const Network net = oracle::reference_network();
    const Polyhedron box = reference_box();
    const RelaxationState s = build_relaxation(net, box, RelaxationKind::Triangle);
    const Verification v = verify_region(net, box, 1, s);
    CHECK_FALSE(v.verified);
    CHECK(v.margin == doctest::Approx(-4.0).epsilon(1e-9));
    const Vector x = worst_abstract_counterexample(v.record);
    CHECK(contains(box, x));
    CHECK(exact_objective_at(net, s, 1, x) <= -4.0 + 1e-6);
    CHECK(exact_objective_at(net, s, 1, Vector{{1.0, -1.0}}) == doctest::Approx(-4.0));
    CHECK(exact_objective_at(net, s, 1, Vector{{0.5, -0.5}}) == doctest::Approx(-3.5));
}

TEST_CASE("approximate evaluation on the reference network") {
    const Network net = oracle::reference_network();
    const RelaxationState s = build_relaxation(net, reference_box(), RelaxationKind::Triangle);
    const ApproxEvaluation a = approx_abstract_eval(net, s, reference_record(), Vector{{0.5, -0.5}});
    CHECK(a.pre[0] == Vector{{0.0, 1.0}});
    CHECK(a.post[0] == Vector{{1.0, 1.0}});
    CHECK(a.pre[1] == Vector{{2.0, 0.0}});
    CHECK(a.post[1] == Vector{{2.0, 1.0}});
    CHECK(a.pre[2] == Vector{{4.0, 1.0}});
    CHECK(a.objective == -3.0);
    // stable-active neurons copy their pre-activation
    CHECK(a.post[1](0) == a.pre[1](0));
}

TEST_CASE("linear network verifies with its exact margin") {
    Layer l;
    l.weights = Matrix{{1.0}, {1.0}};
    l.bias = Vector{{0.0, -1.0}};
    l.activation = Activation::Identity;
    const Network net({l});
    const Polyhedron box = Polyhedron::box(Vector::Zero(1), Vector::Ones(1));
    for (auto kind : {RelaxationKind::Triangle, RelaxationKind::DeepPoly}) {
        const Verification v = verify_region(net, box, 0, kind);
        CHECK(v.verified);
        CHECK(v.margin == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(worst_abstract_counterexample(verify_region(net, box, 0, RelaxationKind::Triangle).record), Error);
}

TEST_CASE("stable-active input neuron") {
    Layer hidden;
    hidden.weights = Matrix{{1.0}};
    hidden.bias = Vector::Zero(1);
    Layer out;
    out.weights = Matrix{{1.0}, {-1.0}};
    out.bias = Vector::Zero(2);
    out.activation = Activation::Identity;
    const Network net({hidden, out});
    const Polyhedron box = Polyhedron::box(Vector::Ones(1), Vector::Constant(1, 2.0));
    const RelaxationState s = build_relaxation(net, box, RelaxationKind::Triangle);
    CHECK(s.phase[0][0] == Phase::StableActive);
    CHECK(verify_region(net, box, 0, s).margin == doctest::Approx(2.0));
}

TEST_CASE("random networks: soundness, refinement and ordering") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 25; ++k) {
        const Network net = oracle::random_network(rng, {2, 4, 3, 3});
        const Polyhedron p = oracle::random_polytope(rng, Vector{{0.5, 0.5}}, 0.3, 3);
        const RelaxationState tri = build_relaxation(net, p, RelaxationKind::Triangle);
        const Verification vt = verify_region(net, p, 0, tri);
        const Verification vd = verify_region(net, p, 0, RelaxationKind::DeepPoly);
        CHECK(vd.margin <= vt.margin + 1e-6);
        CHECK(contains(p, vt.record.input, 1e-7));

        const double exact = oracle::exact_min_margin_2d(net, p, 0);
        CHECK(exact >= vt.margin - 1e-6);
        for (int i = 0; i < 100; ++i) {
            Vector x = oracle::uniform_point(rng, p.lower, p.upper);
            if (!contains(p, x)) continue;
            CHECK(concrete_margin(net, x, 0) >= vt.margin - 1e-6);
            CHECK(concrete_margin(net, x, 0) >= vd.margin - 1e-6);
        }

        // a sub-region: incremental bounds equal a fresh build and the margin cannot drop
        Vector normal{{std::cos(k * 0.7), std::sin(k * 0.7)}};
        const Polyhedron sub = intersect(p, {normal, normal.dot(Vector{{0.5, 0.5}})});
        const RelaxationState fresh = build_relaxation(net, sub, RelaxationKind::Triangle);
        const RelaxationState inc = build_relaxation(net, sub, RelaxationKind::Triangle, &tri);
        for (std::size_t i = 0; i < fresh.num_hidden_layers(); ++i)
            for (Eigen::Index j = 0; j < fresh.lower[i].size(); ++j) {
                if (tri.phase[i][std::size_t(j)] != Phase::Unstable) {
                    CHECK(inc.phase[i][std::size_t(j)] == tri.phase[i][std::size_t(j)]);
                    if (fresh.phase[i][std::size_t(j)] != Phase::Unstable) CHECK(fresh.phase[i][std::size_t(j)] == tri.phase[i][std::size_t(j)]);
                    continue;
                }
                CHECK(inc.lower[i](j) >= tri.lower[i](j) - 1e-9);
                CHECK(inc.upper[i](j) <= tri.upper[i](j) + 1e-9);
                if (inc.phase[i][std::size_t(j)] == Phase::Unstable && fresh.phase[i][std::size_t(j)] == Phase::Unstable &&
                    i == 0) {
                    CHECK(inc.lower[i](j) == doctest::Approx(fresh.lower[i](j)).epsilon(1e-6));
                    CHECK(inc.upper[i](j) == doctest::Approx(fresh.upper[i](j)).epsilon(1e-6));
                }
            }
        CHECK(verify_region(net, sub, 0, fresh).margin >= vt.margin - 1e-6);
        CHECK(verify_region(net, sub, 0, inc).margin >= vt.margin - 1e-6);
    }
}

TEST_CASE("DeepPoly over a box matches closed-form back-substitution") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 20; ++k) {
        const Network net = oracle::random_network(rng, {3, 5, 4, 2});
        const Vector lo = oracle::uniform_point(rng, Vector::Zero(3), Vector::Constant(3, 0.5));
        const Vector hi = lo + oracle::uniform_point(rng, Vector::Constant(3, 0.1), Vector::Constant(3, 0.5));
        const RelaxationState s = deeppoly_bounds(net, Polyhedron::box(lo, hi));
        std::vector<Vector> ol, oh;
        oracle::box_backsub_bounds(net, lo, hi, ol, oh);
        for (std::size_t i = 0; i < ol.size(); ++i) {
            CHECK((s.lower[i] - ol[i]).cwiseAbs().maxCoeff() <= 1e-9);
            CHECK((s.upper[i] - oh[i]).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }
}

TEST_CASE("approximate evaluation bounds the exact relaxed objective") {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 20; ++k) {
        const Network net = oracle::random_network(rng, {2, 5, 4, 3});
        const Polyhedron p = oracle::random_polytope(rng, Vector{{0.5, 0.5}}, 0.4, 2);
        for (auto kind : {RelaxationKind::Triangle, RelaxationKind::DeepPoly}) {
            const RelaxationState s = build_relaxation(net, p, kind);
            const Verification v = verify_region(net, p, 1, s);
            for (int i = 0; i < 10; ++i) {
                const Vector x = oracle::uniform_point(rng, p.lower, p.upper);
                if (!contains(p, x)) continue;
                const double approx = approx_abstract_eval(net, s, v.record, x).objective;
                CHECK(approx >= exact_objective_at(net, s, 1, x) - 1e-6);
            }
        }
    }
}

TEST_CASE("errors") {
    const Network net = oracle::reference_network();
    Polyhedron empty = intersect(reference_box(), {Vector{{1.0, 0.0}}, -5.0});
    CHECK_THROWS_AS(build_relaxation(net, empty, RelaxationKind::Triangle), InfeasibleRegion);
    CHECK_THROWS_AS(build_relaxation(net, empty, RelaxationKind::DeepPoly), InfeasibleRegion);
    CHECK_THROWS_AS(verify_region(net, reference_box(), 5, RelaxationKind::Triangle), DimensionError);
    CHECK(parse_relaxation_kind("deeppoly") == RelaxationKind::DeepPoly);
    CHECK_THROWS_AS(parse_relaxation_kind("zonotope"), Error);
}
