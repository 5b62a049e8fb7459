#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "symadex/io.hpp"
#include "symadex/network.hpp"

using namespace symadex;

TEST_CASE("reference network forward pass") {
    const Network net = oracle::reference_network();
    const Trace t = forward(net, Vector{{0.5, -0.5}});
    CHECK(t.logits()(0) == doctest::Approx(2.0));
    CHECK(t.logits()(1) == doctest::Approx(0.0));
    for (std::size_t i = 0; i + 1 < net.num_layers(); ++i)
        CHECK(t.post[i] == t.pre[i].cwiseMax(0.0));
}

TEST_CASE("zero first-layer pre-activations give zero ReLU outputs") {
    const Network net = oracle::reference_network();
    const Trace t = forward(net, Vector::Zero(2));
    CHECK(t.post[0].isZero(0.0));
}

TEST_CASE("forward agrees with a loop-based evaluator") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 20; ++k) {
        const Network net = oracle::random_network(rng, {2, 4, 2});
        for (int s = 0; s < 100; ++s) {
            const Vector x = oracle::uniform_point(rng, Vector::Constant(2, -2), Vector::Constant(2, 2));
            CHECK((evaluate(net, x) - oracle::naive_logits(net, x)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("margin gradient") {
    SUBCASE("linear net") {
        Layer l;
        l.weights = Matrix::Identity(2, 2);
        l.bias = Vector::Zero(2);
        l.activation = Activation::Identity;
        const Network net({l});
        const Vector g = margin_gradient(net, Vector{{1.0, 0.0}}, 0);
        CHECK(g(0) == 1.0);
        CHECK(g(1) == -1.0);
    }
    SUBCASE("finite differences on the reference network") {
        const Network net = oracle::reference_network();
        std::mt19937_64 rng(3);
        int checked = 0;
        while (checked < 50) {
            const Vector x = oracle::uniform_point(rng, Vector::Constant(2, -1), Vector::Constant(2, 1));
            const Trace t = forward(net, x);
            bool near_kink = false;
            for (std::size_t i = 0; i + 1 < net.num_layers(); ++i)
                near_kink |= (t.pre[i].cwiseAbs().array() < 1e-3).any();
            const Vector& z = t.logits();
            near_kink |= std::abs(z(0) - z(1)) < 1e-3;
            if (near_kink) continue;
            ++checked;
            const Vector g = margin_gradient(net, x, 1);
            for (Eigen::Index j = 0; j < 2; ++j) {
                const double h = 1e-5;
                Vector xp = x, xm = x;
                xp(j) += h;
                xm(j) -= h;
                const double fd = (margin(net, xp, 1) - margin(net, xm, 1)) / (2 * h);
                CHECK(std::abs(fd - g(j)) <= 1e-4);
            }
        }
    }
    SUBCASE("constant net") {
        Layer l;
        l.weights = Matrix::Zero(3, 2);
        l.bias = Vector{{1.0, 2.0, 3.0}};
        l.activation = Activation::Identity;
        CHECK(margin_gradient(Network({l}), Vector::Ones(2), 0).isZero(0.0));
    }
}

TEST_CASE("ties resolve to the lowest index") {
    const Vector z{{1.0, 3.0, 3.0}};
    CHECK(argmax(z) == 1);
    CHECK(strongest_rival(z, 0) == 1);
    CHECK_FALSE(classifies_as(Vector{{2.0, 2.0}}, 0));
}

TEST_CASE("dimension mismatch is rejected") {
    const Network net = oracle::reference_network();
    CHECK_THROWS_AS(forward(net, Vector::Zero(3)), DimensionError);
}

TEST_CASE("network files") {
    const Network net = load_network(std::string(SYMADEX_FIXTURES) + "/reference.net");
    CHECK(net.input_dim() == 2);
    CHECK(net.num_layers() == 3);
    for (const auto& layer : net.layers()) CHECK(layer.size() == 2);

    SUBCASE("round trip is bit exact") {
        std::mt19937_64 rng(11);
        const Network r = oracle::random_network(rng, {3, 5, 4, 2});
        const Network back = parse_network(format_network(r));
        for (std::size_t i = 0; i < r.num_layers(); ++i) {
            CHECK(back.layer(i).weights == r.layer(i).weights);
            CHECK(back.layer(i).bias == r.layer(i).bias);
        }
        CHECK(format_network(back) == format_network(r));
    }
    SUBCASE("short weight row names the layer") {
        const std::string bad = "relu-ffn v1 2 1\nlayer 2 identity\n1 2\n3\n0 0\n";
        try {
            parse_network(bad);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
            CHECK(std::string(e.what()).find("line 4") != std::string::npos);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_network("/nonexistent/net.txt"), Error);
    }
}
