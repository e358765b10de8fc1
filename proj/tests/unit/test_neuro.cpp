#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>

#include "diffmod/errors.hpp"
#include "diffmod/neuro.hpp"
#include "diffmod/rng.hpp"
#include "doctest.h"

using namespace diffmod;
using namespace diffmod::neuro;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

double squash_oracle(double x) {
    const Big z = Big(32) * Big(x);
    return static_cast<double>(Big(2) / (Big(1) + exp(-z)) - Big(1));
}

double falloff_oracle(double d) {
    if (d > 1.5) return 0.0;
    const Big sigma("0.5");
    const Big pi = boost::math::constants::pi<Big>();
    const Big bd(d);
    return static_cast<double>(exp(Big(-2)) / sqrt(Big(2) * sigma * sigma * pi) * exp(-bd * bd / (Big(2) * sigma * sigma)));
}

Genome chain() {
    Genome g = make_empty_genome(LearningMode::diffusion);
    g.connections = {{0, 17, 0.5}, {17, kSummerOutput, -0.25}};
    g.nodes[17].bias = 0.01;
    return g;
}

}  // namespace

TEST_CASE("squash matches a 50-digit evaluation") {
    CHECK(std::abs(squash(0.1) - squash_oracle(0.1)) <= 1e-15);
    CHECK(std::abs(squash(0.1) - 0.9216686) <= 1e-7);
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-2.0, 2.0) * (i % 2 ? 1.0 : 0.05);
        CHECK(std::abs(squash(x) - squash_oracle(x)) <= 1e-15);
    }
    CHECK(squash(0.0) == 0.0);
    CHECK(squash(10.0) == 1.0);
    CHECK(squash(-10.0) == -1.0);
}

TEST_CASE("squash is odd and monotone") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        CHECK(squash(-a) == doctest::Approx(-squash(a)).epsilon(1e-15));
        if (a < b) CHECK(squash(a) <= squash(b));
    }
}

TEST_CASE("gaussian falloff matches a 50-digit evaluation and is truncated") {
    for (double d : {0.0, 0.25, 0.5, 1.0, 1.2, 1.5}) {
        CHECK(std::abs(gaussian_falloff(d) - falloff_oracle(d)) <= 1e-16);
    }
    CHECK(gaussian_falloff(1.5000001) == 0.0);
    CHECK(gaussian_falloff(1.6) == 0.0);
    for (double d = 0.0; d < 1.5; d += 0.01) CHECK(gaussian_falloff(d) >= gaussian_falloff(d + 0.01));
}

TEST_CASE("layout and point sources") {
    const auto layout = default_layout();
    REQUIRE(layout.size() == kNodeCount);
    CHECK(layout[0] == Point{-3.0, 0.0});
    CHECK(layout[4] == Point{3.0, 0.0});
    CHECK(layout[17] == Point{-3.0, 2.0});
    CHECK(layout[24] == Point{3.0, 2.0});
    CHECK(layout[kSummerOutput] == Point{-3.0, 4.0});
    int id = 0;
    for (int l = 0; l < kLayerCount; ++l) {
        for (int k = 0; k < kLayerSizes[static_cast<std::size_t>(l)]; ++k, ++id) CHECK(layer_of(id) == l);
    }
    const auto sources = default_point_sources();
    REQUIRE(sources.size() == 2);
    CHECK(sources[0].position == Point{-3.0, 2.0});
    CHECK(sources[1].position == Point{3.0, 2.0});
}

TEST_CASE("validate rejects malformed genomes") {
    Genome g = chain();
    CHECK_NOTHROW(validate(g));
    Genome backwards = g;
    backwards.connections.push_back({20, 10, 0.1});
    CHECK_THROWS_AS(validate(backwards), StructuralError);
    Genome same_layer = g;
    same_layer.connections.push_back({17, 18, 0.1});
    CHECK_THROWS_AS(validate(same_layer), StructuralError);
    Genome duplicate = g;
    duplicate.connections.push_back({0, 17, 0.2});
    CHECK_THROWS_AS(validate(duplicate), StructuralError);
    Genome heavy = g;
    heavy.connections[0].weight = 1.5;
    CHECK_THROWS_AS(validate(heavy), StructuralError);
    Genome bad_bias = g;
    bad_bias.nodes[20].bias = -1.01;
    CHECK_THROWS_AS(validate(bad_bias), StructuralError);
    Genome missing = g;
    missing.nodes.pop_back();
    CHECK_THROWS_AS(validate(missing), StructuralError);
}

TEST_CASE("activation sums weighted sources then adds the bias") {
    Network net(chain());
    const std::array<double, 5> in{1.0, -1.0, 1.0, 0.0, 0.0};
    const auto& s = net.activate(in);
    CHECK(s.activation[0] == 1.0);
    CHECK(s.activation[17] == squash(0.5 * 1.0 + 0.01));
    CHECK(s.activation[kSummerOutput] == squash(-0.25 * s.activation[17]));
    CHECK(s.activation[kWinterOutput] == squash(0.0));
    CHECK(net.activate_output(kSummerOutput, in) == s.activation[kSummerOutput]);
}

TEST_CASE("diffusion plasticity follows eta * m * a_i * a_j with clamping") {
    Genome g = chain();
    Network net(g);
    const std::array<double, 5> in{1.0, -1.0, 1.0, 1.0, 0.0};
    net.activate(in);
    const std::array<double, 2> sources{1.0, 0.0};
    net.set_point_source_activations(sources);
    const auto& st = net.compute_modulation();
    CHECK(st.mod_signal[17] == squash(gaussian_falloff(0.0)));
    CHECK(st.mod_signal[kSummerOutput] == 0.0);
    const double a17 = st.activation[17];
    const double m17 = st.mod_signal[17];
    const auto deltas = net.apply_plasticity(0.002);
    CHECK(deltas[0] == doctest::Approx(0.002 * m17 * a17 * 1.0).epsilon(1e-14));
    CHECK(deltas[1] == 0.0);
    CHECK(net.weights()[0] == doctest::Approx(0.5 + deltas[0]).epsilon(1e-14));

    Genome near_limit = chain();
    near_limit.connections[0].weight = 0.9999;
    Network clamped(near_limit);
    clamped.activate(in);
    clamped.set_point_source_activations(sources);
    clamped.compute_modulation();
    clamped.apply_plasticity(0.5);
    CHECK(clamped.weights()[0] == 1.0);
}

TEST_CASE("standard mode: modulatory nodes gate learning and carry no activation") {
    Genome g = make_empty_genome(LearningMode::standard);
    g.nodes[5].modul = 0.1;  // modulatory
    g.nodes[5].bias = 1.0;
    g.connections = {{0, 17, 0.3}, {5, 17, 0.8}};
    CHECK(is_modulatory(g, 5));
    CHECK_FALSE(is_modulatory(g, 17));
    Network net(g);
    const std::array<double, 5> in{1.0, 1.0, 1.0, 0.0, 0.0};
    const auto& s = net.activate(in);
    CHECK(s.activation[17] == squash(0.3));
    const auto& m = net.compute_modulation();
    CHECK(m.mod_signal[17] == squash(0.8 * s.activation[5]));
    const auto deltas = net.apply_plasticity(0.002);
    CHECK(deltas[0] == doctest::Approx(0.002 * m.mod_signal[17] * s.activation[17]).epsilon(1e-14));
    CHECK(deltas[1] == doctest::Approx(0.002 * m.mod_signal[17] * s.activation[17] * s.activation[5]).epsilon(1e-14));

    Genome gated = g;
    gated.connections = {{0, 5, 0.3}, {5, 17, 0.8}};
    Network inert(gated);
    inert.activate(in);
    inert.compute_modulation();
    CHECK(inert.apply_plasticity(0.002)[0] == 0.0);  // modulatory targets never learn
}

TEST_CASE("diffusion learning is local to the point sources") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Genome g = make_empty_genome(LearningMode::diffusion);
        for (int s = 0; s < kNodeCount; ++s) {
            for (int t = s + 1; t < kNodeCount; ++t) {
                if (layer_of(s) < layer_of(t) && rng.bernoulli(0.3)) g.connections.push_back({s, t, rng.uniform(-1.0, 1.0)});
            }
        }
        for (std::size_t i = kInputCount; i < g.nodes.size(); ++i) g.nodes[i].bias = rng.uniform(-1.0, 1.0);
        Network net(g);
        std::array<double, 5> in{};
        for (int k = 0; k < 3; ++k) in[static_cast<std::size_t>(k)] = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const double fb = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const bool summer = rng.bernoulli(0.5);
        in[summer ? 3 : 4] = fb;
        net.activate(in);
        const std::array<double, 2> sources{summer ? fb : 0.0, summer ? 0.0 : fb};
        net.set_point_source_activations(sources);
        net.compute_modulation();
        const auto deltas = net.apply_plasticity(0.002);
        const Point source = summer ? Point{-3.0, 2.0} : Point{3.0, 2.0};
        for (std::size_t c = 0; c < deltas.size(); ++c) {
            if (deltas[c] != 0.0) CHECK(distance(g.nodes[static_cast<std::size_t>(g.connections[c].target)].position, source) <= 1.5);
        }
    }
}

TEST_CASE("to_genome carries learned weights") {
    Network net(chain());
    net.set_weight(0, -0.75);
    const Genome out = net.to_genome();
    CHECK(out.connections[0].weight == -0.75);
    CHECK(out.connections[1].weight == -0.25);
    net.set_weight(0, 2.0);
    CHECK(net.weights()[0] == 1.0);
}
