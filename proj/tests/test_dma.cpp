#include <doctest.h>

#include "nfnoma/dma.hpp"
#include "oracles.hpp"

using namespace nfnoma;

TEST_SUITE_BEGIN("dma");

TEST_CASE("reference wave trivial cases") {
    const auto g = ArrayGeometry::make(3, 3, 28e9);
    FeedLayout layout = FeedLayout::bottom_row(g, 1);

    // Feed coincident with an element.
    layout.feed_positions[0] = element_position(g, 0, 0);
    CHECK(std::abs(reference_wave(layout, g, 0, 0, 0) - Complex(1.0, 0.0)) < 1e-14);

    // Zero propagation vector.
    layout.propagation_vector.setZero();
    CHECK(std::abs(reference_wave(layout, g, 0, 2, 1) - Complex(1.0, 0.0)) < 1e-14);

    // Full-wavelength displacement along the propagation direction.
    layout.propagation_vector = Eigen::Vector3d(0.0, 2.0 * kPi / g.wavelength_m, 0.0);
    layout.feed_positions[0] = element_position(g, 1, 1) - Eigen::Vector3d(0.0, g.wavelength_m, 0.0);
    const Complex w = reference_wave(layout, g, 0, 1, 1);
    CHECK(w.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.imag() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("objective wave trivial cases") {
    const auto g = ArrayGeometry::make(3, 3, 28e9);
    const SphericalLocation target{0.1, 0.2, 5.0};
    CHECK(std::abs(objective_wave(g, 1, 1, target) - Complex(1.0, 0.0)) < 1e-14);

    // Element half a wavelength along +z, target along +z (elevation 0).
    const auto gz = ArrayGeometry::make(1, 3, 28e9, kSpeedOfLight / 28e9 / 2.0);
    const SphericalLocation up{0.0, 0.0, 4.0};
    const Complex w = objective_wave(gz, 0, 2, up);
    CHECK(w.real() == doctest::Approx(-1.0).epsilon(1e-12));

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const SphericalLocation t{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(0.5, 30.0)};
        CHECK(std::abs(std::abs(objective_wave(g, 2, 0, t)) - 1.0) < 1e-13);
    }
}

TEST_CASE("holographic amplitude factor stays in [0, 1] with exact endpoints") {
    const auto g = ArrayGeometry::make(1, 3, 28e9, kSpeedOfLight / 28e9 / 2.0);
    FeedLayout layout = FeedLayout::bottom_row(g, 1);
    layout.propagation_vector.setZero(); // reference wave = 1 everywhere

    // Central element: objective wave is 1 -> perfectly constructive.
    const SphericalLocation any{0.4, 0.7, 3.0};
    CHECK(holographic_amplitude_factor(layout, g, 0, 0, 1, any) == doctest::Approx(1.0));

    // Element half a wavelength toward the target direction -> destructive.
    const SphericalLocation up{0.0, 0.0, 4.0};
    CHECK(holographic_amplitude_factor(layout, g, 0, 0, 2, up) == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(11);
    const auto gg = ArrayGeometry::make(4, 4, 28e9);
    FeedLayout lay = FeedLayout::bottom_row(gg, 2);
    for (int i = 0; i < 200; ++i) {
        const SphericalLocation t{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(0.5, 30.0)};
        const int v = static_cast<int>(rng.uniform(0.0, 4.0 - 1e-9));
        const int h = static_cast<int>(rng.uniform(0.0, 4.0 - 1e-9));
        const int k = static_cast<int>(rng.uniform(0.0, 2.0 - 1e-9));
        const double f = holographic_amplitude_factor(lay, gg, k, v, h, t);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        // Full entry modulus equals the amplitude factor.
        CHECK(std::abs(holographic_amplitude(lay, gg, k, v, h, t)) == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("effective weight matrix") {
    DmaWeights w;
    w.amplitudes = MatR::Identity(3, 2).cwiseAbs();
    const MatC plain = effective_weight_matrix(w);
    CHECK(plain.imag().norm() == 0.0);
    CHECK((plain.real() - w.amplitudes).norm() == 0.0);

    Rng rng(5);
    MatC phase(3, 2);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) phase(r, c) = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
    w.amplitudes = MatR::Ones(3, 2);
    w.waveguide_phase = phase;
    CHECK((effective_weight_matrix(w) - phase).norm() < 1e-14);

    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) w.amplitudes(r, c) = rng.uniform(0.0, 1.0);
    const MatC eff = effective_weight_matrix(w);
    CHECK((eff.cwiseAbs() - w.amplitudes).norm() < 1e-13);
}

TEST_CASE("holographic weights are box feasible") {
    const auto g = ArrayGeometry::make(6, 6, 28e9);
    const FeedLayout layout = FeedLayout::bottom_row(g, 2);
    const DmaWeights w = holographic_weights(
        g, layout, {{SphericalLocation{0.3, 0.1, 8.0}}, {SphericalLocation{-0.4, 0.6, 12.0}, {0.2, 0.2, 6.0}}});
    CHECK(w.amplitudes.rows() == 36);
    CHECK(w.amplitudes.cols() == 2);
    CHECK(w.amplitudes.minCoeff() >= 0.0);
    CHECK(w.amplitudes.maxCoeff() <= 1.0);
}

TEST_SUITE_END();
