#include <doctest.h>

#include "nfnoma/splitting.hpp"
#include "oracles.hpp"

using namespace nfnoma;

namespace {
const double kLambda1Hz = kSpeedOfLight;
}

TEST_SUITE_BEGIN("splitting");

TEST_CASE("split_digital: symmetric channels split evenly") {
    Rng rng(3);
    MatC w(4, 2);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 2; ++c) w(r, c) = oracles::cgauss(rng);
    VecC a(4);
    for (int i = 0; i < 4; ++i) a[i] = oracles::cgauss(rng);

    const DigitalSplit d = split_digital(w, a, a);
    const VecC u = w.adjoint() * a;
    CHECK(d.alpha_near == doctest::Approx(1.0 / (2.0 * u.norm())).epsilon(1e-12));
    CHECK(d.alpha_far == doctest::Approx(d.alpha_near).epsilon(1e-12));
    CHECK((d.v_near - u / (2.0 * u.norm())).norm() < 1e-12);
    CHECK((d.v_near - d.v_far).norm() < 1e-12);
}

TEST_CASE("split_digital: orthogonal equal-norm channels") {
    // W maps onto the first two coordinates so W^H a picks components directly.
    MatC w = MatC::Zero(4, 2);
    w(0, 0) = Complex(1.0, 0.0);
    w(1, 1) = Complex(1.0, 0.0);
    const double gain = 3.0;
    VecC an = VecC::Zero(4), af = VecC::Zero(4);
    an[0] = Complex(gain, 0.0);
    af[1] = Complex(0.0, gain);

    const DigitalSplit d = split_digital(w, an, af);
    CHECK(d.alpha_near == doctest::Approx(1.0 / (gain * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(d.alpha_far == doctest::Approx(d.alpha_near).epsilon(1e-12));
}

TEST_CASE("split_digital: invariants hold on random instances") {
    Rng rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        MatC w(6, 3);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 3; ++c) w(r, c) = oracles::cgauss(rng);
        VecC an(6), af(6);
        for (int i = 0; i < 6; ++i) {
            an[i] = oracles::cgauss(rng);
            af[i] = oracles::cgauss(rng);
        }
        const DigitalSplit d = split_digital(w, an, af);

        // Unit sum norm and the gain-balance ratio, both to machine accuracy.
        CHECK((d.v_near + d.v_far).norm() == doctest::Approx(1.0).epsilon(1e-12));
        const double lhs = d.alpha_near * (w.adjoint() * an).squaredNorm();
        const double rhs = d.alpha_far * (w.adjoint() * af).squaredNorm();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("split_digital: degenerate channel throws") {
    MatC w = MatC::Zero(4, 2);
    VecC a = VecC::Ones(4);
    CHECK_THROWS_AS(split_digital(w, a, a), std::invalid_argument);
}

TEST_CASE("sca lower bound: tangency, minorant, zero beam") {
    Rng rng(17);
    MatR wbar(4, 2), w(4, 2);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 2; ++c) wbar(r, c) = rng.uniform(0.0, 1.0);
    VecC a(4), v(2);
    for (int i = 0; i < 4; ++i) a[i] = oracles::cgauss(rng);
    for (int i = 0; i < 2; ++i) v[i] = oracles::cgauss(rng);

    auto gain = [&](const MatR& m) {
        const VecC mv = (m * v.real()).cast<Complex>() + Complex(0, 1) * (m * v.imag()).cast<Complex>();
        return std::norm(a.dot(mv));
    };

    CHECK(sca_lower_bound(wbar, wbar, a, v) == doctest::Approx(gain(wbar)).epsilon(1e-12));
    CHECK(sca_lower_bound(wbar, wbar, a, VecC::Zero(2)) == doctest::Approx(0.0));

    for (int rep = 0; rep < 1000; ++rep) {
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 2; ++c) w(r, c) = rng.uniform(0.0, 1.0);
        CHECK(sca_lower_bound(w, wbar, a, v) <= gain(w) + 1e-10 * std::max(1.0, gain(w)));
    }
}

TEST_CASE("subproblem: linear objective over the box lands on the clamp vertex") {
    // Both sub-channels identical makes the per-group min a single linear form.
    const auto g = ArrayGeometry::make(2, 2, kLambda1Hz);
    const UserPair grp{{0.3, 0.4, 5.0}, {0.3, 0.4, 5.0 + 1e-9}};
    SplitOptions opt;
    opt.pg_iters = 800;
    SplitSolver solver(g, {grp}, opt);

    SplitState st;
    st.w.amplitudes = MatR::Constant(4, 1, 0.5);
    const MatC w_eff = effective_weight_matrix(st.w);
    const DigitalSplit d = split_digital(w_eff, solver.near_response(0), solver.far_response(0));
    st.v_near = {d.v_near};
    st.v_far = {d.v_far};
    st.alpha_near = {d.alpha_near};
    st.alpha_far = {d.alpha_far};

    const MatR w = solver.solve_w_subproblem(st);

    // Gradient of the linearized gain at w_bar decides each entry.
    const VecC a = solver.near_response(0);
    const VecC wv = w_eff * d.v_near;
    const Complex sbar = a.dot(wv);
    const MatR grad = 2.0 * ((a * sbar) * d.v_near.adjoint()).real();
    for (int m = 0; m < 4; ++m) {
        const double expect = grad(m, 0) > 0.0 ? 1.0 : 0.0;
        CHECK(w(m, 0) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("subproblem: matches dense random search on a tiny instance") {
    const auto g = ArrayGeometry::make(2, 2, kLambda1Hz);
    const UserPair grp{{-0.3, 0.9, 2.0}, {0.4, 1.1, 3.5}};
    SplitOptions opt;
    opt.pg_iters = 800;
    SplitSolver solver(g, {grp}, opt);

    SplitState st;
    st.w.amplitudes = MatR::Constant(4, 1, 0.4);
    const MatC w_eff = effective_weight_matrix(st.w);
    const DigitalSplit d = split_digital(w_eff, solver.near_response(0), solver.far_response(0));
    st.v_near = {d.v_near};
    st.v_far = {d.v_far};
    st.alpha_near = {d.alpha_near};
    st.alpha_far = {d.alpha_far};

    const VecC an = solver.near_response(0), af = solver.far_response(0);
    const Complex sbar_n = an.dot(w_eff * d.v_near), sbar_f = af.dot(w_eff * d.v_far);
    auto minorant = [&](const MatR& m) {
        const double ln = sca_lower_bound(m, st.w.amplitudes, an, d.v_near);
        const double lf = sca_lower_bound(m, st.w.amplitudes, af, d.v_far);
        return std::min(ln, lf);
    };
    (void)sbar_n;
    (void)sbar_f;

    const MatR w = solver.solve_w_subproblem(st);
    const double mine = minorant(w);

    Rng rng(29);
    double best = -1e300;
    for (int i = 0; i < 1000000; ++i) {
        MatR cand(4, 1);
        for (int m = 0; m < 4; ++m) cand(m, 0) = rng.uniform(0.0, 1.0);
        best = std::max(best, minorant(cand));
    }
    CHECK(mine >= best - 1e-2 * std::max(1.0, std::abs(best)));
}

TEST_CASE("run_ao: symmetric pair converges to equal gains") {
    const auto g = ArrayGeometry::make(4, 4, kLambda1Hz);
    // Mirror images in azimuth at equal range; the aperture is y-symmetric.
    const UserPair grp{{-0.5, 0.8, 6.0}, {0.5, 0.8, 6.0}};
    SplitOptions opt;
    opt.max_ao = 15;
    SplitSolver solver(g, {grp}, opt);
    const SplitResult res = solver.run_ao();
    const auto [gn, gf] = res.gains[0];
    CHECK(std::abs(gn - gf) <= 0.01 * std::max(gn, gf));
}

TEST_CASE("run_ao: monotone traces and no-split baseline comparison") {
    const auto g = ArrayGeometry::make(4, 4, kLambda1Hz);
    const UserPair grp{{-0.4, 0.7, 4.0}, {0.6, 1.0, 7.0}};
    SplitOptions opt;
    opt.max_ao = 20;
    SplitSolver solver(g, {grp}, opt);
    const SplitResult res = solver.run_ao();

    for (size_t i = 1; i < res.ao_objective.size(); ++i) CHECK(res.ao_objective[i] >= res.ao_objective[i - 1]);
    for (const auto& trace : res.sca_objectives)
        for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);

    // Matched filter toward the NU alone, evaluated at the FU.
    const VecC an = solver.near_response(0), af = solver.far_response(0);
    const MatC w_eff = effective_weight_matrix(res.state.w);
    VecC v_mf = w_eff.adjoint() * an;
    v_mf /= v_mf.norm();
    const double baseline = std::norm(af.dot(w_eff * v_mf));
    const auto [gn, gf] = res.gains[0];
    CHECK(std::min(gn, gf) >= baseline - 1e-9);
}

TEST_CASE("run_ao: K = 2 respects the interference caps") {
    const auto g = ArrayGeometry::make(4, 4, kLambda1Hz);
    const std::vector<UserPair> groups{{{-0.8, 0.6, 4.0}, {-0.2, 1.2, 7.0}},
                                       {{0.7, 0.5, 5.0}, {0.9, 1.3, 8.0}}};
    SplitOptions opt;
    opt.max_ao = 8;
    opt.max_sca = 15;
    SplitSolver solver(g, groups, opt);
    const SplitResult res = solver.run_ao();

    for (size_t i = 1; i < res.ao_objective.size(); ++i) CHECK(res.ao_objective[i] >= res.ao_objective[i - 1]);
    CHECK(res.state.w.amplitudes.minCoeff() >= -1e-12);
    CHECK(res.state.w.amplitudes.maxCoeff() <= 1.0 + 1e-12);

    // Every cross-group leakage combination is capped after the SCA stage.
    const MatR& w = res.state.w.amplitudes;
    const MatC wc = w.cast<Complex>();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            if (i == j) continue;
            for (const VecC* obs : {&solver.near_response(i), &solver.far_response(i)}) {
                CHECK(std::norm(obs->dot(wc * res.state.v_near[j])) <= opt.interference_cap + 1e-6);
                CHECK(std::norm(obs->dot(wc * res.state.v_far[j])) <= opt.interference_cap + 1e-6);
            }
        }
}

TEST_SUITE_END();
