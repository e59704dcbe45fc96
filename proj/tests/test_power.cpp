#include <doctest.h>

#include <numeric>

#include "nfnoma/power.hpp"
#include "oracles.hpp"

using namespace nfnoma;

namespace {

GroupGains random_gains(Rng& rng, double qos = 1.0) {
    GroupGains g;
    g.g_n = rng.uniform(0.5, 4.0);
    g.g_f = rng.uniform(0.05, 0.5);
    g.qos_n = qos;
    g.qos_f = qos;
    g.noise = 0.1;
    return g;
}

double nu_rate(const GroupGains& g, double p1) { return std::log2(1.0 + p1 * g.g_n / g.noise); }
double fu_rate(const GroupGains& g, double p1, double p2) {
    return std::log2(1.0 + p2 * g.g_f / (p1 * g.g_f + g.noise));
}

}  // namespace

TEST_SUITE_BEGIN("power");

TEST_CASE("qos_min_powers: zero targets, symmetric closed form, exact SNR reproduction") {
    GroupGains g{1.0, 1.0, 0.0, 0.0, 0.25};
    const QosMinPowers zero = qos_min_powers(g);
    CHECK(zero.p1 == 0.0);
    CHECK(zero.p2 == 0.0);
    CHECK(zero.total == 0.0);

    // Equal gains and targets: P_min = (gamma sigma^2 / g) (2 + gamma).
    g = GroupGains{2.0, 2.0, 1.0, 1.0, 0.5};
    const double gamma = qos_snr(1.0);
    const QosMinPowers sym = qos_min_powers(g);
    CHECK(sym.total == doctest::Approx(gamma * g.noise / 2.0 * (2.0 + gamma)).epsilon(1e-12));

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const GroupGains gg = random_gains(rng, rng.uniform(0.1, 3.0));
        const QosMinPowers mp = qos_min_powers(gg);
        const double snr_n = mp.p1 * gg.g_n / gg.noise;
        const double sinr_f = mp.p2 * gg.g_f / (mp.p1 * gg.g_f + gg.noise);
        CHECK(snr_n == doctest::Approx(qos_snr(gg.qos_n)).epsilon(1e-12));
        CHECK(sinr_f == doctest::Approx(qos_snr(gg.qos_f)).epsilon(1e-12));
    }
}

TEST_CASE("group_power_bounds") {
    Rng rng(7);
    const GroupGains g1 = random_gains(rng);
    CHECK(group_power_bounds({g1}, 10.0)[0].hi == doctest::Approx(10.0));

    GroupGains sym{1.0, 1.0, 0.0, 0.0, 1.0};
    sym.qos_f = 0.0;
    // Craft two identical groups with P_min = 0.1 each.
    GroupGains crafted{1.0, 1.0, 0.0, 0.0, 1.0};
    crafted.qos_n = std::log2(1.0 + 0.1); // P1_min = 0.1, P2_min = 0
    const auto bounds = group_power_bounds({crafted, crafted}, 1.0);
    CHECK(bounds[0].lo == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(bounds[0].hi == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(bounds[1].hi == doctest::Approx(0.9).epsilon(1e-12));

    GroupGains hungry = crafted;
    hungry.qos_n = 4.0;
    CHECK_THROWS_AS(group_power_bounds({hungry, hungry}, 0.1), QosInfeasibleError);
    try {
        group_power_bounds({hungry, hungry}, 0.1);
    } catch (const QosInfeasibleError& e) {
        CHECK(e.deficit > 0.0);
    }
}

TEST_CASE("intra_group_split: closed form and exactness") {
    GroupGains g{1.0, 1.0, 0.0, 0.0, 1.0};
    SUBCASE("zero FU target gives everything to the NU") {
        auto [p1, p2] = intra_group_split(g, 3.0);
        CHECK(p2 == 0.0);
        CHECK(p1 == doctest::Approx(3.0));
    }
    SUBCASE("worked example") {
        g.qos_f = 1.0; // gamma_f = 1
        auto [p1, p2] = intra_group_split(g, 3.0);
        CHECK(p2 == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(p1 == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("FU rate equals its target exactly") {
        Rng rng(11);
        for (int i = 0; i < 50; ++i) {
            const GroupGains gg = random_gains(rng, rng.uniform(0.2, 2.0));
            const double pmin = qos_min_powers(gg).total;
            const double pg = pmin + rng.uniform(0.0, 5.0);
            auto [p1, p2] = intra_group_split(gg, pg);
            CHECK(p1 + p2 == doctest::Approx(pg).epsilon(1e-12));
            CHECK(fu_rate(gg, p1, p2) == doctest::Approx(gg.qos_f).epsilon(1e-12));
            CHECK(p1 >= qos_min_powers(gg).p1 * (1.0 - 1e-9));
        }
    }
    SUBCASE("below the QoS minimum throws") {
        g.qos_f = 2.0;
        CHECK_THROWS_AS(intra_group_split(g, 0.5 * qos_min_powers(g).total), QosInfeasibleError);
    }
}

TEST_CASE("inter_group_waterfill: degenerate and symmetric cases") {
    Rng rng(13);
    const GroupGains solo = random_gains(rng);
    const auto b1 = group_power_bounds({solo}, 5.0);
    const auto p1 = inter_group_waterfill({solo}, b1, 5.0);
    CHECK(p1[0] == doctest::Approx(5.0).epsilon(1e-6));

    const GroupGains twin = random_gains(rng);
    const auto b2 = group_power_bounds({twin, twin}, 6.0);
    const auto p2 = inter_group_waterfill({twin, twin}, b2, 6.0);
    CHECK(p2[0] == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(p2[1] == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("inter_group_waterfill: classic two-channel water-filling") {
    // gamma_qos = 0 turns the transformed problem into plain water-filling.
    const double sigma = 1.0;
    GroupGains a{1.0, 1.0, 0.0, 0.0, sigma}, b{4.0, 4.0, 0.0, 0.0, sigma};
    const double p_max = 2.0;
    const auto bounds = group_power_bounds({a, b}, p_max);
    const auto p = inter_group_waterfill({a, b}, bounds, p_max);
    CHECK(p[0] + p[1] == doctest::Approx(p_max).epsilon(1e-6));

    // Interior optimum: water level nu with p_i = nu - sigma^2 / g_i.
    const double level = (p_max + sigma / 1.0 + sigma / 4.0) / 2.0;
    CHECK(p[0] == doctest::Approx(level - 1.0).epsilon(1e-5));
    CHECK(p[1] == doctest::Approx(level - 0.25).epsilon(1e-5));

    // Equal marginal rates at the optimum (KKT stationarity).
    const double m0 = a.g_n / (sigma + p[0] * a.g_n);
    const double m1 = b.g_n / (sigma + p[1] * b.g_n);
    CHECK(m0 == doctest::Approx(m1).epsilon(1e-5));
}

TEST_CASE("allocate: conservation, oracle match, degenerate NOMA") {
    Rng rng(17);
    SUBCASE("sum of powers equals the budget") {
        for (int i = 0; i < 10; ++i) {
            const std::vector<GroupGains> gains{random_gains(rng), random_gains(rng)};
            const double p_max = 8.0;
            const PowerAllocation alloc = allocate(gains, p_max);
            const double total = std::accumulate(alloc.p_group.begin(), alloc.p_group.end(), 0.0);
            CHECK(total == doctest::Approx(p_max).epsilon(1e-6));
            for (int k = 0; k < 2; ++k)
                CHECK(alloc.p1[k] + alloc.p2[k] == doctest::Approx(alloc.p_group[k]).epsilon(1e-12));
        }
    }
    SUBCASE("matches the refined grid oracle") {
        for (int i = 0; i < 5; ++i) {
            const std::vector<GroupGains> gains{random_gains(rng), random_gains(rng)};
            const double p_max = 6.0;
            const PowerAllocation alloc = allocate(gains, p_max);
            double mine = 0.0;
            for (int k = 0; k < 2; ++k)
                mine += nu_rate(gains[k], alloc.p1[k]) + fu_rate(gains[k], alloc.p1[k], alloc.p2[k]);
            const double oracle = oracles::noma_rate_grid_search(gains, p_max);
            CHECK(mine == doctest::Approx(oracle).epsilon(1e-4));
        }
    }
    SUBCASE("zero QoS reduces to pure water-filling") {
        std::vector<GroupGains> gains{random_gains(rng, 0.0), random_gains(rng, 0.0)};
        const PowerAllocation alloc = allocate(gains, 4.0);
        CHECK(alloc.p2[0] == 0.0);
        CHECK(alloc.p2[1] == 0.0);
    }
    SUBCASE("sic ordering flag") {
        GroupGains inverted{0.2, 0.9, 0.5, 0.5, 0.1}; // g_n < g_f
        const PowerAllocation alloc = allocate({inverted}, 5.0);
        CHECK_FALSE(alloc.sic_ordering_ok);
    }
}

TEST_CASE("allocate: sum rate is monotone in the budget") {
    Rng rng(23);
    const std::vector<GroupGains> gains{random_gains(rng), random_gains(rng)};
    double last = -1.0;
    for (double p_max : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const PowerAllocation alloc = allocate(gains, p_max);
        double rate = 0.0;
        for (int k = 0; k < 2; ++k)
            rate += nu_rate(gains[k], alloc.p1[k]) + fu_rate(gains[k], alloc.p1[k], alloc.p2[k]);
        CHECK(rate >= last - 1e-9);
        last = rate;
    }
}

TEST_CASE("oma allocators: budgets and QoS floors") {
    Rng rng(29);
    const std::vector<GroupGains> gains{random_gains(rng), random_gains(rng)};
    const double p_max = 10.0;

    const OmaAllocation fd = fdma_allocate(gains, p_max);
    double total = 0.0;
    for (int k = 0; k < 2; ++k) {
        total += fd.p_nu[k] + fd.p_fu[k];
        CHECK(0.5 * std::log2(1.0 + 2.0 * fd.p_nu[k] * gains[k].g_n / gains[k].noise) >=
              gains[k].qos_n - 1e-9);
        CHECK(0.5 * std::log2(1.0 + 2.0 * fd.p_fu[k] * gains[k].g_f / gains[k].noise) >=
              gains[k].qos_f - 1e-9);
    }
    CHECK(total == doctest::Approx(p_max).epsilon(1e-6));

    const std::vector<double> td = tdma_allocate(gains, p_max);
    CHECK(td[0] + td[1] == doctest::Approx(p_max).epsilon(1e-6));
    for (int k = 0; k < 2; ++k) {
        CHECK(0.5 * std::log2(1.0 + td[k] * gains[k].g_n / gains[k].noise) >= gains[k].qos_n - 1e-9);
        CHECK(0.5 * std::log2(1.0 + td[k] * gains[k].g_f / gains[k].noise) >= gains[k].qos_f - 1e-9);
    }

    GroupGains starved{0.01, 0.01, 3.0, 3.0, 1.0};
    CHECK_THROWS_AS(fdma_allocate({starved, starved}, 0.1), QosInfeasibleError);
    CHECK_THROWS_AS(tdma_allocate({starved, starved}, 0.1), QosInfeasibleError);
}

TEST_SUITE_END();
