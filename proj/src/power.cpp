#include "nfnoma/power.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace nfnoma {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void check_gains(const GroupGains& g) {
    if (g.g_n <= 0.0 || g.g_f <= 0.0 || g.noise <= 0.0 || g.qos_n < 0.0 || g.qos_f < 0.0)
        throw std::invalid_argument("GroupGains: gains and noise must be positive, QoS non-negative");
}

// Bisection on the water level: total(mu) is non-increasing; finds mu with
// |total(mu) - budget| <= tol, auto-expanding the bracket a few times.
double bisect_water_level(const std::function<double(double)>& total, double budget, double mu_lo, double mu_hi,
                          double tol) {
    int expansions = 0;
    while (total(mu_lo) < budget && expansions++ < 10) mu_lo /= 16.0;
    expansions = 0;
    while (total(mu_hi) > budget && expansions++ < 10) mu_hi *= 16.0;
    if (total(mu_lo) < budget || total(mu_hi) > budget)
        throw std::runtime_error("water-filling: multiplier bracket failed after 10 expansions");
    double mu = 0.5 * (mu_lo + mu_hi);
    for (int it = 0; it < 200; ++it) {
        mu = 0.5 * (mu_lo + mu_hi);
        const double t = total(mu);
        if (std::abs(t - budget) <= tol) return mu;
        if (t > budget)
            mu_lo = mu;
        else
            mu_hi = mu;
    }
    return mu;
}

}  // namespace

QosMinPowers qos_min_powers(const GroupGains& g) {
    check_gains(g);
    QosMinPowers out;
    const double gamma_n = qos_snr(g.qos_n), gamma_f = qos_snr(g.qos_f);
    out.p1 = gamma_n * g.noise / g.g_n;
    out.p2 = gamma_f * g.noise / g.g_f + gamma_f * out.p1;
    out.total = out.p1 + out.p2;
    return out;
}

std::vector<PowerBounds> group_power_bounds(const std::vector<GroupGains>& gains, double p_max) {
    const int k = static_cast<int>(gains.size());
    std::vector<double> pmin(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        pmin[i] = qos_min_powers(gains[i]).total;
        sum += pmin[i];
    }
    if (sum > p_max)
        throw QosInfeasibleError("QoS minima exceed the power budget by " + std::to_string(sum - p_max),
                                 sum - p_max);
    std::vector<PowerBounds> bounds(k);
    for (int i = 0; i < k; ++i) bounds[i] = {pmin[i], p_max - (sum - pmin[i])};
    return bounds;
}

std::pair<double, double> intra_group_split(const GroupGains& g, double p_group) {
    check_gains(g);
    const double pmin = qos_min_powers(g).total;
    if (p_group < pmin * (1.0 - 1e-12))
        throw QosInfeasibleError("intra_group_split: group power below the QoS minimum", pmin - p_group);
    const double gamma_f = qos_snr(g.qos_f);
    const double p2 = gamma_f * (g.noise + p_group * g.g_f) / (g.g_f + gamma_f * g.g_f);
    return {p_group - p2, p2};
}

std::vector<double> inter_group_waterfill(const std::vector<GroupGains>& gains,
                                          const std::vector<PowerBounds>& bounds, double p_max, double tol) {
    const int k = static_cast<int>(gains.size());
    std::vector<double> a(k), b(k);
    for (int i = 0; i < k; ++i) {
        const double gamma_f = qos_snr(gains[i].qos_f);
        a[i] = 1.0 / (1.0 + gamma_f);
        b[i] = gamma_f * gains[i].noise / (gains[i].g_f * (1.0 + gamma_f));
    }

    // Stationarity of log2(1 + g_n (a P - b) / sigma^2) at multiplier mu.
    auto power_at = [&](double mu, int i) {
        const double p = 1.0 / (mu * kLn2) - gains[i].noise / (a[i] * gains[i].g_n) + b[i] / a[i];
        return std::clamp(p, bounds[i].lo, bounds[i].hi);
    };
    auto total = [&](double mu) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += power_at(mu, i);
        return s;
    };

    double mu_hi = 0.0;
    for (int i = 0; i < k; ++i) mu_hi = std::max(mu_hi, gains[i].g_n / (gains[i].noise * kLn2));
    const double mu = bisect_water_level(total, p_max, 1e-12 * mu_hi, mu_hi, tol);

    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = power_at(mu, i);
    return out;
}

PowerAllocation allocate(const std::vector<GroupGains>& gains, double p_max) {
    PowerAllocation out;
    out.bounds = group_power_bounds(gains, p_max);
    out.p_group = inter_group_waterfill(gains, out.bounds, p_max);
    const int k = static_cast<int>(gains.size());
    out.p1.resize(k);
    out.p2.resize(k);
    out.sic_ordering_ok = true;
    for (int i = 0; i < k; ++i) {
        auto [p1, p2] = intra_group_split(gains[i], out.p_group[i]);
        out.p1[i] = p1;
        out.p2[i] = p2;
        if (gains[i].g_n < gains[i].g_f) out.sic_ordering_ok = false;
    }
    return out;
}

OmaAllocation fdma_allocate(const std::vector<GroupGains>& gains, double p_max) {
    const int k = static_cast<int>(gains.size());
    // 2K independent half-band links with rate (1/2) log2(1 + 2 P g / sigma^2).
    std::vector<double> coef(2 * k), pmin(2 * k);
    for (int i = 0; i < k; ++i) {
        coef[2 * i] = 2.0 * gains[i].g_n / gains[i].noise;
        coef[2 * i + 1] = 2.0 * gains[i].g_f / gains[i].noise;
        pmin[2 * i] = (std::exp2(2.0 * gains[i].qos_n) - 1.0) / coef[2 * i];
        pmin[2 * i + 1] = (std::exp2(2.0 * gains[i].qos_f) - 1.0) / coef[2 * i + 1];
    }
    const double need = std::accumulate(pmin.begin(), pmin.end(), 0.0);
    if (need > p_max)
        throw QosInfeasibleError("FDMA QoS minima exceed the power budget", need - p_max);

    auto power_at = [&](double mu, int u) {
        return std::max(pmin[u], 1.0 / (2.0 * mu * kLn2) - 1.0 / coef[u]);
    };
    auto total = [&](double mu) {
        double s = 0.0;
        for (int u = 0; u < 2 * k; ++u) s += power_at(mu, u);
        return s;
    };
    double mu_hi = 0.0;
    for (int u = 0; u < 2 * k; ++u) mu_hi = std::max(mu_hi, coef[u] / (2.0 * kLn2));
    const double mu = bisect_water_level(total, p_max, 1e-12 * mu_hi, mu_hi, 1e-9 * std::max(1.0, p_max));

    OmaAllocation out;
    out.p_nu.resize(k);
    out.p_fu.resize(k);
    for (int i = 0; i < k; ++i) {
        out.p_nu[i] = power_at(mu, 2 * i);
        out.p_fu[i] = power_at(mu, 2 * i + 1);
    }
    return out;
}

std::vector<double> tdma_allocate(const std::vector<GroupGains>& gains, double p_max) {
    const int k = static_cast<int>(gains.size());
    std::vector<double> pmin(k);
    double need = 0.0;
    for (int i = 0; i < k; ++i) {
        const double gn = gains[i].g_n / gains[i].noise, gf = gains[i].g_f / gains[i].noise;
        pmin[i] = std::max((std::exp2(2.0 * gains[i].qos_n) - 1.0) / gn,
                           (std::exp2(2.0 * gains[i].qos_f) - 1.0) / gf);
        need += pmin[i];
    }
    if (need > p_max)
        throw QosInfeasibleError("TDMA QoS minima exceed the power budget", need - p_max);

    // Marginal of (1/2)[log2(1 + P gn) + log2(1 + P gf)] is decreasing in P;
    // invert it per group by bisection.
    auto power_at = [&](double mu, int i) {
        const double gn = gains[i].g_n / gains[i].noise, gf = gains[i].g_f / gains[i].noise;
        auto marginal = [&](double p) { return (gn / (1.0 + p * gn) + gf / (1.0 + p * gf)) / (2.0 * kLn2); };
        if (marginal(pmin[i]) <= mu) return pmin[i];
        double lo = pmin[i], hi = std::max(1.0, 2.0 * pmin[i]);
        int expand = 0;
        while (marginal(hi) > mu && expand++ < 200) hi *= 2.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (marginal(mid) > mu)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto total = [&](double mu) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += power_at(mu, i);
        return s;
    };
    double mu_hi = 0.0;
    for (int i = 0; i < k; ++i)
        mu_hi = std::max(mu_hi, (gains[i].g_n + gains[i].g_f) / (gains[i].noise * kLn2));
    const double mu = bisect_water_level(total, p_max, 1e-12 * mu_hi, mu_hi, 1e-9 * std::max(1.0, p_max));

    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = power_at(mu, i);
    return out;
}

}  // namespace nfnoma
