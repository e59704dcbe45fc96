#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nfnoma {

// Effective scalar link of one NOMA group after beamforming.
struct GroupGains {
    double g_n = 0.0;   // NU channel gain |h_N^H W v|^2, linear power
    double g_f = 0.0;   // FU channel gain, linear power
    double qos_n = 0.0; // NU rate target, bits/s/Hz
    double qos_f = 0.0; // FU rate target, bits/s/Hz
    double noise = 0.0; // sigma^2, linear power
};

inline double qos_snr(double rate) { return std::exp2(rate) - 1.0; }

struct QosMinPowers {
    double p1 = 0.0; // NU power meeting its QoS exactly
    double p2 = 0.0; // FU power meeting its QoS exactly given p1
    double total = 0.0;
};

class QosInfeasibleError : public std::runtime_error {
  public:
    QosInfeasibleError(const std::string& what, double deficit) : std::runtime_error(what), deficit(deficit) {}
    double deficit = 0.0; // total power shortfall
};

struct PowerBounds {
    double lo = 0.0, hi = 0.0;
};

QosMinPowers qos_min_powers(const GroupGains& g);

// Per-group feasible boxes [P_min_i, P_max_i]; throws QosInfeasibleError when
// the QoS minima already exceed the budget.
std::vector<PowerBounds> group_power_bounds(const std::vector<GroupGains>& gains, double p_max);

// Optimal (p1, p2) with p1 + p2 = p_group: FU pinned at its QoS, the surplus to
// the NU. Throws when p_group is below the group's QoS minimum.
std::pair<double, double> intra_group_split(const GroupGains& g, double p_group);

// Box-constrained water-filling over groups via bisection on the multiplier;
// the returned powers sum to p_max within tol.
std::vector<double> inter_group_waterfill(const std::vector<GroupGains>& gains,
                                          const std::vector<PowerBounds>& bounds, double p_max,
                                          double tol = 1e-6);

struct PowerAllocation {
    std::vector<double> p1, p2, p_group;
    std::vector<PowerBounds> bounds;
    bool sic_ordering_ok = true; // g_n >= g_f held for every group
};

// Two-stage allocation: bounds -> water-filling -> intra-group split.
PowerAllocation allocate(const std::vector<GroupGains>& gains, double p_max);

// Power allocation for the orthogonal baselines, same two-stage idea applied
// to their rate laws. FDMA: per-user powers on half bands with noise sigma^2/2.
struct OmaAllocation {
    std::vector<double> p_nu, p_fu;
};
OmaAllocation fdma_allocate(const std::vector<GroupGains>& gains, double p_max);

// TDMA: one power per group, applied in full during each user's slot.
std::vector<double> tdma_allocate(const std::vector<GroupGains>& gains, double p_max);

}  // namespace nfnoma
