#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nfnoma/splitting.hpp"
#include "nfnoma/steering.hpp"

namespace nfnoma {

// Deterministic uniform generator: raw mt19937_64 output mapped to doubles so
// results are identical across platforms and standard libraries.
struct Rng {
    explicit Rng(uint64_t seed) : eng(seed) {}
    std::mt19937_64 eng;

    double uniform() { return (eng() >> 11) * 0x1.0p-53; } // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// SplitMix64 step; derives independent per-trial streams from a master seed.
uint64_t derive_seed(uint64_t master, uint64_t stream);

struct ScenarioConfig {
    int array_rows = 16, array_cols = 16;
    // Desk-scale default carrier gives lambda = 1 m so that the 10 m / 15 m
    // rings sit inside the near field of a 16x16 aperture, matching the
    // full-scale regime (users around the Rayleigh boundary).
    double carrier_hz = 299792458.0;
    double spacing_m = 0.0; // 0 -> half wavelength
    int groups = 2;
    double nu_radius_m = 10.0, fu_radius_m = 15.0;
    double qos_rate = 1.0;      // bits/s/Hz
    double p_max_dbm = 15.0;
    double noise_dbm = -75.0;
    double target_strength = 1e3;
    double interference_cap = 1e-2;
    int cb_az = 9, cb_el = 9, cb_rng = 16;
    double cb_rmax = 20.0;
    int trials = 20;
    uint64_t master_seed = 1;
    bool same_direction_pairs = true; // steering topology (paired FU shares the NU direction)

    SteeringOptions steering;
    SplitOptions splitting;

    ArrayGeometry geometry() const { return ArrayGeometry::make(array_rows, array_cols, carrier_hz, spacing_m); }
    double p_max_mw() const { return dbm_to_mw(p_max_dbm); }
    double noise_mw() const { return dbm_to_mw(noise_dbm); }
};

// Desk-scale defaults with solver budgets sized so the penalty threshold is
// reachable under the paper-faithful update coefficient.
ScenarioConfig desk_scale_config();

struct UserScenario {
    std::vector<UserPair> groups;
};

// Users on the two rings with angles uniform over [-pi/2, pi/2]^2.
UserScenario sample_scenario(const ScenarioConfig& cfg, uint64_t trial_seed);

UserScenario with_ring_radii(UserScenario scn, double nu_radius, double fu_radius);

enum class SliceKind { AzimuthRange, ElevationRange };

struct PatternSlice {
    SliceKind kind = SliceKind::AzimuthRange;
    double fixed_angle_rad = 0.0; // elevation for azimuth-range slices, azimuth otherwise
    int n_angle = 64, n_range = 64;
    double angle_lo = -kPi / 2.0, angle_hi = kPi / 2.0;
    double r_lo = 0.0, r_hi = 20.0;
};

struct PatternGrid {
    MatR gains; // n_angle x n_range, normalized to max 1
    VecR angle_axis, range_axis;
};

PatternGrid pattern_grid(const VecC& beam, const ArrayGeometry& g, const PatternSlice& slice);

}  // namespace nfnoma
