#include "nfnoma/scenario.hpp"

#include <cmath>

namespace nfnoma {

uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ScenarioConfig desk_scale_config() {
    ScenarioConfig cfg;
    cfg.steering.max_outer = 300;
    cfg.steering.max_inner = 50;
    cfg.splitting.max_ao = 30;
    return cfg;
}

UserScenario sample_scenario(const ScenarioConfig& cfg, uint64_t trial_seed) {
    Rng rng(trial_seed);
    UserScenario scn;
    scn.groups.resize(cfg.groups);
    for (int i = 0; i < cfg.groups; ++i) {
        UserPair& g = scn.groups[i];
        g.nu.azimuth_rad = rng.uniform(-kPi / 2.0, kPi / 2.0);
        g.nu.elevation_rad = rng.uniform(-kPi / 2.0, kPi / 2.0);
        g.nu.range_m = cfg.nu_radius_m;
        if (cfg.same_direction_pairs) {
            g.fu.azimuth_rad = g.nu.azimuth_rad;
            g.fu.elevation_rad = g.nu.elevation_rad;
        } else {
            g.fu.azimuth_rad = rng.uniform(-kPi / 2.0, kPi / 2.0);
            g.fu.elevation_rad = rng.uniform(-kPi / 2.0, kPi / 2.0);
        }
        g.fu.range_m = cfg.fu_radius_m;
    }
    return scn;
}

UserScenario with_ring_radii(UserScenario scn, double nu_radius, double fu_radius) {
    for (UserPair& g : scn.groups) {
        g.nu.range_m = nu_radius;
        g.fu.range_m = fu_radius;
    }
    return scn;
}

PatternGrid pattern_grid(const VecC& beam, const ArrayGeometry& g, const PatternSlice& slice) {
    PatternGrid out;
    out.gains.resize(slice.n_angle, slice.n_range);
    out.angle_axis.resize(slice.n_angle);
    out.range_axis.resize(slice.n_range);

    for (int ia = 0; ia < slice.n_angle; ++ia)
        out.angle_axis[ia] = slice.n_angle == 1
                                 ? slice.angle_lo
                                 : slice.angle_lo + (slice.angle_hi - slice.angle_lo) * ia / (slice.n_angle - 1);
    for (int ir = 0; ir < slice.n_range; ++ir)
        out.range_axis[ir] =
            slice.n_range == 1 ? slice.r_lo : slice.r_lo + (slice.r_hi - slice.r_lo) * ir / (slice.n_range - 1);

    for (int ia = 0; ia < slice.n_angle; ++ia)
        for (int ir = 0; ir < slice.n_range; ++ir) {
            SphericalLocation loc;
            if (slice.kind == SliceKind::AzimuthRange) {
                loc.azimuth_rad = out.angle_axis[ia];
                loc.elevation_rad = slice.fixed_angle_rad;
            } else {
                loc.azimuth_rad = slice.fixed_angle_rad;
                loc.elevation_rad = out.angle_axis[ia];
            }
            loc.range_m = out.range_axis[ir];
            const VecC a = array_response(g, loc);
            out.gains(ia, ir) = std::norm(a.dot(beam));
        }

    const double peak = out.gains.maxCoeff();
    if (peak > 0.0) out.gains /= peak;
    return out;
}

}  // namespace nfnoma
