#pragma once

#include <vector>

#include "nfnoma/geometry.hpp"

namespace nfnoma {

// Uniform 3-D sample grid over azimuth x elevation x range together with the
// array responses of every sample. Angles span [-pi/2, pi/2] inclusive; ranges
// span [0, r_max]. Rows of `responses` are unscaled a(sample)^H; quadrature
// scaling of off-direction rows happens in the beam-steering solver.
struct Codebook {
    int n_az = 0, n_el = 0, n_rng = 0;
    double r_max = 0.0;
    double delta_az = 0.0, delta_el = 0.0, delta_r = 0.0;
    std::vector<SphericalLocation> samples; // flat order, see flat_index
    MatC responses;                         // Q x M_t

    int size() const { return n_az * n_el * n_rng; }
    int flat_index(int ia, int ie, int ir) const { return ir + ie * n_rng + ia * n_rng * n_el; }

    double azimuth_at(int ia) const { return -kPi / 2.0 + ia * delta_az; }
    double elevation_at(int ie) const { return -kPi / 2.0 + ie * delta_el; }
    double range_at(int ir) const { return ir * delta_r; }

    int nearest_azimuth(double az) const;
    int nearest_elevation(double el) const;
};

// far_field = true builds the rows from planar-wave responses instead; used by
// the far-field design baseline.
Codebook build_codebook(const ArrayGeometry& g, int n_az, int n_el, int n_rng, double r_max,
                        bool far_field = false);

}  // namespace nfnoma
