#pragma once

#include <functional>

#include "nfnoma/types.hpp"

namespace nfnoma {

// Planar array in the y-o-z plane with the central element at the origin.
// Rows index the vertical (y) direction, columns the horizontal (z) direction.
struct ArrayGeometry {
    int rows = 1;              // vertical element count
    int cols = 1;              // horizontal element count
    double spacing_m = 0.0;    // inter-element spacing d
    double carrier_hz = 0.0;   // carrier frequency f
    double wavelength_m = 0.0; // lambda = c / f

    // spacing_m <= 0 selects the default half-wavelength spacing.
    static ArrayGeometry make(int rows, int cols, double carrier_hz, double spacing_m = 0.0);

    int size() const { return rows * cols; }

    // Row-major flat element index, 0-based.
    int flat_index(int v, int h) const { return v * cols + h; }
};

// Spherical user coordinate (azimuth phi, elevation varphi, range r) with the
// Cartesian image s = (r cos(phi) sin(varphi), r sin(phi) sin(varphi), r cos(varphi)).
struct SphericalLocation {
    double azimuth_rad = 0.0;
    double elevation_rad = 0.0;
    double range_m = 0.0;

    Eigen::Vector3d cartesian() const;
};

// Cartesian coordinate of element (v, h), 0-based indices.
Eigen::Vector3d element_position(const ArrayGeometry& g, int v, int h);

// Closed-form element-to-user Euclidean distance.
double element_user_distance(const ArrayGeometry& g, int v, int h, const SphericalLocation& loc);

// Spherical-wave array response; entry m = exp(-j 2 pi / lambda * ||x_m - s||).
VecC array_response(const ArrayGeometry& g, const SphericalLocation& loc);

// Planar-wave response, the r -> inf limit of array_response with the common
// range phase removed; range-independent by construction.
VecC far_field_response(const ArrayGeometry& g, const SphericalLocation& loc);

// 2 D^2 / lambda with D the aperture diagonal.
double rayleigh_distance(const ArrayGeometry& g);

using PathGainModel = std::function<Complex(double range_m, double wavelength_m)>;

// Free-space amplitude lambda / (4 pi r).
Complex free_space_gain(double range_m, double wavelength_m);

struct ChannelVector {
    VecC gains;                  // beta * exp(-j 2 pi r / lambda) * array response
    Complex path_gain{0.0, 0.0}; // beta
    SphericalLocation location;
};

// LoS channel h = beta exp(-j 2 pi r / lambda) a. Throws std::invalid_argument
// for non-positive range (path-gain singularity).
ChannelVector los_channel(const ArrayGeometry& g, const SphericalLocation& loc,
                          const PathGainModel& model = free_space_gain);

}  // namespace nfnoma
