#include "nfnoma/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace nfnoma {

ArrayGeometry ArrayGeometry::make(int rows, int cols, double carrier_hz, double spacing_m) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("ArrayGeometry: element counts must be >= 1");
    if (carrier_hz <= 0.0) throw std::invalid_argument("ArrayGeometry: carrier frequency must be positive");
    ArrayGeometry g;
    g.rows = rows;
    g.cols = cols;
    g.carrier_hz = carrier_hz;
    g.wavelength_m = kSpeedOfLight / carrier_hz;
    g.spacing_m = spacing_m > 0.0 ? spacing_m : g.wavelength_m / 2.0;
    return g;
}

Eigen::Vector3d SphericalLocation::cartesian() const {
    const double sp = std::sin(azimuth_rad), cp = std::cos(azimuth_rad);
    const double sv = std::sin(elevation_rad), cv = std::cos(elevation_rad);
    return {range_m * cp * sv, range_m * sp * sv, range_m * cv};
}

namespace {

void check_indices(const ArrayGeometry& g, int v, int h) {
    if (v < 0 || v >= g.rows || h < 0 || h >= g.cols)
        throw std::out_of_range("element index out of range");
}

// Signed offsets of element (v, h) from the aperture center, in units of d.
inline double v_offset(const ArrayGeometry& g, int v) { return v - (g.rows - 1) / 2.0; }
inline double h_offset(const ArrayGeometry& g, int h) { return h - (g.cols - 1) / 2.0; }

}  // namespace

Eigen::Vector3d element_position(const ArrayGeometry& g, int v, int h) {
    check_indices(g, v, h);
    return {0.0, v_offset(g, v) * g.spacing_m, h_offset(g, h) * g.spacing_m};
}

double element_user_distance(const ArrayGeometry& g, int v, int h, const SphericalLocation& loc) {
    check_indices(g, v, h);
    const double r = loc.range_m;
    const double vd = v_offset(g, v) * g.spacing_m;
    const double hd = h_offset(g, h) * g.spacing_m;
    const double sp = std::sin(loc.azimuth_rad);
    const double sv = std::sin(loc.elevation_rad), cv = std::cos(loc.elevation_rad);
    const double sq = r * r + vd * vd + hd * hd - 2.0 * r * vd * sp * sv - 2.0 * r * hd * cv;
    return std::sqrt(std::max(sq, 0.0));
}

VecC array_response(const ArrayGeometry& g, const SphericalLocation& loc) {
    const double k = 2.0 * kPi / g.wavelength_m;
    VecC a(g.size());
    for (int v = 0; v < g.rows; ++v)
        for (int h = 0; h < g.cols; ++h) {
            const double d = element_user_distance(g, v, h, loc);
            a[g.flat_index(v, h)] = std::polar(1.0, -k * d);
        }
    return a;
}

VecC far_field_response(const ArrayGeometry& g, const SphericalLocation& loc) {
    const double k = 2.0 * kPi / g.wavelength_m;
    const double sp = std::sin(loc.azimuth_rad);
    const double sv = std::sin(loc.elevation_rad), cv = std::cos(loc.elevation_rad);
    VecC a(g.size());
    for (int v = 0; v < g.rows; ++v)
        for (int h = 0; h < g.cols; ++h) {
            const double proj = v_offset(g, v) * g.spacing_m * sp * sv + h_offset(g, h) * g.spacing_m * cv;
            a[g.flat_index(v, h)] = std::polar(1.0, k * proj);
        }
    return a;
}

double rayleigh_distance(const ArrayGeometry& g) {
    const double aperture = g.spacing_m * std::hypot(double(g.rows - 1), double(g.cols - 1));
    return 2.0 * aperture * aperture / g.wavelength_m;
}

Complex free_space_gain(double range_m, double wavelength_m) {
    return Complex(wavelength_m / (4.0 * kPi * range_m), 0.0);
}

ChannelVector los_channel(const ArrayGeometry& g, const SphericalLocation& loc, const PathGainModel& model) {
    if (loc.range_m <= 0.0) throw std::invalid_argument("los_channel: range must be positive");
    ChannelVector ch;
    ch.location = loc;
    ch.path_gain = model(loc.range_m, g.wavelength_m);
    const Complex common = ch.path_gain * std::polar(1.0, -2.0 * kPi * loc.range_m / g.wavelength_m);
    ch.gains = common * array_response(g, loc);
    return ch;
}

}  // namespace nfnoma
