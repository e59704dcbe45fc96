#include "nfnoma/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfnoma {

namespace {

int nearest_uniform(double value, double lo, double step, int count) {
    const int i = static_cast<int>(std::lround((value - lo) / step));
    return std::clamp(i, 0, count - 1);
}

}  // namespace

int Codebook::nearest_azimuth(double az) const { return nearest_uniform(az, -kPi / 2.0, delta_az, n_az); }

int Codebook::nearest_elevation(double el) const { return nearest_uniform(el, -kPi / 2.0, delta_el, n_el); }

Codebook build_codebook(const ArrayGeometry& g, int n_az, int n_el, int n_rng, double r_max, bool far_field) {
    if (n_az < 2 || n_el < 2 || n_rng < 2) throw std::invalid_argument("build_codebook: sample counts must be >= 2");
    if (r_max <= 0.0) throw std::invalid_argument("build_codebook: r_max must be positive");

    Codebook cb;
    cb.n_az = n_az;
    cb.n_el = n_el;
    cb.n_rng = n_rng;
    cb.r_max = r_max;
    cb.delta_az = kPi / (n_az - 1);
    cb.delta_el = kPi / (n_el - 1);
    cb.delta_r = r_max / (n_rng - 1);

    cb.samples.resize(cb.size());
    cb.responses.resize(cb.size(), g.size());
    for (int ia = 0; ia < n_az; ++ia)
        for (int ie = 0; ie < n_el; ++ie)
            for (int ir = 0; ir < n_rng; ++ir) {
                const int q = cb.flat_index(ia, ie, ir);
                SphericalLocation loc{cb.azimuth_at(ia), cb.elevation_at(ie), cb.range_at(ir)};
                cb.samples[q] = loc;
                const VecC a = far_field ? far_field_response(g, loc) : array_response(g, loc);
                cb.responses.row(q) = a.adjoint();
            }
    return cb;
}

}  // namespace nfnoma
