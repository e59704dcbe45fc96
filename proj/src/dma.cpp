#include "nfnoma/dma.hpp"

#include <cmath>
#include <stdexcept>

namespace nfnoma {

MatC effective_weight_matrix(const DmaWeights& w) {
    if (!w.waveguide_phase) return w.amplitudes.cast<Complex>();
    if (w.waveguide_phase->rows() != w.amplitudes.rows() || w.waveguide_phase->cols() != w.amplitudes.cols())
        throw std::invalid_argument("effective_weight_matrix: phase/amplitude shape mismatch");
    return w.amplitudes.cwiseProduct(w.waveguide_phase->real()).cast<Complex>() +
           Complex(0.0, 1.0) * w.amplitudes.cwiseProduct(w.waveguide_phase->imag()).cast<Complex>();
}

FeedLayout FeedLayout::bottom_row(const ArrayGeometry& g, int feeds) {
    if (feeds < 1) throw std::invalid_argument("FeedLayout: need at least one feed");
    FeedLayout layout;
    const double y_min = -(g.rows - 1) / 2.0 * g.spacing_m;
    const double span = (g.cols - 1) * g.spacing_m;
    for (int k = 0; k < feeds; ++k) {
        const double z = feeds == 1 ? 0.0 : -span / 2.0 + span * (k + 0.5) / feeds;
        layout.feed_positions.emplace_back(0.0, y_min - g.spacing_m, z);
    }
    layout.propagation_vector = Eigen::Vector3d(0.0, 2.0 * kPi / g.wavelength_m, 0.0);
    return layout;
}

Complex reference_wave(const FeedLayout& layout, const ArrayGeometry& g, int k, int v, int h) {
    if (k < 0 || k >= static_cast<int>(layout.feed_positions.size()))
        throw std::out_of_range("reference_wave: feed index out of range");
    const Eigen::Vector3d disp = element_position(g, v, h) - layout.feed_positions[k];
    return std::polar(1.0, -layout.propagation_vector.dot(disp));
}

Complex objective_wave(const ArrayGeometry& g, int v, int h, const SphericalLocation& target) {
    const Eigen::Vector3d x = element_position(g, v, h);
    Eigen::Vector3d dir = target.cartesian();
    const double n = dir.norm();
    if (n > 0.0) dir /= n;
    const Eigen::Vector3d rf = 2.0 * kPi / g.wavelength_m * dir;
    return std::polar(1.0, -rf.dot(x));
}

double holographic_amplitude_factor(const FeedLayout& layout, const ArrayGeometry& g, int k, int v, int h,
                                    const SphericalLocation& target) {
    const Complex interference = reference_wave(layout, g, k, v, h) * std::conj(objective_wave(g, v, h, target));
    return (interference.real() + 1.0) / 2.0;
}

Complex holographic_amplitude(const FeedLayout& layout, const ArrayGeometry& g, int k, int v, int h,
                              const SphericalLocation& target) {
    return holographic_amplitude_factor(layout, g, k, v, h, target) * reference_wave(layout, g, k, v, h);
}

DmaWeights holographic_weights(const ArrayGeometry& g, const FeedLayout& layout,
                               const std::vector<std::vector<SphericalLocation>>& recordings) {
    DmaWeights w;
    const int feeds = static_cast<int>(recordings.size());
    w.amplitudes = MatR::Zero(g.size(), feeds);
    for (int k = 0; k < feeds; ++k) {
        if (recordings[k].empty()) throw std::invalid_argument("holographic_weights: empty recording set");
        for (int v = 0; v < g.rows; ++v)
            for (int h = 0; h < g.cols; ++h) {
                double acc = 0.0;
                for (const auto& target : recordings[k])
                    acc += holographic_amplitude_factor(layout, g, k, v, h, target);
                w.amplitudes(g.flat_index(v, h), k) = acc / recordings[k].size();
            }
    }
    return w;
}

}  // namespace nfnoma
