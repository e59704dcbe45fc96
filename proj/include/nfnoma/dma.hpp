#pragma once

#include <optional>
#include <vector>

#include "nfnoma/geometry.hpp"

namespace nfnoma {

// Amplitude-controlled DMA weights. The optimizers operate on the real
// amplitude box [0, 1]; the physical waveguide phase factor is an optional
// fixed diagonal factor, off by default.
struct DmaWeights {
    MatR amplitudes;                     // M_t x K, entries in [0, 1]
    std::optional<MatC> waveguide_phase; // M_t x K unit-modulus factor
};

// Amplitudes combined with the waveguide phase when present; this is the W
// consumed by every beamforming and rate expression.
MatC effective_weight_matrix(const DmaWeights& w);

struct FeedLayout {
    std::vector<Eigen::Vector3d> feed_positions; // one per RF chain
    Eigen::Vector3d propagation_vector;          // r_s in rad/m

    // Feeds evenly spaced just below the bottom edge of the aperture, with the
    // reference wave traveling along +y across the surface.
    static FeedLayout bottom_row(const ArrayGeometry& g, int feeds);
};

// Reference wave exp(-j r_s . (x_vh - feed_k)).
Complex reference_wave(const FeedLayout& layout, const ArrayGeometry& g, int k, int v, int h);

// Objective wave exp(-j r_f . x_vh) with r_f = (2 pi / lambda) * unit(target).
Complex objective_wave(const ArrayGeometry& g, int v, int h, const SphericalLocation& target);

// (Re{reference * conj(objective)} + 1) / 2, always in [0, 1].
double holographic_amplitude_factor(const FeedLayout& layout, const ArrayGeometry& g, int k, int v, int h,
                                    const SphericalLocation& target);

// Full holographic weight entry: amplitude factor times the waveguide phase.
Complex holographic_amplitude(const FeedLayout& layout, const ArrayGeometry& g, int k, int v, int h,
                              const SphericalLocation& target);

// Feasible amplitude matrix from holographic recordings. Column k averages the
// amplitude factors over recordings[k]; waveguide phase left unset.
DmaWeights holographic_weights(const ArrayGeometry& g, const FeedLayout& layout,
                               const std::vector<std::vector<SphericalLocation>>& recordings);

}  // namespace nfnoma
