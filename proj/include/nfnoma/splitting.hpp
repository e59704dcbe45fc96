#pragma once

#include <utility>
#include <vector>

#include "nfnoma/dma.hpp"
#include "nfnoma/steering.hpp"

namespace nfnoma {

struct SplitOptions {
    double interference_cap = 1e-2;
    double sca_tol = 1e-2;          // relative objective change, inner SCA loop
    double ao_tol = 1e-2;           // relative objective change, outer AO loop
    int max_sca = 40;
    int max_ao = 30;
    int pg_iters = 400;             // projected gradient budget per subproblem
    bool far_field_design = false;
};

struct SplitState {
    DmaWeights w;
    std::vector<VecC> v_near, v_far;           // K digital vectors of length K
    std::vector<double> alpha_near, alpha_far; // split coefficients
};

struct SplitResult {
    SplitState state;
    std::vector<double> ao_objective;              // sum of per-group min gains per AO round
    std::vector<std::vector<double>> sca_objectives; // per AO round, per SCA iteration
    std::vector<std::pair<double, double>> gains;  // final (NU, FU) gains per group
    bool converged = false;
};

struct DigitalSplit {
    VecC v_near, v_far;
    double alpha_near = 0.0, alpha_far = 0.0;
};

// Closed-form matched sub-beamformers with balanced gains and unit sum norm.
// Throws std::invalid_argument when either effective channel W^H a vanishes.
DigitalSplit split_digital(const MatC& w_eff, const VecC& a_near, const VecC& a_far);

// First-order minorant of |a^H W v|^2 around w_bar; equals it at w = w_bar.
double sca_lower_bound(const MatR& w, const MatR& w_bar, const VecC& a, const VecC& v);

class SplitSolver {
  public:
    SplitSolver(ArrayGeometry geom, std::vector<UserPair> groups, SplitOptions opt = {});

    int group_count() const { return static_cast<int>(groups_.size()); }
    const SplitOptions& options() const { return opt_; }
    const ArrayGeometry& geometry() const { return geom_; }

    DmaWeights initial_weights() const;

    // Sum over groups of the minimum sub-beam gain (problem objective).
    double objective(const SplitState& s) const;
    std::vector<std::pair<double, double>> gains(const SplitState& s) const;

    // Single convex subproblem at linearization point s.w (one SCA step).
    MatR solve_w_subproblem(const SplitState& s) const;
    // Full SCA loop from s.w; returns the updated weights and appends the
    // per-iteration objective to `trace`.
    MatR solve_w_sca(const SplitState& s, std::vector<double>* trace = nullptr) const;

    SplitResult run_ao() const;

    const VecC& near_response(int group) const { return a_near_[group]; }
    const VecC& far_response(int group) const { return a_far_[group]; }

  private:
    double cap_violation(const MatR& w, const SplitState& s) const;

    ArrayGeometry geom_;
    std::vector<UserPair> groups_;
    SplitOptions opt_;
    std::vector<VecC> a_near_, a_far_;
    // Interference caps: (observer response, group of the offending sub-beam, near/far flag).
    struct Cap {
        const VecC* observer;
        int beam_group;
        bool beam_near;
    };
    std::vector<Cap> caps_;
};

}  // namespace nfnoma
