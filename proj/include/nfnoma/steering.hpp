#pragma once

#include <stdexcept>
#include <vector>

#include "nfnoma/codebook.hpp"
#include "nfnoma/dma.hpp"

namespace nfnoma {

// One NOMA group: near user and far user. The steering scheme additionally
// requires both to share the (azimuth, elevation) direction.
struct UserPair {
    SphericalLocation nu, fu;
};

struct SteeringOptions {
    double target_strength = 1e3;   // desired in-band beam strength t
    double interference_cap = 1e-2; // epsilon in the leakage constraints
    double rho0 = 1.0;              // initial penalty factor
    double penalty_divisor = 1.1;   // update coefficient, rho <- rho / c
    double inner_tol = 1e-2;        // relative objective change, inner loop
    double penalty_tol = 1e-2;      // absolute threshold on the penalty term
    int max_inner = 50;
    int max_outer = 30;
    bool far_field_design = false;  // build leakage constraints from planar responses
};

struct SteeringState {
    DmaWeights w;
    std::vector<VecC> v;     // K digital vectors of length K, unit norm
    std::vector<VecC> v_bar; // K auxiliary beamformers of length M_t
    std::vector<VecR> theta; // per-group phases over the in-band range samples
};

struct ConvergenceTrace {
    // One sequence per outer round: objective value at the round start and
    // after each of the four block updates of every inner iteration.
    std::vector<std::vector<double>> inner_objectives;
    std::vector<double> penalty; // sum_i ||v_bar_i - W v_i||^2 after each round
    std::vector<double> rho;
    std::vector<double> bpe;     // sum of beam pattern errors of the effective beams
};

struct SteeringResult {
    SteeringState state;
    ConvergenceTrace trace;
    bool converged = false;
};

// Thrown when an iterative subproblem fails to reach its tolerance; carries
// the residual that was left.
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
    double residual = 0.0;
};

// Beam pattern error of an effective beamformer (length M_t) for one group:
// in-band strength deviation, out-of-band range leakage along the group
// direction, and quadrature-weighted leakage over all other directions.
double bpe(const VecC& beam, const UserPair& group, const Codebook& cb, double target_strength);

// min ||t - A x||^2 + w ||x - z||^2  s.t. |a_c^H x|^2 <= eps for each cap.
// Exact convex solve: dual coordinate bisection on the cap multipliers with
// Woodbury updates over a cached eigendecomposition of A^H A.
class QcqpLs {
  public:
    explicit QcqpLs(const MatC& a);
    VecC solve(const VecC& t, const VecC& z, double weight, const std::vector<VecC>& caps, double eps) const;
    const MatC& matrix() const { return a_; }

  private:
    VecC apply_inverse(double shift, const VecC& x) const;
    MatC a_;
    VecR evals_;
    MatC evecs_;
};

// min ||y - W x||^2 s.t. ||x|| = 1, by the secular equation of the shifted
// normal equations. Degenerate y = 0 returns the smallest right singular
// direction of W.
VecC sphere_ls(const MatC& w, const VecC& y);

// min tr(W S W^T) - 2 tr(W^T B) over the entrywise box [0, 1], projected
// gradient with Lipschitz step 1 / lambda_max(S).
MatR box_ls_pg(const MatR& s, const MatR& b, MatR w0, int max_iters = 20000, double tol = 1e-13);

class SteeringSolver {
  public:
    SteeringSolver(ArrayGeometry geom, Codebook cb, std::vector<UserPair> groups, SteeringOptions opt = {});

    int group_count() const { return static_cast<int>(groups_.size()); }
    const SteeringOptions& options() const { return opt_; }
    const Codebook& codebook() const { return cb_; }
    const ArrayGeometry& geometry() const { return geom_; }
    const std::vector<UserPair>& groups() const { return groups_; }

    SteeringState initial_state() const;

    // Block updates of the inner BCD loop.
    VecC solve_vbar(const SteeringState& s, int group, double rho) const;
    VecR solve_theta(const SteeringState& s, int group) const;
    VecC solve_v(const SteeringState& s, int group) const;
    MatR solve_w(const SteeringState& s) const;

    SteeringResult run_two_layer() const;

    double objective(const SteeringState& s, double rho) const;
    double fidelity_term(const SteeringState& s) const;
    double penalty_term(const SteeringState& s) const;
    double total_bpe(const SteeringState& s) const;
    VecC effective_beam(const SteeringState& s, int group) const;
    double max_cap_violation(const SteeringState& s) const; // over the v_bar constraints

    const MatC& scaled_responses(int group) const { return prep_[group].qcqp.matrix(); }
    const std::vector<int>& band_rows(int group) const { return prep_[group].band_rows; }
    const std::vector<VecC>& cap_vectors(int group) const { return prep_[group].caps; }
    VecC assemble_target(int group, const VecR& theta) const;

  private:
    struct GroupPrep {
        int dir_az = 0, dir_el = 0;
        std::vector<int> band_rows;
        QcqpLs qcqp;
        std::vector<VecC> caps;
        GroupPrep(const MatC& a) : qcqp(a) {}
    };

    double chi3(int group, const VecC& response_prod, const VecR& theta) const;
    MatC effective_w(const SteeringState& s) const;

    ArrayGeometry geom_;
    Codebook cb_;
    std::vector<UserPair> groups_;
    SteeringOptions opt_;
    std::vector<GroupPrep> prep_;
};

}  // namespace nfnoma
