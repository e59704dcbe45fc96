#include "nfnoma/steering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nfnoma {

namespace {

constexpr double kTinyRel = 1e-12;

MatR clamp01(MatR m) {
    return m.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Beam pattern error (direct summation over the whole codebook).

double bpe(const VecC& beam, const UserPair& group, const Codebook& cb, double target_strength) {
    const int dir_az = cb.nearest_azimuth(group.nu.azimuth_rad);
    const int dir_el = cb.nearest_elevation(group.nu.elevation_rad);
    const double r_lo = group.nu.range_m, r_hi = group.fu.range_m;
    const double leak_w = cb.delta_az * cb.delta_el;

    double acc = 0.0;
    for (int ia = 0; ia < cb.n_az; ++ia)
        for (int ie = 0; ie < cb.n_el; ++ie)
            for (int ir = 0; ir < cb.n_rng; ++ir) {
                const int q = cb.flat_index(ia, ie, ir);
                const Complex c = cb.responses.row(q) * beam;
                if (ia == dir_az && ie == dir_el) {
                    const double r = cb.range_at(ir);
                    if (r >= r_lo && r <= r_hi) {
                        const double dev = target_strength - std::abs(c);
                        acc += dev * dev;
                    } else {
                        acc += std::norm(c);
                    }
                } else {
                    acc += leak_w * std::norm(c);
                }
            }
    return acc;
}

// ---------------------------------------------------------------------------
// QcqpLs

QcqpLs::QcqpLs(const MatC& a) : a_(a) {
    const MatC gram = a_.adjoint() * a_;
    Eigen::SelfAdjointEigenSolver<MatC> es(gram);
    if (es.info() != Eigen::Success) throw SolverError("QcqpLs: eigendecomposition failed", 0.0);
    evals_ = es.eigenvalues().cwiseMax(0.0);
    evecs_ = es.eigenvectors();
}

VecC QcqpLs::apply_inverse(double shift, const VecC& x) const {
    VecC y = evecs_.adjoint() * x;
    y.array() /= (evals_.array() + shift);
    return evecs_ * y;
}

VecC QcqpLs::solve(const VecC& t, const VecC& z, double weight, const std::vector<VecC>& caps, double eps) const {
    if (weight <= 0.0) throw std::invalid_argument("QcqpLs: weight must be positive");
    const VecC rhs = a_.adjoint() * t + weight * z;
    const VecC base = apply_inverse(weight, rhs);

    const int m = static_cast<int>(caps.size());
    if (m == 0) return base;

    std::vector<VecC> mi_caps(m);
    for (int c = 0; c < m; ++c) mi_caps[c] = apply_inverse(weight, caps[c]);

    // x(lambda) by the Woodbury identity over the active multipliers.
    auto x_of = [&](const VecR& lam) -> VecC {
        std::vector<int> act;
        for (int c = 0; c < m; ++c)
            if (lam[c] > 0.0) act.push_back(c);
        if (act.empty()) return base;
        const int na = static_cast<int>(act.size());
        MatC s(na, na);
        VecC rhs_small(na);
        for (int i = 0; i < na; ++i) {
            for (int j = 0; j < na; ++j) s(i, j) = caps[act[i]].dot(mi_caps[act[j]]);
            s(i, i) += Complex(1.0 / lam[act[i]], 0.0);
            rhs_small[i] = caps[act[i]].dot(base);
        }
        const VecC zsol = s.ldlt().solve(rhs_small);
        VecC x = base;
        for (int i = 0; i < na; ++i) x -= mi_caps[act[i]] * zsol[i];
        return x;
    };

    VecR lam = VecR::Zero(m);
    VecC x = base;
    const double tol = 1e-11 * std::max(1.0, eps);
    const int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool changed = false;
        for (int c = 0; c < m; ++c) {
            auto violation = [&](double l) {
                VecR trial = lam;
                trial[c] = l;
                return std::norm(caps[c].dot(x_of(trial))) - eps;
            };
            if (violation(0.0) <= 0.0) {
                if (lam[c] != 0.0) {
                    lam[c] = 0.0;
                    changed = true;
                }
                continue;
            }
            double lo = 0.0, hi = std::max(1.0, 2.0 * lam[c]);
            int expand = 0;
            while (violation(hi) > 0.0 && expand++ < 200) hi *= 2.0;
            if (violation(hi) > 0.0) throw SolverError("QcqpLs: cap multiplier bracket failed", violation(hi));
            for (int it = 0; it < 90; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (violation(mid) > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            if (std::abs(hi - lam[c]) > 1e-14 * std::max(1.0, hi)) changed = true;
            lam[c] = hi;
        }
        x = x_of(lam);
        double worst = 0.0;
        for (int c = 0; c < m; ++c) worst = std::max(worst, std::norm(caps[c].dot(x)) - eps);
        if (worst <= tol && !changed) return x;
        if (worst <= tol && sweep > 0) return x;
    }
    double worst = 0.0;
    for (int c = 0; c < m; ++c) worst = std::max(worst, std::norm(caps[c].dot(x)) - eps);
    if (worst <= 1e-9) return x;
    throw SolverError("QcqpLs: dual sweeps did not converge", worst);
}

// ---------------------------------------------------------------------------
// Norm-constrained least squares (secular equation).

VecC sphere_ls(const MatC& w, const VecC& y) {
    const MatC gram = w.adjoint() * w;
    Eigen::SelfAdjointEigenSolver<MatC> es(gram);
    const VecR lam = es.eigenvalues();
    const MatC u = es.eigenvectors();
    const int k = static_cast<int>(lam.size());
    const VecC beta = u.adjoint() * (w.adjoint() * y);

    if (beta.norm() <= 1e-300) return u.col(0);

    const double lam0 = lam[0];
    const double scale = std::max(1.0, lam[k - 1]);

    auto sum_sq = [&](double nu) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            const double den = lam[i] + nu;
            s += std::norm(beta[i]) / (den * den);
        }
        return s;
    };

    // Components in the minimal eigenspace decide between the regular root and
    // the boundary (hard) case.
    double bmin_sq = 0.0, rest = 0.0;
    for (int i = 0; i < k; ++i) {
        if (lam[i] - lam0 <= 1e-12 * scale)
            bmin_sq += std::norm(beta[i]);
        else
            rest += std::norm(beta[i]) / ((lam[i] - lam0) * (lam[i] - lam0));
    }

    VecC ycoef(k);
    if (bmin_sq <= 1e-28 * beta.squaredNorm() && rest <= 1.0) {
        // Hard case: fill the remaining norm along the minimal eigenvector.
        double used = 0.0;
        for (int i = 0; i < k; ++i) {
            if (lam[i] - lam0 <= 1e-12 * scale) {
                ycoef[i] = Complex(0.0, 0.0);
            } else {
                ycoef[i] = beta[i] / Complex(lam[i] - lam0, 0.0);
                used += std::norm(ycoef[i]);
            }
        }
        int imin = 0;
        ycoef[imin] = Complex(std::sqrt(std::max(0.0, 1.0 - used)), 0.0);
    } else {
        double lo = -lam0 + 1e-18 * scale;
        while (sum_sq(lo) < 1.0 && lo > -lam0 + 1e-300) lo = -lam0 + (lo + lam0) / 16.0;
        double hi = -lam0 + std::max(1.0, beta.norm());
        int expand = 0;
        while (sum_sq(hi) > 1.0 && expand++ < 200) hi = -lam0 + (hi + lam0) * 2.0;
        for (int it = 0; it < 120; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (sum_sq(mid) > 1.0)
                lo = mid;
            else
                hi = mid;
        }
        const double nu = 0.5 * (lo + hi);
        for (int i = 0; i < k; ++i) ycoef[i] = beta[i] / Complex(lam[i] + nu, 0.0);
    }
    VecC x = u * ycoef;
    const double n = x.norm();
    if (n > 0.0) x /= n;
    return x;
}

// ---------------------------------------------------------------------------
// Box-constrained quadratic (projected gradient).

MatR box_ls_pg(const MatR& s, const MatR& b, MatR w0, int max_iters, double tol) {
    Eigen::SelfAdjointEigenSolver<MatR> es(s);
    const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-12);
    MatR w = clamp01(std::move(w0));
    for (int it = 0; it < max_iters; ++it) {
        const MatR grad = w * s - b;
        MatR wn = clamp01(w - grad / lip);
        const double step = (wn - w).cwiseAbs().maxCoeff();
        w = std::move(wn);
        if (step <= tol) break;
    }
    return w;
}

// ---------------------------------------------------------------------------
// SteeringSolver

SteeringSolver::SteeringSolver(ArrayGeometry geom, Codebook cb, std::vector<UserPair> groups, SteeringOptions opt)
    : geom_(geom), cb_(std::move(cb)), groups_(std::move(groups)), opt_(opt) {
    if (groups_.empty()) throw std::invalid_argument("SteeringSolver: need at least one group");
    if (opt_.interference_cap <= 0.0) throw std::invalid_argument("SteeringSolver: interference cap must be positive");
    if (opt_.penalty_divisor <= 1.0) throw std::invalid_argument("SteeringSolver: penalty divisor must exceed 1");

    const double leak_scale = std::sqrt(cb_.delta_az * cb_.delta_el);
    const int q_total = cb_.size();
    const int k = group_count();

    prep_.reserve(k);
    for (int i = 0; i < k; ++i) {
        const UserPair& grp = groups_[i];
        if (std::abs(grp.nu.azimuth_rad - grp.fu.azimuth_rad) > 1e-9 ||
            std::abs(grp.nu.elevation_rad - grp.fu.elevation_rad) > 1e-9)
            throw std::invalid_argument("SteeringSolver: NU and FU of a group must share a direction");
        if (!(grp.nu.range_m < grp.fu.range_m))
            throw std::invalid_argument("SteeringSolver: NU must be closer than FU");

        const int dir_az = cb_.nearest_azimuth(grp.nu.azimuth_rad);
        const int dir_el = cb_.nearest_elevation(grp.nu.elevation_rad);

        MatC a_scaled(q_total, geom_.size());
        std::vector<int> band;
        for (int ia = 0; ia < cb_.n_az; ++ia)
            for (int ie = 0; ie < cb_.n_el; ++ie)
                for (int ir = 0; ir < cb_.n_rng; ++ir) {
                    const int q = cb_.flat_index(ia, ie, ir);
                    const bool on_dir = (ia == dir_az && ie == dir_el);
                    a_scaled.row(q) = (on_dir ? 1.0 : leak_scale) * cb_.responses.row(q);
                    if (on_dir) {
                        const double r = cb_.range_at(ir);
                        if (r >= grp.nu.range_m && r <= grp.fu.range_m) band.push_back(q);
                    }
                }

        GroupPrep prep(a_scaled);
        prep.dir_az = dir_az;
        prep.dir_el = dir_el;
        prep.band_rows = std::move(band);
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            for (const SphericalLocation* loc : {&groups_[j].nu, &groups_[j].fu}) {
                prep.caps.push_back(opt_.far_field_design ? far_field_response(geom_, *loc)
                                                          : array_response(geom_, *loc));
            }
        }
        prep_.push_back(std::move(prep));
    }
}

MatC SteeringSolver::effective_w(const SteeringState& s) const {
    if (s.w.waveguide_phase)
        throw std::invalid_argument("SteeringSolver: expects amplitude-only weights");
    return effective_weight_matrix(s.w);
}

VecC SteeringSolver::assemble_target(int group, const VecR& theta) const {
    const auto& band = prep_[group].band_rows;
    VecC t = VecC::Zero(cb_.size());
    for (size_t p = 0; p < band.size(); ++p)
        t[band[p]] = std::polar(opt_.target_strength, p < static_cast<size_t>(theta.size()) ? theta[p] : 0.0);
    return t;
}

double SteeringSolver::chi3(int group, const VecC& response_prod, const VecR& theta) const {
    const auto& band = prep_[group].band_rows;
    double acc = response_prod.squaredNorm();
    // Non-band rows contribute |c|^2; swap the band rows for the deviation term.
    for (size_t p = 0; p < band.size(); ++p) {
        const Complex c = response_prod[band[p]];
        const Complex dev = std::polar(opt_.target_strength, theta[p]) - c;
        acc += std::norm(dev) - std::norm(c);
    }
    return acc;
}

double SteeringSolver::fidelity_term(const SteeringState& s) const {
    double acc = 0.0;
    for (int i = 0; i < group_count(); ++i)
        acc += chi3(i, prep_[i].qcqp.matrix() * s.v_bar[i], s.theta[i]);
    return acc;
}

double SteeringSolver::penalty_term(const SteeringState& s) const {
    const MatC w = effective_w(s);
    double acc = 0.0;
    for (int i = 0; i < group_count(); ++i) acc += (s.v_bar[i] - w * s.v[i]).squaredNorm();
    return acc;
}

double SteeringSolver::objective(const SteeringState& s, double rho) const {
    return fidelity_term(s) + penalty_term(s) / (2.0 * rho);
}

double SteeringSolver::total_bpe(const SteeringState& s) const {
    double acc = 0.0;
    for (int i = 0; i < group_count(); ++i)
        acc += bpe(effective_beam(s, i), groups_[i], cb_, opt_.target_strength);
    return acc;
}

VecC SteeringSolver::effective_beam(const SteeringState& s, int group) const {
    return effective_w(s) * s.v[group];
}

double SteeringSolver::max_cap_violation(const SteeringState& s) const {
    double worst = 0.0;
    for (int i = 0; i < group_count(); ++i)
        for (const VecC& cap : prep_[i].caps)
            worst = std::max(worst, std::norm(cap.dot(s.v_bar[i])) - opt_.interference_cap);
    return worst;
}

SteeringState SteeringSolver::initial_state() const {
    const int k = group_count();
    SteeringState st;

    std::vector<std::vector<SphericalLocation>> recordings(k);
    for (int i = 0; i < k; ++i) {
        SphericalLocation mid = groups_[i].nu;
        mid.range_m = 0.5 * (groups_[i].nu.range_m + groups_[i].fu.range_m);
        recordings[i] = {mid};
    }
    st.w = holographic_weights(geom_, FeedLayout::bottom_row(geom_, k), recordings);

    st.v.resize(k);
    st.theta.resize(k);
    st.v_bar.resize(k);
    for (int i = 0; i < k; ++i) {
        st.v[i] = VecC::Zero(k);
        st.v[i][i] = Complex(1.0, 0.0);
        st.theta[i] = VecR::Zero(static_cast<int>(prep_[i].band_rows.size()));
    }
    // Pre-pass keeps the starting point feasible for the v_bar constraints.
    for (int i = 0; i < k; ++i) st.v_bar[i] = solve_vbar(st, i, opt_.rho0);
    return st;
}

VecC SteeringSolver::solve_vbar(const SteeringState& s, int group, double rho) const {
    const VecC t = assemble_target(group, s.theta[group]);
    const VecC z = effective_w(s) * s.v[group];
    return prep_[group].qcqp.solve(t, z, 1.0 / (2.0 * rho), prep_[group].caps, opt_.interference_cap);
}

VecR SteeringSolver::solve_theta(const SteeringState& s, int group) const {
    const auto& band = prep_[group].band_rows;
    const VecC c = prep_[group].qcqp.matrix() * s.v_bar[group];
    VecR theta(static_cast<int>(band.size()));
    for (size_t p = 0; p < band.size(); ++p) {
        const Complex cq = c[band[p]];
        theta[static_cast<int>(p)] = (std::abs(cq) == 0.0) ? 0.0 : std::arg(cq);
    }
    return theta;
}

VecC SteeringSolver::solve_v(const SteeringState& s, int group) const {
    const MatC w = effective_w(s);
    VecC v = sphere_ls(w, s.v_bar[group]);

    const auto& caps = prep_[group].caps;
    if (caps.empty()) return v;

    std::vector<VecC> u;
    u.reserve(caps.size());
    for (const VecC& cap : caps) u.push_back(w.adjoint() * cap);

    auto worst_violation = [&](const VecC& x) {
        double worst = 0.0;
        for (const VecC& uc : u) worst = std::max(worst, std::norm(uc.dot(x)) - opt_.interference_cap);
        return worst;
    };
    if (worst_violation(v) <= 1e-9) return v;

    // Exterior quadratic penalty on the cap violations, minimized on the sphere.
    const MatC gram = w.adjoint() * w;
    const VecC wy = w.adjoint() * s.v_bar[group];
    auto value = [&](const VecC& x, double mu) {
        double f = std::real(x.dot(gram * x)) - 2.0 * std::real(wy.dot(x)) + s.v_bar[group].squaredNorm();
        for (const VecC& uc : u) {
            const double g = std::norm(uc.dot(x)) - opt_.interference_cap;
            if (g > 0.0) f += mu * g * g;
        }
        return f;
    };
    auto gradient = [&](const VecC& x, double mu) {
        VecC grad = 2.0 * (gram * x - wy);
        for (const VecC& uc : u) {
            const double g = std::norm(uc.dot(x)) - opt_.interference_cap;
            if (g > 0.0) grad += mu * 4.0 * g * uc * uc.dot(x);
        }
        return grad;
    };

    VecC best = v;
    bool best_feasible = false;
    double mu = 1.0 + std::abs(value(v, 0.0));
    VecC x = v;
    for (int round = 0; round < 40; ++round) {
        double step = 1.0;
        for (int it = 0; it < 200; ++it) {
            const VecC grad = gradient(x, mu);
            VecC tangent = grad - x * Complex(std::real(x.dot(grad)), 0.0);
            if (tangent.norm() <= 1e-14 * (1.0 + grad.norm())) break;
            const double fx = value(x, mu);
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt) {
                VecC xn = x - step * tangent;
                xn /= xn.norm();
                if (value(xn, mu) < fx - 1e-12 * std::abs(fx)) {
                    x = std::move(xn);
                    step *= 1.3;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        const double viol = worst_violation(x);
        const bool feas = viol <= 1e-9;
        if (feas && (!best_feasible || value(x, 0.0) < value(best, 0.0))) {
            best = x;
            best_feasible = true;
        }
        if (feas) break;
        mu *= 2.0;
    }
    return best_feasible ? best : v;
}

MatR SteeringSolver::solve_w(const SteeringState& s) const {
    const int k = group_count();
    MatR ssum = MatR::Zero(k, k);
    MatR b = MatR::Zero(geom_.size(), k);
    for (int i = 0; i < k; ++i) {
        ssum += (s.v[i] * s.v[i].adjoint()).real();
        b += (s.v_bar[i] * s.v[i].adjoint()).real();
    }
    return box_ls_pg(ssum, b, s.w.amplitudes);
}

SteeringResult SteeringSolver::run_two_layer() const {
    SteeringResult res;
    SteeringState st = initial_state();
    double rho = opt_.rho0;
    const int k = group_count();

    for (int outer = 0; outer < opt_.max_outer; ++outer) {
        std::vector<double> seq;
        double f = objective(st, rho);
        seq.push_back(f);

        for (int inner = 0; inner < opt_.max_inner; ++inner) {
            const double f_start = f;

            for (int i = 0; i < k; ++i) st.v_bar[i] = solve_vbar(st, i, rho);
            f = objective(st, rho);
            seq.push_back(f);

            for (int i = 0; i < k; ++i) st.theta[i] = solve_theta(st, i);
            f = objective(st, rho);
            seq.push_back(f);

            // The v subproblems decouple; accept each group's update only if
            // its penalty contribution does not grow (cap penalties are soft).
            const MatC w = effective_w(st);
            for (int i = 0; i < k; ++i) {
                const VecC cand = solve_v(st, i);
                const double before = (st.v_bar[i] - w * st.v[i]).squaredNorm();
                const double after = (st.v_bar[i] - w * cand).squaredNorm();
                if (after <= before + kTinyRel * std::max(1.0, before)) st.v[i] = cand;
            }
            f = objective(st, rho);
            seq.push_back(f);

            st.w.amplitudes = solve_w(st);
            f = objective(st, rho);
            seq.push_back(f);

            if (std::abs(f_start - f) <= opt_.inner_tol * std::max(1.0, std::abs(f_start))) break;
        }

        res.trace.inner_objectives.push_back(std::move(seq));
        const double pen = penalty_term(st);
        res.trace.penalty.push_back(pen);
        res.trace.rho.push_back(rho);
        res.trace.bpe.push_back(total_bpe(st));

        if (pen <= opt_.penalty_tol) {
            res.converged = true;
            break;
        }
        rho /= opt_.penalty_divisor;
    }

    res.state = std::move(st);
    return res;
}

}  // namespace nfnoma
