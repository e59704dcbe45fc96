#include "nfnoma/splitting.hpp"

#include <algorithm>
#include <cmath>

namespace nfnoma {

namespace {

MatR clamp01(MatR m) { return m.cwiseMax(0.0).cwiseMin(1.0); }

VecC real_times_complex(const MatR& w, const VecC& v) {
    return (w * v.real()).cast<Complex>() + Complex(0.0, 1.0) * (w * v.imag()).cast<Complex>();
}

}  // namespace

DigitalSplit split_digital(const MatC& w_eff, const VecC& a_near, const VecC& a_far) {
    const VecC gn = w_eff.adjoint() * a_near;
    const VecC gf = w_eff.adjoint() * a_far;
    const double nn = gn.squaredNorm(), nf = gf.squaredNorm();
    if (nn <= 0.0 || nf <= 0.0)
        throw std::invalid_argument("split_digital: degenerate effective channel W^H a = 0");

    const double ratio = nf / nn;  // gain-balance coefficient ratio
    const double alpha_far = 1.0 / (ratio * gn + gf).norm();
    const double alpha_near = alpha_far * ratio;

    DigitalSplit out;
    out.alpha_near = alpha_near;
    out.alpha_far = alpha_far;
    out.v_near = alpha_near * gn;
    out.v_far = alpha_far * gf;
    return out;
}

double sca_lower_bound(const MatR& w, const MatR& w_bar, const VecC& a, const VecC& v) {
    const Complex s = a.dot(real_times_complex(w, v));
    const Complex s_bar = a.dot(real_times_complex(w_bar, v));
    return 2.0 * std::real(s_bar * std::conj(s)) - std::norm(s_bar);
}

SplitSolver::SplitSolver(ArrayGeometry geom, std::vector<UserPair> groups, SplitOptions opt)
    : geom_(geom), groups_(std::move(groups)), opt_(opt) {
    if (groups_.empty()) throw std::invalid_argument("SplitSolver: need at least one group");
    const int k = group_count();
    a_near_.reserve(k);
    a_far_.reserve(k);
    for (const UserPair& g : groups_) {
        a_near_.push_back(opt_.far_field_design ? far_field_response(geom_, g.nu) : array_response(geom_, g.nu));
        a_far_.push_back(opt_.far_field_design ? far_field_response(geom_, g.fu) : array_response(geom_, g.fu));
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            for (const VecC* obs : {&a_near_[i], &a_far_[i]}) {
                caps_.push_back({obs, j, true});
                caps_.push_back({obs, j, false});
            }
        }
}

DmaWeights SplitSolver::initial_weights() const {
    std::vector<std::vector<SphericalLocation>> recordings(group_count());
    for (int i = 0; i < group_count(); ++i) recordings[i] = {groups_[i].nu, groups_[i].fu};
    return holographic_weights(geom_, FeedLayout::bottom_row(geom_, group_count()), recordings);
}

double SplitSolver::objective(const SplitState& s) const {
    double acc = 0.0;
    for (int i = 0; i < group_count(); ++i) {
        const double gn = std::norm(a_near_[i].dot(real_times_complex(s.w.amplitudes, s.v_near[i])));
        const double gf = std::norm(a_far_[i].dot(real_times_complex(s.w.amplitudes, s.v_far[i])));
        acc += std::min(gn, gf);
    }
    return acc;
}

std::vector<std::pair<double, double>> SplitSolver::gains(const SplitState& s) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(group_count());
    for (int i = 0; i < group_count(); ++i) {
        const double gn = std::norm(a_near_[i].dot(real_times_complex(s.w.amplitudes, s.v_near[i])));
        const double gf = std::norm(a_far_[i].dot(real_times_complex(s.w.amplitudes, s.v_far[i])));
        out.emplace_back(gn, gf);
    }
    return out;
}

double SplitSolver::cap_violation(const MatR& w, const SplitState& s) const {
    double worst = 0.0;
    for (const Cap& c : caps_) {
        const VecC& v = c.beam_near ? s.v_near[c.beam_group] : s.v_far[c.beam_group];
        worst = std::max(worst, std::norm(c.observer->dot(real_times_complex(w, v))) - opt_.interference_cap);
    }
    return worst;
}

MatR SplitSolver::solve_w_subproblem(const SplitState& s) const {
    const MatR& w_bar = s.w.amplitudes;
    const int k = group_count();

    // Linearization constants at w_bar.
    std::vector<Complex> sbar_n(k), sbar_f(k);
    for (int i = 0; i < k; ++i) {
        sbar_n[i] = a_near_[i].dot(real_times_complex(w_bar, s.v_near[i]));
        sbar_f[i] = a_far_[i].dot(real_times_complex(w_bar, s.v_far[i]));
    }

    auto lin_pair = [&](const MatR& w, int i) {
        const Complex sn = a_near_[i].dot(real_times_complex(w, s.v_near[i]));
        const Complex sf = a_far_[i].dot(real_times_complex(w, s.v_far[i]));
        const double ln = 2.0 * std::real(sbar_n[i] * std::conj(sn)) - std::norm(sbar_n[i]);
        const double lf = 2.0 * std::real(sbar_f[i] * std::conj(sf)) - std::norm(sbar_f[i]);
        return std::make_pair(ln, lf);
    };

    auto minorant_sum = [&](const MatR& w) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            const auto [ln, lf] = lin_pair(w, i);
            acc += std::min(ln, lf);
        }
        return acc;
    };

    double scale = std::max(1.0, std::abs(minorant_sum(w_bar)));

    auto penalized = [&](const MatR& w, double mu, double tau) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            const auto [ln, lf] = lin_pair(w, i);
            const double m = std::min(ln, lf);
            acc += m - tau * std::log(std::exp(-(ln - m) / tau) + std::exp(-(lf - m) / tau));
        }
        for (const Cap& c : caps_) {
            const VecC& v = c.beam_near ? s.v_near[c.beam_group] : s.v_far[c.beam_group];
            const double g = std::norm(c.observer->dot(real_times_complex(w, v))) - opt_.interference_cap;
            if (g > 0.0) acc -= mu * g * g;
        }
        return acc;
    };

    auto gradient = [&](const MatR& w, double mu, double tau) {
        MatR grad = MatR::Zero(w.rows(), w.cols());
        for (int i = 0; i < k; ++i) {
            const auto [ln, lf] = lin_pair(w, i);
            const double m = std::min(ln, lf);
            const double en = std::exp(-(ln - m) / tau), ef = std::exp(-(lf - m) / tau);
            const double wn = en / (en + ef), wf = ef / (en + ef);
            grad += 2.0 * wn * ((a_near_[i] * sbar_n[i]) * s.v_near[i].adjoint()).real();
            grad += 2.0 * wf * ((a_far_[i] * sbar_f[i]) * s.v_far[i].adjoint()).real();
        }
        for (const Cap& c : caps_) {
            const VecC& v = c.beam_near ? s.v_near[c.beam_group] : s.v_far[c.beam_group];
            const Complex so = c.observer->dot(real_times_complex(w, v));
            const double g = std::norm(so) - opt_.interference_cap;
            if (g > 0.0) grad -= mu * 4.0 * g * ((*c.observer * so) * v.adjoint()).real();
        }
        return grad;
    };

    // Keep the incoming point as fallback so the minorize-maximize step never
    // regresses the true objective.
    MatR best = w_bar;
    double best_val = minorant_sum(w_bar);
    bool best_feasible = cap_violation(w_bar, s) <= 1e-9;

    MatR w = w_bar;
    double mu = 1.0;
    const int mu_rounds = caps_.empty() ? 1 : 40;
    for (int round = 0; round < mu_rounds; ++round) {
        for (double tau = 0.1 * scale; tau >= 1e-5 * scale; tau *= 0.03) {
            double step = 1.0;
            for (int it = 0; it < opt_.pg_iters; ++it) {
                const double h = penalized(w, mu, tau);
                const MatR grad = gradient(w, mu, tau);
                bool moved = false;
                for (int bt = 0; bt < 50; ++bt) {
                    MatR wn = clamp01(w + step * grad);
                    if (penalized(wn, mu, tau) > h + 1e-14 * std::abs(h)) {
                        w = std::move(wn);
                        step *= 1.6;
                        moved = true;
                        break;
                    }
                    step *= 0.4;
                }
                if (!moved) break;
            }
        }
        const double viol = cap_violation(w, s);
        const bool feas = viol <= 1e-9;
        const double val = minorant_sum(w);
        if (feas && (!best_feasible || val > best_val)) {
            best = w;
            best_val = val;
            best_feasible = true;
        } else if (!best_feasible && val > best_val) {
            best = w;
            best_val = val;
        }
        if (feas) break;
        mu *= 4.0;
    }
    return best;
}

MatR SplitSolver::solve_w_sca(const SplitState& s, std::vector<double>* trace) const {
    SplitState cur = s;
    // A re-split can leave the incoming weights outside the interference caps;
    // restore feasibility before the monotone phase starts.
    if (!caps_.empty() && cap_violation(cur.w.amplitudes, cur) > 1e-9)
        cur.w.amplitudes = solve_w_subproblem(cur);
    double prev = objective(cur);
    if (trace) trace->push_back(prev);
    for (int it = 0; it < opt_.max_sca; ++it) {
        MatR wn = solve_w_subproblem(cur);
        SplitState cand = cur;
        cand.w.amplitudes = wn;
        const double val = objective(cand);
        if (val < prev) break;
        cur.w.amplitudes = std::move(wn);
        if (trace) trace->push_back(val);
        if (std::abs(val - prev) <= opt_.sca_tol * std::max(1.0, std::abs(prev))) {
            prev = val;
            break;
        }
        prev = val;
    }
    return cur.w.amplitudes;
}

SplitResult SplitSolver::run_ao() const {
    const int k = group_count();
    SplitResult res;
    SplitState st;
    st.w = initial_weights();
    st.v_near.resize(k);
    st.v_far.resize(k);
    st.alpha_near.assign(k, 0.0);
    st.alpha_far.assign(k, 0.0);

    auto resplit = [&](SplitState& state) {
        const MatC w_eff = effective_weight_matrix(state.w);
        for (int i = 0; i < k; ++i) {
            DigitalSplit d = split_digital(w_eff, a_near_[i], a_far_[i]);
            state.v_near[i] = std::move(d.v_near);
            state.v_far[i] = std::move(d.v_far);
            state.alpha_near[i] = d.alpha_near;
            state.alpha_far[i] = d.alpha_far;
        }
    };

    resplit(st);
    // Shrink the initial weights into the interference caps; the split
    // directions are scale-invariant so the digital vectors stay valid.
    if (!caps_.empty()) {
        const double worst = cap_violation(st.w.amplitudes, st) + opt_.interference_cap;
        if (worst > opt_.interference_cap) {
            st.w.amplitudes *= std::sqrt(opt_.interference_cap / worst) * (1.0 - 1e-12);
            resplit(st);
        }
    }

    double prev = objective(st);
    for (int round = 0; round < opt_.max_ao; ++round) {
        SplitState backup = st;
        if (round > 0) {
            SplitState cand = st;
            resplit(cand);
            if (objective(cand) >= prev) st = std::move(cand);
        }

        std::vector<double> strace;
        st.w.amplitudes = solve_w_sca(st, &strace);
        const double obj = objective(st);
        if (round > 0 && obj < prev) {
            // Stalled round (feasibility restoration ate the gain): keep the
            // previous iterate and stop.
            st = std::move(backup);
            res.converged = true;
            break;
        }
        res.sca_objectives.push_back(std::move(strace));
        res.ao_objective.push_back(obj);
        if (round > 0 && std::abs(obj - prev) <= opt_.ao_tol * std::max(1.0, std::abs(prev))) {
            res.converged = true;
            prev = obj;
            break;
        }
        prev = obj;
    }

    res.gains = gains(st);
    res.state = std::move(st);
    return res;
}

}  // namespace nfnoma
