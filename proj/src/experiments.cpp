#include "nfnoma/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace nfnoma {

namespace {

// Evaluated rates may sit a hair below the QoS target because the allocation
// model neglects the capped inter-group leakage; tolerated explicitly.
constexpr double kQosSlack = 1e-3;

std::vector<UserChannels> true_channels(const ScenarioConfig& cfg, const UserScenario& scn) {
    const ArrayGeometry geom = cfg.geometry();
    std::vector<UserChannels> ch;
    ch.reserve(scn.groups.size());
    for (const UserPair& g : scn.groups) ch.push_back({los_channel(geom, g.nu), los_channel(geom, g.fu)});
    return ch;
}

std::vector<GroupGains> effective_gains(const ScenarioConfig& cfg, const std::vector<UserChannels>& ch,
                                        const std::vector<GroupBeams>& beams) {
    std::vector<GroupGains> gains(ch.size());
    for (size_t i = 0; i < ch.size(); ++i) {
        gains[i].g_n = std::norm(ch[i].nu.gains.dot(beams[i].near_beam));
        gains[i].g_f = std::norm(ch[i].fu.gains.dot(beams[i].far_beam));
        gains[i].qos_n = cfg.qos_rate;
        gains[i].qos_f = cfg.qos_rate;
        gains[i].noise = cfg.noise_mw();
    }
    return gains;
}

SchemeEvaluation infeasible_eval(int k) {
    SchemeEvaluation ev;
    ev.rate_nu.assign(k, 0.0);
    ev.rate_fu.assign(k, 0.0);
    ev.sum_rate = 0.0;
    ev.feasible = false;
    return ev;
}

}  // namespace

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::SteeringNoma: return "steering";
        case Scheme::SplittingNoma: return "splitting";
        case Scheme::Fdma: return "fdma";
        case Scheme::Tdma: return "tdma";
        case Scheme::FarField: return "farfield";
        case Scheme::Zf: return "zf";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::SteeringNoma, Scheme::SplittingNoma, Scheme::Fdma, Scheme::Tdma, Scheme::FarField,
                     Scheme::Zf})
        if (scheme_name(s) == name) return s;
    return std::nullopt;
}

std::string sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::PMax: return "pmax_dbm";
        case SweepVariable::Distance: return "avg_distance_m";
        case SweepVariable::DistError: return "dist_error_m";
    }
    return "unknown";
}

double SweepResult::mean_sum_rate(Scheme scheme, double x_value) const {
    double acc = 0.0;
    int n = 0;
    for (const TrialRecord& r : records) {
        if (r.scheme != scheme || std::abs(r.x_value - x_value) > 1e-12 || !r.feasible) continue;
        acc += r.sum_rate;
        ++n;
    }
    return n > 0 ? acc / n : std::numeric_limits<double>::quiet_NaN();
}

DesignedBeams design_steering(const ScenarioConfig& cfg, const UserScenario& scn, bool far_field) {
    const ArrayGeometry geom = cfg.geometry();
    Codebook cb = build_codebook(geom, cfg.cb_az, cfg.cb_el, cfg.cb_rng, cfg.cb_rmax, far_field);
    SteeringOptions opt = cfg.steering;
    opt.target_strength = cfg.target_strength;
    opt.interference_cap = cfg.interference_cap;
    opt.far_field_design = far_field;
    SteeringSolver solver(geom, std::move(cb), scn.groups, opt);
    SteeringResult res = solver.run_two_layer();

    DesignedBeams out;
    out.converged = res.converged;
    out.beams.reserve(scn.groups.size());
    for (int i = 0; i < solver.group_count(); ++i)
        out.beams.push_back(GroupBeams::uniform(solver.effective_beam(res.state, i)));
    return out;
}

DesignedBeams design_splitting(const ScenarioConfig& cfg, const UserScenario& scn) {
    SplitOptions opt = cfg.splitting;
    opt.interference_cap = cfg.interference_cap;
    SplitSolver solver(cfg.geometry(), scn.groups, opt);
    SplitResult res = solver.run_ao();

    const MatC w_eff = effective_weight_matrix(res.state.w);
    DesignedBeams out;
    out.converged = res.converged;
    for (int i = 0; i < solver.group_count(); ++i)
        out.beams.push_back(GroupBeams::split(w_eff * res.state.v_near[i], w_eff * res.state.v_far[i]));
    return out;
}

DesignedBeams design_zf(const ScenarioConfig& cfg, const UserScenario& scn) {
    const ArrayGeometry geom = cfg.geometry();
    std::vector<ChannelVector> nu_channels;
    nu_channels.reserve(scn.groups.size());
    for (const UserPair& g : scn.groups) nu_channels.push_back(los_channel(geom, g.nu));
    const MatC w = zf_beamformers(nu_channels);

    DesignedBeams out;
    for (int i = 0; i < static_cast<int>(scn.groups.size()); ++i) out.beams.push_back(GroupBeams::uniform(w.col(i)));
    return out;
}

SchemeEvaluation evaluate_noma(const ScenarioConfig& cfg, const UserScenario& true_scn,
                               const std::vector<GroupBeams>& beams, double p_max_mw) {
    const int k = static_cast<int>(true_scn.groups.size());
    const auto channels = true_channels(cfg, true_scn);
    const auto gains = effective_gains(cfg, channels, beams);
    PowerAllocation alloc;
    try {
        alloc = allocate(gains, p_max_mw);
    } catch (const QosInfeasibleError&) {
        return infeasible_eval(k);
    }
    const auto budgets = sinr_table(channels, beams, alloc.p1, alloc.p2, cfg.noise_mw());

    SchemeEvaluation ev;
    ev.rate_nu.resize(k);
    ev.rate_fu.resize(k);
    for (int i = 0; i < k; ++i) {
        ev.rate_nu[i] = budgets[i].nu.rate;
        ev.rate_fu[i] = budgets[i].fu.rate;
        ev.sum_rate += budgets[i].nu.rate + budgets[i].fu.rate;
        if (budgets[i].nu.rate < cfg.qos_rate - kQosSlack || budgets[i].fu.rate < cfg.qos_rate - kQosSlack)
            ev.feasible = false;
    }
    return ev;
}

SchemeEvaluation evaluate_fdma(const ScenarioConfig& cfg, const UserScenario& true_scn,
                               const std::vector<GroupBeams>& beams, double p_max_mw) {
    const int k = static_cast<int>(true_scn.groups.size());
    const auto channels = true_channels(cfg, true_scn);
    const auto gains = effective_gains(cfg, channels, beams);
    OmaAllocation alloc;
    try {
        alloc = fdma_allocate(gains, p_max_mw);
    } catch (const QosInfeasibleError&) {
        return infeasible_eval(k);
    }
    const auto rates = fdma_rates(channels, beams, alloc.p_nu, alloc.p_fu, cfg.noise_mw());

    SchemeEvaluation ev;
    ev.rate_nu.resize(k);
    ev.rate_fu.resize(k);
    for (int i = 0; i < k; ++i) {
        ev.rate_nu[i] = rates[i].nu;
        ev.rate_fu[i] = rates[i].fu;
        ev.sum_rate += rates[i].nu + rates[i].fu;
    }
    return ev;
}

SchemeEvaluation evaluate_tdma(const ScenarioConfig& cfg, const UserScenario& true_scn,
                               const std::vector<GroupBeams>& beams, double p_max_mw) {
    const int k = static_cast<int>(true_scn.groups.size());
    const auto channels = true_channels(cfg, true_scn);
    const auto gains = effective_gains(cfg, channels, beams);
    std::vector<double> alloc;
    try {
        alloc = tdma_allocate(gains, p_max_mw);
    } catch (const QosInfeasibleError&) {
        return infeasible_eval(k);
    }
    const auto rates = tdma_rates(channels, beams, alloc, cfg.noise_mw());

    SchemeEvaluation ev;
    ev.rate_nu.resize(k);
    ev.rate_fu.resize(k);
    for (int i = 0; i < k; ++i) {
        ev.rate_nu[i] = rates[i].nu;
        ev.rate_fu[i] = rates[i].fu;
        ev.sum_rate += rates[i].nu + rates[i].fu;
    }
    return ev;
}

int worker_count(int jobs) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("NFNOMA_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, std::min(n, jobs));
}

SweepResult run_sweep(const ScenarioConfig& cfg, const SweepSpec& spec) {
    SweepResult result;
    result.spec = spec;
    result.config = cfg;
    result.x_name = sweep_variable_name(spec.variable);
    if (spec.variable == SweepVariable::Distance)
        result.notes = "x is the NU/FU average ring distance; NU at x - 2.5 m, FU at x + 2.5 m (fixed 5 m gap)";
    else if (spec.variable == SweepVariable::DistError)
        result.notes = "x is the per-user range estimation error d_est - d_real applied to the selected side(s)";

    const int n_trials = cfg.trials;
    const int n_points = static_cast<int>(spec.grid.size());
    const int n_schemes = static_cast<int>(spec.schemes.size());

    const bool want_steering_design =
        std::any_of(spec.schemes.begin(), spec.schemes.end(), [](Scheme s) {
            return s == Scheme::SteeringNoma || s == Scheme::Fdma || s == Scheme::Tdma;
        });
    const bool want_farfield = std::count(spec.schemes.begin(), spec.schemes.end(), Scheme::FarField) > 0;
    const bool want_splitting = std::count(spec.schemes.begin(), spec.schemes.end(), Scheme::SplittingNoma) > 0;
    const bool want_zf = std::count(spec.schemes.begin(), spec.schemes.end(), Scheme::Zf) > 0;

    std::vector<std::vector<TrialRecord>> per_trial(n_trials);

    auto run_trial = [&](int trial) {
        const uint64_t seed = derive_seed(cfg.master_seed, static_cast<uint64_t>(trial));
        const UserScenario base = sample_scenario(cfg, seed);
        std::vector<TrialRecord>& recs = per_trial[trial];
        recs.reserve(static_cast<size_t>(n_points) * n_schemes);

        struct DesignSet {
            std::optional<DesignedBeams> steering, farfield, splitting, zf;
        };

        auto make_designs = [&](const UserScenario& design_scn) {
            DesignSet d;
            if (want_steering_design) d.steering = design_steering(cfg, design_scn, false);
            if (want_farfield) d.farfield = design_steering(cfg, design_scn, true);
            if (want_splitting) d.splitting = design_splitting(cfg, design_scn);
            if (want_zf) d.zf = design_zf(cfg, design_scn);
            return d;
        };

        auto evaluate = [&](Scheme s, const DesignSet& d, const UserScenario& eval_scn, double p_max_mw) {
            switch (s) {
                case Scheme::SteeringNoma: return evaluate_noma(cfg, eval_scn, d.steering->beams, p_max_mw);
                case Scheme::FarField: return evaluate_noma(cfg, eval_scn, d.farfield->beams, p_max_mw);
                case Scheme::SplittingNoma: return evaluate_noma(cfg, eval_scn, d.splitting->beams, p_max_mw);
                case Scheme::Zf: return evaluate_noma(cfg, eval_scn, d.zf->beams, p_max_mw);
                case Scheme::Fdma: return evaluate_fdma(cfg, eval_scn, d.steering->beams, p_max_mw);
                case Scheme::Tdma: return evaluate_tdma(cfg, eval_scn, d.steering->beams, p_max_mw);
            }
            return SchemeEvaluation{};
        };

        auto push_records = [&](const DesignSet& d, const UserScenario& eval_scn, double x, double p_max_mw) {
            for (Scheme s : spec.schemes) {
                const SchemeEvaluation ev = evaluate(s, d, eval_scn, p_max_mw);
                TrialRecord r;
                r.scheme = s;
                r.trial = trial;
                r.seed = seed;
                r.x_value = x;
                r.sum_rate = ev.sum_rate;
                r.rate_nu = ev.rate_nu;
                r.rate_fu = ev.rate_fu;
                r.feasible = ev.feasible;
                recs.push_back(std::move(r));
            }
        };

        switch (spec.variable) {
            case SweepVariable::PMax: {
                const DesignSet d = make_designs(base);
                for (double x : spec.grid) push_records(d, base, x, dbm_to_mw(x));
                break;
            }
            case SweepVariable::Distance: {
                for (double x : spec.grid) {
                    const UserScenario scn = with_ring_radii(base, x - 2.5, x + 2.5);
                    const DesignSet d = make_designs(scn);
                    push_records(d, scn, x, cfg.p_max_mw());
                }
                break;
            }
            case SweepVariable::DistError: {
                const DesignSet d = make_designs(base);
                for (double x : spec.grid) {
                    const bool on_nu = spec.error_side != ErrorSide::Fu;
                    const bool on_fu = spec.error_side != ErrorSide::Nu;
                    const UserScenario scn = with_ring_radii(base, on_nu ? cfg.nu_radius_m - x : cfg.nu_radius_m,
                                                             on_fu ? cfg.fu_radius_m - x : cfg.fu_radius_m);
                    push_records(d, scn, x, cfg.p_max_mw());
                }
                break;
            }
        }
    };

    const int workers = worker_count(n_trials);
    if (workers <= 1) {
        for (int t = 0; t < n_trials; ++t) run_trial(t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < n_trials; t = next.fetch_add(1)) run_trial(t);
            });
        for (auto& th : pool) th.join();
    }

    // Merge in (grid point, scheme, trial) order; per-trial blocks are stored
    // point-major so output order is independent of scheduling.
    for (int p = 0; p < n_points; ++p)
        for (int s = 0; s < n_schemes; ++s)
            for (int t = 0; t < n_trials; ++t) {
                TrialRecord& r = per_trial[t][static_cast<size_t>(p) * n_schemes + s];
                if (!r.feasible) ++result.infeasible_count;
                result.records.push_back(std::move(r));
            }
    return result;
}

ConvergenceReport run_convergence(const ScenarioConfig& cfg) {
    const uint64_t seed = derive_seed(cfg.master_seed, 0);

    ScenarioConfig steer_cfg = cfg;
    steer_cfg.same_direction_pairs = true;
    const UserScenario steer_scn = sample_scenario(steer_cfg, seed);

    ScenarioConfig split_cfg = cfg;
    split_cfg.same_direction_pairs = false;
    const UserScenario split_scn = sample_scenario(split_cfg, seed);

    ConvergenceReport rep;
    {
        const ArrayGeometry geom = cfg.geometry();
        Codebook cb = build_codebook(geom, cfg.cb_az, cfg.cb_el, cfg.cb_rng, cfg.cb_rmax);
        SteeringOptions opt = cfg.steering;
        opt.target_strength = cfg.target_strength;
        opt.interference_cap = cfg.interference_cap;
        SteeringSolver solver(geom, std::move(cb), steer_scn.groups, opt);
        SteeringResult res = solver.run_two_layer();
        rep.steering = std::move(res.trace);
        rep.steering_converged = res.converged;
    }
    {
        SplitOptions opt = cfg.splitting;
        opt.interference_cap = cfg.interference_cap;
        SplitSolver solver(cfg.geometry(), split_scn.groups, opt);
        SplitResult res = solver.run_ao();
        rep.ao_objective = std::move(res.ao_objective);
        rep.sca_objectives = std::move(res.sca_objectives);
        rep.splitting_converged = res.converged;
    }
    return rep;
}

}  // namespace nfnoma
