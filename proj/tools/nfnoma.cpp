#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nfnoma/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nfnoma;

namespace {

struct ScenarioFlags {
    std::optional<std::string> array;
    std::optional<int> groups;
    std::optional<double> carrier_ghz;
    std::optional<double> nu_radius, fu_radius;
    std::optional<double> rqos, pmax_dbm, noise_dbm;
    std::optional<double> t, eps, rho0, cbar;
    std::optional<double> tol1, tol2, tol3, tol4, tol5;
    std::optional<int> trials;
    std::optional<uint64_t> seed;
    std::optional<std::string> codebook;
    std::optional<double> rmax;
    std::optional<bool> same_direction;
    std::string config_path;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (or a manifest with a 'config' field)");
    cmd->add_option("--array", f.array, "array size VxH, e.g. 16x16");
    cmd->add_option("--groups", f.groups, "number of NOMA groups K");
    cmd->add_option("--carrier-ghz", f.carrier_ghz, "carrier frequency in GHz");
    cmd->add_option("--nu-radius", f.nu_radius, "NU ring radius in meters");
    cmd->add_option("--fu-radius", f.fu_radius, "FU ring radius in meters");
    cmd->add_option("--rqos", f.rqos, "per-user QoS rate in bits/s/Hz");
    cmd->add_option("--pmax-dbm", f.pmax_dbm, "transmit power budget in dBm");
    cmd->add_option("--noise-dbm", f.noise_dbm, "noise power in dBm");
    cmd->add_option("--t", f.t, "desired in-band beam strength");
    cmd->add_option("--eps", f.eps, "inter-group interference cap");
    cmd->add_option("--rho0", f.rho0, "initial penalty factor");
    cmd->add_option("--cbar", f.cbar, "penalty update coefficient (> 1)");
    cmd->add_option("--tol1", f.tol1, "inner-loop tolerance");
    cmd->add_option("--tol2", f.tol2, "penalty-term tolerance");
    cmd->add_option("--tol3", f.tol3, "power bisection tolerance (informational)");
    cmd->add_option("--tol4", f.tol4, "SCA tolerance");
    cmd->add_option("--tol5", f.tol5, "AO tolerance");
    cmd->add_option("--trials", f.trials, "Monte Carlo trial count");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--codebook", f.codebook, "codebook size Q1xQ2xQ3, e.g. 9x9x16");
    cmd->add_option("--rmax", f.rmax, "codebook range horizon in meters");
    cmd->add_option("--same-direction", f.same_direction, "force FU angles equal to the paired NU angles");
}

std::pair<int, int> parse_dims(const std::string& s, char sep = 'x') {
    const auto pos = s.find(sep);
    if (pos == std::string::npos) throw CLI::ValidationError("expected <a>x<b>, got: " + s);
    return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 1))};
}

ScenarioConfig resolve_config(const ScenarioFlags& f) {
    ScenarioConfig cfg = desk_scale_config();
    if (!f.config_path.empty()) {
        json j = json::parse(read_text_file(f.config_path));
        if (j.contains("config")) j = j.at("config"); // accept a manifest
        cfg = config_from_json(j);
    }
    if (f.array) {
        auto [v, h] = parse_dims(*f.array);
        cfg.array_rows = v;
        cfg.array_cols = h;
    }
    if (f.groups) cfg.groups = *f.groups;
    if (f.carrier_ghz) cfg.carrier_hz = *f.carrier_ghz * 1e9;
    if (f.nu_radius) cfg.nu_radius_m = *f.nu_radius;
    if (f.fu_radius) cfg.fu_radius_m = *f.fu_radius;
    if (f.rqos) cfg.qos_rate = *f.rqos;
    if (f.pmax_dbm) cfg.p_max_dbm = *f.pmax_dbm;
    if (f.noise_dbm) cfg.noise_dbm = *f.noise_dbm;
    if (f.t) cfg.target_strength = *f.t;
    if (f.eps) cfg.interference_cap = *f.eps;
    if (f.rho0) cfg.steering.rho0 = *f.rho0;
    if (f.cbar) cfg.steering.penalty_divisor = *f.cbar;
    if (f.tol1) cfg.steering.inner_tol = *f.tol1;
    if (f.tol2) cfg.steering.penalty_tol = *f.tol2;
    if (f.tol4) cfg.splitting.sca_tol = *f.tol4;
    if (f.tol5) cfg.splitting.ao_tol = *f.tol5;
    if (f.trials) cfg.trials = *f.trials;
    if (f.seed) cfg.master_seed = *f.seed;
    if (f.codebook) {
        std::istringstream ss(*f.codebook);
        std::string tok;
        int dims[3] = {0, 0, 0};
        for (int& d : dims) {
            if (!std::getline(ss, tok, 'x')) throw CLI::ValidationError("expected Q1xQ2xQ3: " + *f.codebook);
            d = std::stoi(tok);
        }
        cfg.cb_az = dims[0];
        cfg.cb_el = dims[1];
        cfg.cb_rng = dims[2];
    }
    if (f.rmax) cfg.cb_rmax = *f.rmax;
    if (f.same_direction) cfg.same_direction_pairs = *f.same_direction;
    return cfg;
}

json complex_vector_to_json(const VecC& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) {
        arr.push_back(v[i].real());
        arr.push_back(v[i].imag());
    }
    return arr;
}

json real_matrix_to_json(const MatR& m) {
    json arr = json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

void write_manifest(const std::string& dir, const std::string& subcommand, const ScenarioConfig& cfg,
                    const json& params, const std::string& started) {
    const std::string run_id = content_run_id(config_to_json(cfg).dump() + params.dump() + subcommand);
    const json manifest = make_manifest(subcommand, cfg, params, run_id, started, iso8601_utc_now());
    write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

int cmd_pattern(const ScenarioFlags& flags, const std::string& scheme, const std::string& slice_kind,
                const std::string& grid, const std::string& out_dir) {
    const std::string started = iso8601_utc_now();
    ScenarioConfig cfg = resolve_config(flags);
    const auto [n_angle, n_range] = parse_dims(grid);

    const uint64_t seed = derive_seed(cfg.master_seed, 0);
    ScenarioConfig scn_cfg = cfg;
    scn_cfg.same_direction_pairs = scheme == "steering";
    const UserScenario scn = sample_scenario(scn_cfg, seed);

    VecC beam;
    if (scheme == "steering") {
        const DesignedBeams d = design_steering(cfg, scn, false);
        beam = d.beams[0].combined;
    } else if (scheme == "splitting") {
        const DesignedBeams d = design_splitting(cfg, scn);
        beam = d.beams[0].combined;
    } else {
        std::cerr << "unknown scheme: " << scheme << "\n";
        return 1;
    }

    PatternSlice slice;
    slice.kind = slice_kind == "elevation-range" ? SliceKind::ElevationRange : SliceKind::AzimuthRange;
    slice.fixed_angle_rad =
        slice.kind == SliceKind::AzimuthRange ? scn.groups[0].nu.elevation_rad : scn.groups[0].nu.azimuth_rad;
    slice.n_angle = n_angle;
    slice.n_range = n_range;
    slice.r_hi = cfg.cb_rmax;
    const PatternGrid pg = pattern_grid(beam, cfg.geometry(), slice);

    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "angle_deg,range_m,gain\n";
    for (int ia = 0; ia < pg.angle_axis.size(); ++ia)
        for (int ir = 0; ir < pg.range_axis.size(); ++ir)
            csv << format_sci9(rad_to_deg(pg.angle_axis[ia])) << ',' << format_sci9(pg.range_axis[ir]) << ','
                << format_sci9(pg.gains(ia, ir)) << '\n';
    write_text_file((fs::path(out_dir) / "pattern.csv").string(), csv.str());

    json params;
    params["scheme"] = scheme;
    params["slice"] = slice_kind;
    params["grid"] = grid;
    params["fixed_angle_deg"] = rad_to_deg(slice.fixed_angle_rad);
    params["group_nu"] = {{"azimuth_deg", rad_to_deg(scn.groups[0].nu.azimuth_rad)},
                          {"elevation_deg", rad_to_deg(scn.groups[0].nu.elevation_rad)},
                          {"range_m", scn.groups[0].nu.range_m}};
    params["group_fu"] = {{"azimuth_deg", rad_to_deg(scn.groups[0].fu.azimuth_rad)},
                          {"elevation_deg", rad_to_deg(scn.groups[0].fu.elevation_rad)},
                          {"range_m", scn.groups[0].fu.range_m}};
    write_manifest(out_dir, "pattern", cfg, params, started);
    return 0;
}

int cmd_design(const ScenarioFlags& flags, const std::string& scheme, const std::string& out_dir) {
    const std::string started = iso8601_utc_now();
    ScenarioConfig cfg = resolve_config(flags);

    const uint64_t seed = derive_seed(cfg.master_seed, 0);
    ScenarioConfig scn_cfg = cfg;
    scn_cfg.same_direction_pairs = scheme != "splitting";
    const UserScenario scn = sample_scenario(scn_cfg, seed);

    fs::create_directories(out_dir);
    json out;
    out["layout"] =
        "w: real DMA amplitudes, row-major M_t x K; digital vectors: complex entries interleaved [re, im]";
    out["m_t"] = cfg.geometry().size();
    out["k"] = cfg.groups;
    out["scheme"] = scheme;

    if (scheme == "steering") {
        const ArrayGeometry geom = cfg.geometry();
        Codebook cb = build_codebook(geom, cfg.cb_az, cfg.cb_el, cfg.cb_rng, cfg.cb_rmax);
        SteeringOptions opt = cfg.steering;
        opt.target_strength = cfg.target_strength;
        opt.interference_cap = cfg.interference_cap;
        SteeringSolver solver(geom, std::move(cb), scn.groups, opt);
        const SteeringResult res = solver.run_two_layer();
        out["converged"] = res.converged;
        out["final_penalty"] = res.trace.penalty.empty() ? 0.0 : res.trace.penalty.back();
        out["final_bpe"] = res.trace.bpe.empty() ? 0.0 : res.trace.bpe.back();
        out["w"] = real_matrix_to_json(res.state.w.amplitudes);
        json vs = json::array();
        for (const VecC& v : res.state.v) vs.push_back(complex_vector_to_json(v));
        out["v"] = vs;
    } else if (scheme == "splitting") {
        SplitOptions opt = cfg.splitting;
        opt.interference_cap = cfg.interference_cap;
        SplitSolver solver(cfg.geometry(), scn.groups, opt);
        const SplitResult res = solver.run_ao();
        out["converged"] = res.converged;
        out["final_objective"] = res.ao_objective.empty() ? 0.0 : res.ao_objective.back();
        out["w"] = real_matrix_to_json(res.state.w.amplitudes);
        json vn = json::array(), vf = json::array();
        for (const VecC& v : res.state.v_near) vn.push_back(complex_vector_to_json(v));
        for (const VecC& v : res.state.v_far) vf.push_back(complex_vector_to_json(v));
        out["v_near"] = vn;
        out["v_far"] = vf;
    } else {
        std::cerr << "unknown scheme: " << scheme << "\n";
        return 1;
    }

    json scn_json = json::array();
    for (const UserPair& g : scn.groups)
        scn_json.push_back({{"nu_azimuth_deg", rad_to_deg(g.nu.azimuth_rad)},
                            {"nu_elevation_deg", rad_to_deg(g.nu.elevation_rad)},
                            {"nu_range_m", g.nu.range_m},
                            {"fu_azimuth_deg", rad_to_deg(g.fu.azimuth_rad)},
                            {"fu_elevation_deg", rad_to_deg(g.fu.elevation_rad)},
                            {"fu_range_m", g.fu.range_m}});
    out["scenario"] = scn_json;

    write_text_file((fs::path(out_dir) / "beamformer.json").string(), out.dump(2) + "\n");
    json params;
    params["scheme"] = scheme;
    write_manifest(out_dir, "design", cfg, params, started);
    return 0;
}

int cmd_allocate(const ScenarioFlags& flags, const std::string& gains_arg, const std::string& out_dir) {
    const std::string started = iso8601_utc_now();
    ScenarioConfig cfg = resolve_config(flags);

    json gains_json;
    if (!gains_arg.empty() && gains_arg.front() == '[')
        gains_json = json::parse(gains_arg);
    else
        gains_json = json::parse(read_text_file(gains_arg));

    std::vector<GroupGains> gains;
    for (const auto& e : gains_json) {
        GroupGains g;
        g.g_n = e.at("g_n").get<double>();
        g.g_f = e.at("g_f").get<double>();
        g.qos_n = e.contains("qos_n") ? e.at("qos_n").get<double>() : cfg.qos_rate;
        g.qos_f = e.contains("qos_f") ? e.at("qos_f").get<double>() : cfg.qos_rate;
        g.noise = e.contains("noise") ? e.at("noise").get<double>() : cfg.noise_mw();
        gains.push_back(g);
    }

    fs::create_directories(out_dir);
    json out;
    try {
        const PowerAllocation alloc = allocate(gains, cfg.p_max_mw());
        out["feasible"] = true;
        out["p1_mw"] = alloc.p1;
        out["p2_mw"] = alloc.p2;
        out["p_group_mw"] = alloc.p_group;
        json bounds = json::array();
        for (const PowerBounds& b : alloc.bounds) bounds.push_back({b.lo, b.hi});
        out["bounds_mw"] = bounds;
        out["sic_ordering_ok"] = alloc.sic_ordering_ok;
        json rates = json::array();
        double sum = 0.0;
        for (size_t i = 0; i < gains.size(); ++i) {
            const double rn = std::log2(1.0 + alloc.p1[i] * gains[i].g_n / gains[i].noise);
            const double rf = std::log2(1.0 + alloc.p2[i] * gains[i].g_f /
                                                  (alloc.p1[i] * gains[i].g_f + gains[i].noise));
            rates.push_back({{"rate_nu", rn}, {"rate_fu", rf}});
            sum += rn + rf;
        }
        out["rates"] = rates;
        out["sum_rate"] = sum;
    } catch (const QosInfeasibleError& e) {
        out["feasible"] = false;
        out["deficit_mw"] = e.deficit;
        out["error"] = e.what();
    }
    write_text_file((fs::path(out_dir) / "allocation.json").string(), out.dump(2) + "\n");

    json params;
    params["gains"] = gains_json;
    write_manifest(out_dir, "allocate", cfg, params, started);
    return 0;
}

int cmd_sweep(const ScenarioFlags& flags, const std::string& variable, const std::string& grid_arg,
              const std::string& schemes_arg, const std::string& error_side, const std::string& out_dir) {
    const std::string started = iso8601_utc_now();
    ScenarioConfig cfg = resolve_config(flags);

    SweepSpec spec;
    if (!flags.config_path.empty()) {
        json j = json::parse(read_text_file(flags.config_path));
        if (j.contains("params") && j.at("params").contains("sweep"))
            spec = spec_from_json(j.at("params").at("sweep"));
        else if (j.contains("sweep"))
            spec = spec_from_json(j.at("sweep"));
    }
    if (!variable.empty()) {
        json v;
        v["variable"] = variable;
        SweepSpec tmp = spec_from_json(v);
        spec.variable = tmp.variable;
    }
    if (!grid_arg.empty()) {
        // start:stop:step inclusive
        std::istringstream ss(grid_arg);
        std::string tok;
        double vals[3] = {0, 0, 0};
        for (double& v : vals) {
            if (!std::getline(ss, tok, ':')) throw CLI::ValidationError("expected start:stop:step, got " + grid_arg);
            v = std::stod(tok);
        }
        if (vals[2] <= 0.0) throw CLI::ValidationError("grid step must be positive");
        spec.grid.clear();
        for (double x = vals[0]; x <= vals[1] + 1e-9 * std::max(1.0, std::abs(vals[1])); x += vals[2])
            spec.grid.push_back(x);
    }
    if (!schemes_arg.empty()) {
        spec.schemes.clear();
        std::istringstream ss(schemes_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto s = scheme_from_name(tok);
            if (!s) throw CLI::ValidationError("unknown scheme: " + tok);
            spec.schemes.push_back(*s);
        }
    }
    if (!error_side.empty())
        spec.error_side = error_side == "nu" ? ErrorSide::Nu : (error_side == "fu" ? ErrorSide::Fu : ErrorSide::Both);
    if (spec.grid.empty()) throw CLI::ValidationError("sweep grid is empty; pass --grid start:stop:step");

    const SweepResult result = run_sweep(cfg, spec);

    fs::create_directories(out_dir);
    const std::string csv = sweep_csv(result);
    write_text_file((fs::path(out_dir) / "sweep.csv").string(), csv);
    const std::string run_id = content_run_id(csv);
    write_text_file((fs::path(out_dir) / "summary.json").string(), sweep_summary(result, run_id).dump(2) + "\n");

    json params;
    params["sweep"] = spec_to_json(spec);
    write_manifest(out_dir, "sweep", cfg, params, started);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-field DMA-NOMA beamforming and power allocation toolkit"};
    app.require_subcommand(1);

    ScenarioFlags pattern_flags, design_flags, alloc_flags, sweep_flags;

    auto* pattern = app.add_subcommand("pattern", "emit a normalized beam gain grid over a 2-D slice");
    std::string pattern_scheme = "steering", pattern_slice = "azimuth-range", pattern_grid_arg = "64x64",
                pattern_out = "pattern_out";
    pattern->add_option("--scheme", pattern_scheme, "steering|splitting");
    pattern->add_option("--slice", pattern_slice, "azimuth-range|elevation-range");
    pattern->add_option("--grid", pattern_grid_arg, "grid size NxM (angle x range)");
    pattern->add_option("--out", pattern_out, "output directory")->required();
    add_scenario_flags(pattern, pattern_flags);

    auto* design = app.add_subcommand("design", "run a beamformer design and write it to JSON");
    std::string design_scheme = "steering", design_out = "design_out";
    design->add_option("--scheme", design_scheme, "steering|splitting");
    design->add_option("--out", design_out, "output directory")->required();
    add_scenario_flags(design, design_flags);

    auto* alloc = app.add_subcommand("allocate", "optimal NOMA power allocation for given gains");
    std::string gains_arg, alloc_out = "allocate_out";
    alloc->add_option("--gains", gains_arg, "JSON file or inline JSON array of {g_n, g_f[, qos_n, qos_f, noise]}")
        ->required();
    alloc->add_option("--out", alloc_out, "output directory")->required();
    add_scenario_flags(alloc, alloc_flags);

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over a network variable");
    std::string sweep_var, sweep_grid, sweep_schemes, sweep_side, sweep_out = "sweep_out";
    sweep->add_option("--variable", sweep_var, "pmax|distance|disterr");
    sweep->add_option("--grid", sweep_grid, "start:stop:step (inclusive)");
    sweep->add_option("--schemes", sweep_schemes, "comma list: steering,splitting,fdma,tdma,farfield,zf");
    sweep->add_option("--error-side", sweep_side, "nu|fu|both (disterr sweeps)");
    sweep->add_option("--out-dir", sweep_out, "output directory")->required();
    add_scenario_flags(sweep, sweep_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pattern->parsed())
            return cmd_pattern(pattern_flags, pattern_scheme, pattern_slice, pattern_grid_arg, pattern_out);
        if (design->parsed()) return cmd_design(design_flags, design_scheme, design_out);
        if (alloc->parsed()) return cmd_allocate(alloc_flags, gains_arg, alloc_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_flags, sweep_var, sweep_grid, sweep_schemes, sweep_side, sweep_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
