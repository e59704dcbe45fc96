#include "nfnoma/io.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nfnoma {

using nlohmann::json;

std::string format_sci9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    return buf;
}

std::string content_run_id(const std::string& content) {
    auto fnv = [&](uint64_t basis) {
        uint64_t h = basis;
        for (unsigned char c : content) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    };
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(fnv(14695981039346656037ULL)),
                  static_cast<unsigned long long>(fnv(0x9ae16a3b2f90404fULL)));
    return buf;
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sweep_csv(const SweepResult& result) {
    const int k = result.config.groups;
    std::ostringstream out;
    out << "scheme,trial,seed,x_var,x_value,sum_rate";
    for (int i = 1; i <= k; ++i) out << ",rate_nu_" << i;
    for (int i = 1; i <= k; ++i) out << ",rate_fu_" << i;
    out << ",feasible\n";
    for (const TrialRecord& r : result.records) {
        out << scheme_name(r.scheme) << ',' << r.trial << ',' << r.seed << ',' << result.x_name << ','
            << format_sci9(r.x_value) << ',' << format_sci9(r.sum_rate);
        for (int i = 0; i < k; ++i) out << ',' << format_sci9(i < static_cast<int>(r.rate_nu.size()) ? r.rate_nu[i] : 0.0);
        for (int i = 0; i < k; ++i) out << ',' << format_sci9(i < static_cast<int>(r.rate_fu.size()) ? r.rate_fu[i] : 0.0);
        out << ',' << (r.feasible ? 1 : 0) << '\n';
    }
    return out.str();
}

json config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["array_rows"] = cfg.array_rows;
    j["array_cols"] = cfg.array_cols;
    j["carrier_hz"] = cfg.carrier_hz;
    j["spacing_m"] = cfg.spacing_m;
    j["groups"] = cfg.groups;
    j["nu_radius_m"] = cfg.nu_radius_m;
    j["fu_radius_m"] = cfg.fu_radius_m;
    j["qos_rate"] = cfg.qos_rate;
    j["p_max_dbm"] = cfg.p_max_dbm;
    j["noise_dbm"] = cfg.noise_dbm;
    j["target_strength"] = cfg.target_strength;
    j["interference_cap"] = cfg.interference_cap;
    j["cb_az"] = cfg.cb_az;
    j["cb_el"] = cfg.cb_el;
    j["cb_rng"] = cfg.cb_rng;
    j["cb_rmax"] = cfg.cb_rmax;
    j["trials"] = cfg.trials;
    j["master_seed"] = cfg.master_seed;
    j["same_direction_pairs"] = cfg.same_direction_pairs;
    j["steering"] = {{"rho0", cfg.steering.rho0},
                     {"penalty_divisor", cfg.steering.penalty_divisor},
                     {"inner_tol", cfg.steering.inner_tol},
                     {"penalty_tol", cfg.steering.penalty_tol},
                     {"max_inner", cfg.steering.max_inner},
                     {"max_outer", cfg.steering.max_outer}};
    j["splitting"] = {{"sca_tol", cfg.splitting.sca_tol},
                      {"ao_tol", cfg.splitting.ao_tol},
                      {"max_sca", cfg.splitting.max_sca},
                      {"max_ao", cfg.splitting.max_ao},
                      {"pg_iters", cfg.splitting.pg_iters}};
    return j;
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig cfg = desk_scale_config();
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("array_rows", cfg.array_rows);
    get("array_cols", cfg.array_cols);
    get("carrier_hz", cfg.carrier_hz);
    get("spacing_m", cfg.spacing_m);
    get("groups", cfg.groups);
    get("nu_radius_m", cfg.nu_radius_m);
    get("fu_radius_m", cfg.fu_radius_m);
    get("qos_rate", cfg.qos_rate);
    get("p_max_dbm", cfg.p_max_dbm);
    get("noise_dbm", cfg.noise_dbm);
    get("target_strength", cfg.target_strength);
    get("interference_cap", cfg.interference_cap);
    get("cb_az", cfg.cb_az);
    get("cb_el", cfg.cb_el);
    get("cb_rng", cfg.cb_rng);
    get("cb_rmax", cfg.cb_rmax);
    get("trials", cfg.trials);
    get("master_seed", cfg.master_seed);
    get("same_direction_pairs", cfg.same_direction_pairs);
    if (j.contains("steering")) {
        const json& s = j.at("steering");
        auto gets = [&](const char* key, auto& field) {
            if (s.contains(key)) field = s.at(key).get<std::decay_t<decltype(field)>>();
        };
        gets("rho0", cfg.steering.rho0);
        gets("penalty_divisor", cfg.steering.penalty_divisor);
        gets("inner_tol", cfg.steering.inner_tol);
        gets("penalty_tol", cfg.steering.penalty_tol);
        gets("max_inner", cfg.steering.max_inner);
        gets("max_outer", cfg.steering.max_outer);
    }
    if (j.contains("splitting")) {
        const json& s = j.at("splitting");
        auto gets = [&](const char* key, auto& field) {
            if (s.contains(key)) field = s.at(key).get<std::decay_t<decltype(field)>>();
        };
        gets("sca_tol", cfg.splitting.sca_tol);
        gets("ao_tol", cfg.splitting.ao_tol);
        gets("max_sca", cfg.splitting.max_sca);
        gets("max_ao", cfg.splitting.max_ao);
        gets("pg_iters", cfg.splitting.pg_iters);
    }
    return cfg;
}

json spec_to_json(const SweepSpec& spec) {
    json j;
    j["variable"] = sweep_variable_name(spec.variable);
    j["grid"] = spec.grid;
    std::vector<std::string> names;
    for (Scheme s : spec.schemes) names.push_back(scheme_name(s));
    j["schemes"] = names;
    j["error_side"] = spec.error_side == ErrorSide::Nu ? "nu" : (spec.error_side == ErrorSide::Fu ? "fu" : "both");
    return j;
}

SweepSpec spec_from_json(const json& j) {
    SweepSpec spec;
    if (j.contains("variable")) {
        const std::string v = j.at("variable").get<std::string>();
        if (v == "pmax_dbm" || v == "pmax")
            spec.variable = SweepVariable::PMax;
        else if (v == "avg_distance_m" || v == "distance")
            spec.variable = SweepVariable::Distance;
        else if (v == "dist_error_m" || v == "disterr")
            spec.variable = SweepVariable::DistError;
        else
            throw std::invalid_argument("unknown sweep variable: " + v);
    }
    if (j.contains("grid")) spec.grid = j.at("grid").get<std::vector<double>>();
    if (j.contains("schemes")) {
        spec.schemes.clear();
        for (const auto& name : j.at("schemes")) {
            const auto s = scheme_from_name(name.get<std::string>());
            if (!s) throw std::invalid_argument("unknown scheme: " + name.get<std::string>());
            spec.schemes.push_back(*s);
        }
    }
    if (j.contains("error_side")) {
        const std::string v = j.at("error_side").get<std::string>();
        spec.error_side = v == "nu" ? ErrorSide::Nu : (v == "fu" ? ErrorSide::Fu : ErrorSide::Both);
    }
    return spec;
}

json sweep_summary(const SweepResult& result, const std::string& run_id) {
    json j;
    j["run_id"] = run_id;
    j["tool_version"] = kToolVersion;
    j["config"] = config_to_json(result.config);
    j["sweep"] = spec_to_json(result.spec);
    j["x_var"] = result.x_name;
    j["infeasible_count"] = result.infeasible_count;
    j["notes"] = result.notes;

    json points = json::array();
    for (double x : result.spec.grid) {
        json pt;
        pt["x_value"] = x;
        json means;
        json counts;
        for (Scheme s : result.spec.schemes) {
            int feas = 0, total = 0;
            double acc = 0.0;
            for (const TrialRecord& r : result.records) {
                if (r.scheme != s || std::abs(r.x_value - x) > 1e-12) continue;
                ++total;
                if (r.feasible) {
                    ++feas;
                    acc += r.sum_rate;
                }
            }
            means[scheme_name(s)] = feas > 0 ? acc / feas : 0.0;
            counts[scheme_name(s)] = {{"feasible", feas}, {"total", total}};
        }
        pt["mean_sum_rate"] = means;
        pt["trials"] = counts;
        points.push_back(pt);
    }
    j["points"] = points;

    json seeds = json::array();
    for (int t = 0; t < result.config.trials; ++t)
        seeds.push_back(derive_seed(result.config.master_seed, static_cast<uint64_t>(t)));
    j["trial_seeds"] = seeds;
    return j;
}

json make_manifest(const std::string& subcommand, const ScenarioConfig& cfg, const json& params,
                   const std::string& run_id, const std::string& started_utc, const std::string& finished_utc) {
    json j;
    j["tool"] = "nfnoma";
    j["tool_version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["run_id"] = run_id;
    j["master_seed"] = cfg.master_seed;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    j["config"] = config_to_json(cfg);
    j["params"] = params;
    return j;
}

}  // namespace nfnoma
