#pragma once

#include <optional>
#include <string>

#include "nfnoma/power.hpp"
#include "nfnoma/rates.hpp"
#include "nfnoma/scenario.hpp"

namespace nfnoma {

enum class Scheme { SteeringNoma, SplittingNoma, Fdma, Tdma, FarField, Zf };

std::string scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

enum class SweepVariable { PMax, Distance, DistError };
enum class ErrorSide { Nu, Fu, Both };

std::string sweep_variable_name(SweepVariable v);

struct SweepSpec {
    SweepVariable variable = SweepVariable::PMax;
    std::vector<double> grid; // dBm for PMax, meters otherwise
    std::vector<Scheme> schemes = {Scheme::SteeringNoma, Scheme::Fdma, Scheme::Tdma, Scheme::FarField, Scheme::Zf};
    ErrorSide error_side = ErrorSide::Both; // DistError sweeps only
};

struct TrialRecord {
    Scheme scheme{};
    int trial = 0;
    uint64_t seed = 0;
    double x_value = 0.0;
    double sum_rate = 0.0;
    std::vector<double> rate_nu, rate_fu;
    bool feasible = true;
};

struct SweepResult {
    SweepSpec spec;
    ScenarioConfig config;
    std::string x_name;
    std::vector<TrialRecord> records; // ordered by (grid point, scheme, trial)
    int infeasible_count = 0;
    std::string notes;

    // Mean sum rate over feasible trials at one grid point; NaN when none.
    double mean_sum_rate(Scheme scheme, double x_value) const;
};

// Beamformer design products of one trial.
struct DesignedBeams {
    std::vector<GroupBeams> beams;
    bool converged = true;
};

DesignedBeams design_steering(const ScenarioConfig& cfg, const UserScenario& scn, bool far_field);
DesignedBeams design_splitting(const ScenarioConfig& cfg, const UserScenario& scn);
DesignedBeams design_zf(const ScenarioConfig& cfg, const UserScenario& scn);

struct SchemeEvaluation {
    std::vector<double> rate_nu, rate_fu;
    double sum_rate = 0.0;
    bool feasible = true;
};

// Power allocation always uses the realized effective gains (the beams carry
// any location-estimation error; the scalar gains are measurable afterwards).
SchemeEvaluation evaluate_noma(const ScenarioConfig& cfg, const UserScenario& true_scn,
                               const std::vector<GroupBeams>& beams, double p_max_mw);
SchemeEvaluation evaluate_fdma(const ScenarioConfig& cfg, const UserScenario& true_scn,
                               const std::vector<GroupBeams>& beams, double p_max_mw);
SchemeEvaluation evaluate_tdma(const ScenarioConfig& cfg, const UserScenario& true_scn,
                               const std::vector<GroupBeams>& beams, double p_max_mw);

SweepResult run_sweep(const ScenarioConfig& cfg, const SweepSpec& spec);

struct ConvergenceReport {
    ConvergenceTrace steering;
    bool steering_converged = false;
    std::vector<double> ao_objective;
    std::vector<std::vector<double>> sca_objectives;
    bool splitting_converged = false;
};

ConvergenceReport run_convergence(const ScenarioConfig& cfg);

// Worker count: min(NFNOMA_THREADS if set, hardware concurrency, jobs).
int worker_count(int jobs);

}  // namespace nfnoma
