// Experiment orchestration: the convergence sweep of the eps-jump process and
// the jump-count census, both on paired path sets.
#pragma once

#include "svi/exit.hpp"
#include "svi/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace svi {

struct ExperimentConfig {
    double c0 = 1.0, k = 1.0, Y = 1.0;
    double T = 4.0;
    double dt = 1e-3;
    std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
    std::size_t n_paths = 10000;
    std::uint64_t seed = 20240613;
    std::string output_dir = ".";

    // Returns the validated oscillator parameters; throws on any violated
    // invariant (strictly decreasing eps_list inside (0, Y), n_paths >= 100,
    // dt <= 10 min(eps)^2).
    OscillatorParams validate() const;
};

// Strict JSON loader: the object must use exactly the config field names
// (params nested as {"c0","k","Y"}); unknown keys are errors.
ExperimentConfig load_config(const std::string& path);

struct ConvergenceRow {
    double eps;
    double M_over_eps;      // E[sup metric]/eps
    double M_stderr;        // standard error of that estimate
    double mean_jumps;      // E[N_T^eps]
    double jumps_stderr;
    double eps_times_jumps; // eps E[N_T^eps]
};

// One coupled run per (path, eps) with the identical path set across eps
// values (paired design); deterministic given the config.
std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg);

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

struct CensusRow {
    double eps;
    std::map<std::size_t, std::size_t> histogram; // N_T^eps -> count
    double mean_jumps = 0.0;
    double jumps_stderr = 0.0;
    double u_value = 0.0;     // u(0, Y-eps, 0) from the PDE solve
    double bound = 0.0;       // 1/u
    bool bound_ok = false;    // mean <= bound within 3 stderr
};

// Jump-count distribution per eps over the paired path set, checked against
// the renewal bound E N <= 1/u(0, Y-eps, 0) with u from the supplied solve.
std::vector<CensusRow> run_jump_census(const ExperimentConfig& cfg, const GridFunction& u);

void write_census_csv(const std::string& path, const std::vector<CensusRow>& rows);

// Trajectory dump of one coupled run (t, y, z, regime, y_eps, z_eps, jump_flag).
void write_trajectory_csv(const std::string& path, const CoupledRun& run);

} // namespace svi
