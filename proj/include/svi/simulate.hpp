// Time-stepping of the constrained oscillator and of its eps-jump
// approximation, coupled on one Brownian path.
#pragma once

#include "svi/brownian.hpp"
#include "svi/model.hpp"

#include <cstddef>
#include <vector>

namespace svi {

struct Trajectory {
    double dt = 0.0;
    std::vector<State> states;   // includes the initial state
    std::vector<Regime> regimes; // same length
    double time(std::size_t i) const { return dt * static_cast<double>(i); }
    std::size_t size() const { return states.size(); }
};

struct JumpRecord {
    double tau;            // jump time (grid point)
    int sigma;             // sign of z just before the jump
    std::size_t index_n;   // 1-based jump ordinal
    std::size_t grid_index;
};

struct CoupledRun {
    Trajectory baseline;
    Trajectory jumped;
    std::vector<JumpRecord> jumps;
    std::size_t n_jumps = 0;
    double eps = 0.0;
};

// One projection step: semi-implicit in the sense that the z-update uses the
// fresh velocity, which keeps the plastic hold exact on the boundary.
//   y' = y - (c0 y + k z) dt + dw,   z' = clamp(z + y' dt, -Y, Y)
State step_svi(const State& s, double dw, double dt, const OscillatorParams& p);

Trajectory simulate_baseline(const State& init, const BrownianPath& path,
                             const OscillatorParams& p);

// Both processes consume the identical increments. The jumped process is
// restarted at (0, sigma (Y-eps)) at each discrete plastic exit: previous
// state plastic with boundary sign sigma and the new velocity satisfies
// sigma y' <= 0.
CoupledRun simulate_coupled(const State& init, const BrownianPath& path,
                            const OscillatorParams& p, double eps);

// max over grid points of |y - y_eps|^2 + k |z - z_eps|^2
double sup_metric(const CoupledRun& run, const OscillatorParams& p);

// Streaming variant for Monte Carlo sweeps: no trajectory storage.
struct CoupledMetrics {
    double sup_metric = 0.0;
    std::size_t n_jumps = 0;
};
CoupledMetrics coupled_metrics(const State& init, const BrownianPath& path,
                               const OscillatorParams& p, double eps);

// Discrete analogue of the inter-jump energy inequality
//   |y(t_{n+1})|^2 - |y(t_n)|^2
//     + k (z(t_{n+1}) - s_{n+1} Y)^2 - k (z(t_n) - s_n Y)^2
//     + 2 c0 sum |y - y_eps|^2 dt   <=   k eps^2 + slack
// checked between consecutive jumps; margin = LHS - k eps^2.
struct EnergyReport {
    std::size_t intervals = 0;
    double worst_margin = 0.0; // max over intervals, 0 when none
    double slack = 0.0;
    bool pass = true;
};
EnergyReport check_energy_inequality(const CoupledRun& run, const OscillatorParams& p,
                                     double slack);

// Maximal plastic segments of a trajectory and the plastic deformation
// accumulated over each (integral of y dt while held at the boundary).
struct PlasticSegment {
    std::size_t begin = 0, end = 0; // [begin, end) grid indices
    int sigma = 0;
    double duration = 0.0;
    double deformation = 0.0;
};

struct PhaseSummary {
    std::vector<PlasticSegment> segments;
    double total_plastic_time = 0.0;
};

PhaseSummary phase_statistics(const Trajectory& traj);

} // namespace svi
