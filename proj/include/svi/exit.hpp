// Survival probability u(y,z,t) = P[theta(y,z) > T-t] of the unconstrained
// elastic process before hitting |z| = Y: backward finite-difference solve,
// Monte Carlo cross-check, and the boundary-integral decomposition of
// u(0, Y-eps, 0) with its small-eps blow-up diagnostics.
#pragma once

#include "svi/brownian.hpp"
#include "svi/model.hpp"
#include "svi/simulate.hpp"

#include <cstdint>
#include <vector>

namespace svi {

struct Grid2D {
    double y_min = -6.0;
    double y_max = 6.0;
    int n_y = 241;  // nodes in y (inclusive ends)
    int n_z = 161;  // nodes in z spanning [-Y, Y]
    int n_t = 2000; // time slabs on [0, T]
    double T = 1.0;

    void validate() const;
    double dy() const { return (y_max - y_min) / (n_y - 1); }
    double dz(double Y) const { return 2.0 * Y / (n_z - 1); }
    double dtau() const { return T / n_t; }
};

// Backward solve output. Full 3-D storage is kept only on request (small test
// grids); production solves retain the t = 0 slab, the absorbing-line sheets
// u(y, +-Y, t_m) needed by the boundary integrals, and scheme diagnostics.
struct GridFunction {
    Grid2D grid;
    double Y = 1.0;
    std::vector<double> u0;           // t = 0 slab, index j*n_y + i
    std::vector<double> top;          // u(y_i, +Y, t_m), index m*n_y + i
    std::vector<double> bottom;       // u(y_i, -Y, t_m)
    std::vector<double> slabs;        // optional full storage, index (m, j, i)
    bool retain_all = false;
    std::vector<double> kept_times;   // requested slice times actually stored
    std::vector<std::vector<double>> kept_slabs;

    double min_u = 0.0, max_u = 1.0;
    // max over nodes/steps of the backward-time increase (monotone scheme
    // keeps this at roundoff level)
    double monotonicity_violation = 0.0;
    double mirror_asymmetry = 0.0;    // max |u0(y,z) - u0(-y,-z)|
    double corner_gradient = 0.0;     // one-sided u_y(0-, Y, 0) estimate

    double y_of(int i) const { return grid.y_min + grid.dy() * i; }
    double z_of(int j) const { return -Y + grid.dz(Y) * j; }
    double at0(int i, int j) const { return u0[static_cast<std::size_t>(j) * grid.n_y + i]; }
    // u(y, +-Y, t) from the boundary sheets, bilinear in (y, t)
    double boundary_at(bool top_line, double y, double t) const;
};

struct SolveOptions {
    bool retain_all = false;
    std::vector<double> keep_times; // snap to the nearest slab and store it
};

// IMEX sweep: implicit tridiagonal diffusion in y, explicit first-order
// upwind for the drift and the z-transport, homogeneous Neumann at
// y = y_min/y_max, Dirichlet u = 0 on the absorbing half-lines (y >= 0 at
// z = Y, y <= 0 at z = -Y). Throws std::runtime_error (with a suggested n_t)
// when the explicit part violates its CFL bound.
GridFunction solve_u(const Grid2D& grid, const OscillatorParams& p,
                     const SolveOptions& opt = {});

// u(0, Y-eps, 0), bilinear between grid nodes; throws when outside the grid.
double u_probe(const GridFunction& u, double eps);

struct ThetaEstimate {
    double p_survive = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double eps = 0.0, T = 0.0, dt = 0.0;
    std::uint64_t seed = 0;
};

// Unconstrained Euler trajectory (no clamp) of the linear oscillator.
Trajectory elastic_flow(double y0, double z0, const BrownianPath& path,
                        const OscillatorParams& p);

// Fraction of elastic paths from (0, Y-eps) with |z| < Y at every grid point
// of [0, T]; per-path counter-based substreams, thread-count independent.
ThetaEstimate mc_exit_prob(double eps, double T, std::size_t n_paths, double dt,
                           std::uint64_t seed, const OscillatorParams& p);

// The three terms of the identity u(0, Y-eps, 0) = H + I + J:
//   H: mass defect of the tilted density at t = T over D,
//   I: absorbing-line integral on z = +Y (y < 0), singular near t = 0,
//   J: absorbing-line integral on z = -Y (y > 0).
// t-integration on a geometric mesh refined toward t = 0 (down to 1e-6),
// y-integration truncated at +-8 sigma_y(t) around the conditional mean.
struct LemmaIntegrals {
    double H = 0.0, I = 0.0, J = 0.0;
    double sum() const { return H + I + J; }
};

LemmaIntegrals lemma1_integrals(const GridFunction& u, double eps, const OscillatorParams& p);

struct BlowupRow {
    double eps;
    double H_over_eps, I_over_eps, J_over_eps, u_over_eps;
};

struct BlowupTable {
    std::vector<BlowupRow> rows;  // eps decreasing
    bool I_increasing = false;    // along decreasing eps
    bool u_increasing = false;
    double J_variation = 0.0;     // relative spread over the last three rows
    double H_variation = 0.0;
    bool pass = false;            // trends + variations < 20%
};

BlowupTable blowup_diagnostic(const std::vector<double>& eps_list, const GridFunction& u,
                              const OscillatorParams& p);

} // namespace svi
