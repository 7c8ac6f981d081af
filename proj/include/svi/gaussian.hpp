// Closed-form Gaussian layer of the elastic process started on the boundary:
// moments, transition density, the exact eps-tilting identity between the
// shifted and unshifted densities, auxiliary boundary functions, and the
// small-t expansion checks.
#pragma once

#include "svi/model.hpp"

#include <string>
#include <vector>

namespace svi {

// Moments of (y(t), z(t)) for the unconstrained linear oscillator started at
// (0, Y-eps). Variances and covariance do not depend on eps. At t = 0 the
// distribution is a point mass; rho is reported as 0 there.
struct GaussMoments {
    double m;      // E z(t)
    double q;      // E y(t)
    double var_z;  // sigma_z^2(t)
    double var_y;  // sigma_y^2(t)
    double cov_yz; // sigma_yz(t)
    double rho;    // cov / (sigma_y sigma_z), in (-1,1) for t > 0
};

GaussMoments moments(double t, double eps, const OscillatorParams& p);

// The individual second moments (closed antiderivatives; sigma_z^2 switches
// to an exact power series at small t where the antiderivative cancels).
double sigma_y2(double t, const OscillatorParams& p);
double sigma_z2(double t, const OscillatorParams& p);
double sigma_yz(double t, const OscillatorParams& p);

// Unit-amplitude mean responses: E z = (Y-eps) f(t), E y = -(Y-eps) g(t)
// up to the k/omega factor folded into g. f(0)=1, g(0)=0, f' = -g.
double mean_response_f(double t, const OscillatorParams& p);
double mean_response_g(double t, const OscillatorParams& p);
// 1 - f(t) evaluated without cancellation (~ k t^2/2 at small t).
double one_minus_f(double t, const OscillatorParams& p);

// Auxiliary functions of the density-tilting identity and the boundary-line
// factorization:
//   A = (g^2/sy^2 + f^2/sz^2 + 2 rho g f/(sy sz)) / (1-rho^2)  (>= 0)
//   r = g sz/sy + rho f,   s = f sy/sz + rho g
//   h = -g r + (1-f) s,    l = -g r - (1+f) s
//   q_tilde0 = q0 + rho Y (1-f) sy/sz   (conditional y-mean on z = Y)
struct AuxFunctions {
    double f, g, A, r, s, h, l, q_tilde0;
};

AuxFunctions aux(double t, const OscillatorParams& p);

// Leading coefficient of h(t) ~ C h t^2 as t -> 0: (sqrt(3)/4)(c0 k / 3).
double h_small_t_coefficient(const OscillatorParams& p);

// Bivariate normal transition density of the boundary-started elastic
// process, and its logarithm. t must be positive (Dirac at t = 0).
double density_p(double y, double z, double t, double eps, const OscillatorParams& p);
double log_density_p(double y, double z, double t, double eps, const OscillatorParams& p);

// Exact tilting factor: density_p(y,z,t,eps) =
//   density_p(y,z,t,0) * exp(log_density_ratio_factor(y,z,t,eps)).
double density_ratio_factor(double y, double z, double t, double eps, const OscillatorParams& p);
double log_density_ratio_factor(double y, double z, double t, double eps, const OscillatorParams& p);

// log p_eps - (log p_0 + tilt exponent), accumulated in extended precision so
// the residual is meaningful even where the quadratic forms reach ~1e5 and
// the densities themselves underflow. Zero in exact arithmetic.
double density_ratio_log_residual(double y, double z, double t, double eps,
                                  const OscillatorParams& p);

// Small-t expansion verification. For each tracked expansion the report
// carries sup_t |exact - series| / scale(t) over the given grid and a pass
// flag against a frozen bound (4x the high-precision sup of the true
// remainder ratio over [1e-4, 1e-2], plus double-rounding allowance).
struct ExpansionCheck {
    std::string name;
    double sup_ratio;
    double bound;
    bool pass;
};

struct ExpansionPoint {
    std::string name;
    double t, exact, series, ratio;
};

struct ExpansionReport {
    std::vector<ExpansionCheck> checks;
    std::vector<ExpansionPoint> points;
    bool all_pass;
};

ExpansionReport expansions_check(const std::vector<double>& t_grid, const OscillatorParams& p);

// Integral of y^3 p0(y, Y, t) over [-eta, 0] via the boundary-line
// factorization (conditional-normal change of variables; closed in erf).
// Tends to -sqrt(3)/(8 pi) as t -> 0, eta-independently.
double boundary_moment_y3(double eta, double t, const OscillatorParams& p);

} // namespace svi
