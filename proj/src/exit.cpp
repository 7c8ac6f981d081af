#include "svi/exit.hpp"

#include "svi/gaussian.hpp"
#include "svi/parallel.hpp"
#include "svi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace svi {

void Grid2D::validate() const
{
    if (!(y_min < 0.0) || !(y_max > 0.0))
        throw std::invalid_argument("Grid2D: need y_min < 0 < y_max");
    if (n_y < 16 || n_z < 16 || n_t < 16)
        throw std::invalid_argument("Grid2D: need n_y, n_z, n_t >= 16");
    if (!(T > 0.0))
        throw std::invalid_argument("Grid2D: need T > 0");
}

double GridFunction::boundary_at(bool top_line, double y, double t) const
{
    const std::vector<double>& sheet = top_line ? top : bottom;
    const double dy = grid.dy();
    const double dtau = grid.dtau();
    double fi = (y - grid.y_min) / dy;
    double fm = (grid.T - t) / dtau;
    fi = std::clamp(fi, 0.0, static_cast<double>(grid.n_y - 1));
    fm = std::clamp(fm, 0.0, static_cast<double>(grid.n_t));
    const int i0 = std::min(static_cast<int>(fi), grid.n_y - 2);
    const int m0 = std::min(static_cast<int>(fm), grid.n_t - 1);
    const double wi = fi - i0, wm = fm - m0;
    auto v = [&](int m, int i) { return sheet[static_cast<std::size_t>(m) * grid.n_y + i]; };
    return (1.0 - wm) * ((1.0 - wi) * v(m0, i0) + wi * v(m0, i0 + 1)) +
           wm * ((1.0 - wi) * v(m0 + 1, i0) + wi * v(m0 + 1, i0 + 1));
}

namespace {

// Thomas solve of a tridiagonal system with rows (a_i, b_i, c_i); in-place on
// rhs, scratch holds the forward-swept upper diagonal.
void solve_tridiag(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& c, std::vector<double>& rhs,
                   std::vector<double>& scratch)
{
    const std::size_t n = rhs.size();
    scratch[0] = c[0] / b[0];
    rhs[0] = rhs[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = 1.0 / (b[i] - a[i] * scratch[i - 1]);
        scratch[i] = c[i] * m;
        rhs[i] = (rhs[i] - a[i] * rhs[i - 1]) * m;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] -= scratch[i] * rhs[i + 1];
}

} // namespace

GridFunction solve_u(const Grid2D& grid, const OscillatorParams& p, const SolveOptions& opt)
{
    grid.validate();
    const int ny = grid.n_y, nz = grid.n_z, nt = grid.n_t;
    const double dy = grid.dy(), dz = grid.dz(p.Y), dtau = grid.dtau();

    // CFL bound of the explicit upwind part.
    const double ay_max = p.c0 * std::max(std::abs(grid.y_min), grid.y_max) + p.k * p.Y;
    const double az_max = std::max(std::abs(grid.y_min), grid.y_max);
    const double rate = ay_max / dy + az_max / dz;
    if (dtau * rate > 1.0) {
        const int suggested = static_cast<int>(std::ceil(grid.T * rate * 1.05));
        throw std::runtime_error("solve_u: CFL violation in the explicit upwind part; "
                                 "increase n_t to at least " + std::to_string(suggested));
    }

    GridFunction out;
    out.grid = grid;
    out.Y = p.Y;
    out.retain_all = opt.retain_all;

    const std::size_t slab = static_cast<std::size_t>(ny) * nz;
    std::vector<double> v(slab, 1.0), vnew(slab, 0.0);
    std::vector<double> y(ny), z(nz);
    for (int i = 0; i < ny; ++i) y[i] = grid.y_min + dy * i;
    for (int j = 0; j < nz; ++j) z[j] = -p.Y + dz * j;

    // Absorbing half-lines (y = 0 included on both, matching the continuum
    // value and keeping the discrete mirror symmetry exact).
    auto pinned = [&](int i, int j) {
        return (j == nz - 1 && y[i] >= 0.0) || (j == 0 && y[i] <= 0.0);
    };
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(j) * ny + i; };

    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < ny; ++i)
            if (pinned(i, j)) v[idx(i, j)] = 0.0;

    out.top.resize(static_cast<std::size_t>(nt + 1) * ny);
    out.bottom.resize(static_cast<std::size_t>(nt + 1) * ny);
    if (opt.retain_all) out.slabs.resize(static_cast<std::size_t>(nt + 1) * slab);
    std::vector<int> keep_index(opt.keep_times.size());
    for (std::size_t s = 0; s < opt.keep_times.size(); ++s) {
        const int m = static_cast<int>(std::lround((grid.T - opt.keep_times[s]) / dtau));
        keep_index[s] = std::clamp(m, 0, nt);
    }
    out.kept_times.resize(opt.keep_times.size());
    out.kept_slabs.resize(opt.keep_times.size());
    auto record = [&](int m) {
        for (int i = 0; i < ny; ++i) {
            out.top[static_cast<std::size_t>(m) * ny + i] = v[idx(i, nz - 1)];
            out.bottom[static_cast<std::size_t>(m) * ny + i] = v[idx(i, 0)];
        }
        if (opt.retain_all)
            std::copy(v.begin(), v.end(), out.slabs.begin() + static_cast<std::size_t>(m) * slab);
        for (std::size_t s = 0; s < keep_index.size(); ++s)
            if (keep_index[s] == m) {
                out.kept_times[s] = grid.T - dtau * m;
                out.kept_slabs[s] = v;
            }
    };
    record(0);

    const double beta = 0.5 * dtau / (dy * dy);
    std::vector<double> lo(ny), di(ny), up(ny), rhs(ny), scratch(ny);

    double min_u = 1.0, max_u = 0.0, mono = 0.0;

    for (int m = 1; m <= nt; ++m) {
        // Explicit upwind advection: drift (c0 y + k z) in y, transport y in z.
        for (int j = 0; j < nz; ++j) {
            for (int i = 0; i < ny; ++i) {
                if (pinned(i, j)) {
                    vnew[idx(i, j)] = 0.0;
                    continue;
                }
                const double vc = v[idx(i, j)];
                const double ayd = p.c0 * y[i] + p.k * z[j];
                double adv = 0.0;
                if (ayd > 0.0) {
                    const double vl = (i > 0) ? v[idx(i - 1, j)] : vc;
                    adv -= ayd * (vc - vl) / dy;
                } else if (ayd < 0.0) {
                    const double vr = (i < ny - 1) ? v[idx(i + 1, j)] : vc;
                    adv -= ayd * (vr - vc) / dy;
                }
                if (y[i] > 0.0) {
                    // moving toward z = +Y: read upward (Dirichlet row there)
                    adv += y[i] * (v[idx(i, j + 1)] - vc) / dz;
                } else if (y[i] < 0.0) {
                    adv += y[i] * (vc - v[idx(i, j - 1)]) / dz;
                }
                vnew[idx(i, j)] = vc + dtau * adv;
            }
        }
        // Implicit diffusion (1/2) u_yy row by row; Neumann via mirror ghost.
        for (int j = 0; j < nz; ++j) {
            for (int i = 0; i < ny; ++i) {
                if (pinned(i, j)) {
                    lo[i] = 0.0; di[i] = 1.0; up[i] = 0.0; rhs[i] = 0.0;
                    continue;
                }
                rhs[i] = vnew[idx(i, j)];
                if (i == 0) {
                    lo[i] = 0.0; di[i] = 1.0 + 2.0 * beta; up[i] = -2.0 * beta;
                } else if (i == ny - 1) {
                    lo[i] = -2.0 * beta; di[i] = 1.0 + 2.0 * beta; up[i] = 0.0;
                } else {
                    lo[i] = -beta; di[i] = 1.0 + 2.0 * beta; up[i] = -beta;
                }
            }
            solve_tridiag(lo, di, up, rhs, scratch);
            for (int i = 0; i < ny; ++i) vnew[idx(i, j)] = rhs[i];
        }
        for (std::size_t q = 0; q < slab; ++q) {
            mono = std::max(mono, vnew[q] - v[q]);
            min_u = std::min(min_u, vnew[q]);
            max_u = std::max(max_u, vnew[q]);
        }
        v.swap(vnew);
        record(m);
    }

    out.u0 = std::move(v);
    out.min_u = min_u;
    out.max_u = max_u;
    out.monotonicity_violation = mono;

    // Mirror asymmetry of the t = 0 slab (meaningful on symmetric grids).
    double asym = 0.0;
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < ny; ++i)
            asym = std::max(std::abs(out.u0[idx(i, j)] - out.u0[idx(ny - 1 - i, nz - 1 - j)]),
                            asym);
    out.mirror_asymmetry = asym;

    // One-sided u_y(0-, Y, 0): from the free side of the top line at t = 0.
    const int i0 = static_cast<int>(std::round((0.0 - grid.y_min) / dy));
    if (i0 > 0 && i0 < ny)
        out.corner_gradient = (out.u0[idx(i0, nz - 1)] - out.u0[idx(i0 - 1, nz - 1)]) / dy;
    return out;
}

double u_probe(const GridFunction& u, double eps)
{
    const double yq = 0.0, zq = u.Y - eps;
    if (!(eps > 0.0) || !(eps < 2.0 * u.Y))
        throw std::invalid_argument("u_probe: probe point outside the grid");
    const double dy = u.grid.dy(), dz = u.grid.dz(u.Y);
    double fi = (yq - u.grid.y_min) / dy;
    double fj = (zq + u.Y) / dz;
    if (fi < 0.0 || fi > u.grid.n_y - 1 || fj < 0.0 || fj > u.grid.n_z - 1)
        throw std::invalid_argument("u_probe: probe point outside the grid");
    const int i0 = std::min(static_cast<int>(fi), u.grid.n_y - 2);
    const int j0 = std::min(static_cast<int>(fj), u.grid.n_z - 2);
    const double wi = fi - i0, wj = fj - j0;
    return (1.0 - wj) * ((1.0 - wi) * u.at0(i0, j0) + wi * u.at0(i0 + 1, j0)) +
           wj * ((1.0 - wi) * u.at0(i0, j0 + 1) + wi * u.at0(i0 + 1, j0 + 1));
}

Trajectory elastic_flow(double y0, double z0, const BrownianPath& path,
                        const OscillatorParams& p)
{
    const std::size_t n = path.increments.size();
    Trajectory traj;
    traj.dt = path.spec.dt;
    traj.states.reserve(n + 1);
    traj.states.push_back(State{y0, z0});
    double yv = y0, zv = z0;
    for (std::size_t i = 0; i < n; ++i) {
        yv = yv - (p.c0 * yv + p.k * zv) * path.spec.dt + path.increments[i];
        zv = zv + yv * path.spec.dt;
        traj.states.push_back(State{yv, zv});
    }
    // Regime labels are not meaningful for the unconstrained flow.
    traj.regimes.assign(traj.states.size(), Regime::Elastic);
    return traj;
}

ThetaEstimate mc_exit_prob(double eps, double T, std::size_t n_paths, double dt,
                           std::uint64_t seed, const OscillatorParams& p)
{
    if (!(eps > 0.0) || !(eps < p.Y))
        throw std::invalid_argument("mc_exit_prob: eps must lie in (0, Y)");
    const std::size_t n_steps = PathSpec{T, dt, seed, 0}.n_steps();
    std::vector<std::uint8_t> survived(n_paths, 0);
    parallel_for(n_paths, [&](std::size_t path) {
        NormalStream stream(seed, path, 0);
        const double sd = std::sqrt(dt);
        double yv = 0.0, zv = p.Y - eps;
        bool alive = true;
        for (std::size_t i = 0; i < n_steps; ++i) {
            yv = yv - (p.c0 * yv + p.k * zv) * dt + sd * stream.normal(i);
            zv = zv + yv * dt;
            if (std::abs(zv) >= p.Y) {
                alive = false;
                break;
            }
        }
        survived[path] = alive ? 1 : 0;
    });
    std::size_t count = 0;
    for (std::uint8_t s : survived) count += s;
    ThetaEstimate est;
    est.n_paths = n_paths;
    est.p_survive = static_cast<double>(count) / static_cast<double>(n_paths);
    est.std_error = std::sqrt(est.p_survive * (1.0 - est.p_survive) / static_cast<double>(n_paths));
    est.eps = eps;
    est.T = T;
    est.dt = dt;
    est.seed = seed;
    return est;
}

namespace {

// y-marginal of p0 on the line z = s*Y: Gaussian with conditional mean and
// variance, log-prefactor carrying the z-residual mass. Stable where the raw
// density under/overflows.
struct BoundaryLine {
    double log_pref;  // log of the z-factor and normalization
    double mean;      // conditional y-mean on the line
    double sd;        // sqrt(1-rho^2) sigma_y
    // tilt exponent alpha + beta*y of the eps-ratio factor on the line
    double alpha;
    double beta;
};

BoundaryLine boundary_line(double t, int line_sign, double eps, const OscillatorParams& p)
{
    const AuxFunctions a = aux(t, p);
    const double sy = std::sqrt(sigma_y2(t, p));
    const double sz = std::sqrt(sigma_z2(t, p));
    const double rho = sigma_yz(t, p) / (sy * sz);
    const double omr2 = 1.0 - rho * rho;

    BoundaryLine bl{};
    bl.sd = std::sqrt(omr2) * sy;
    const double zres = (line_sign > 0) ? p.Y * one_minus_f(t, p)   // Y - m0
                                        : -p.Y * (1.0 + a.f);       // -Y - m0
    bl.mean = -p.Y * a.g + rho * zres * sy / sz;
    bl.log_pref = -0.5 * zres * zres / (sz * sz) -
                  std::log(2.0 * M_PI * sy * sz * std::sqrt(omr2));
    const double denom = omr2 * sy * sz;
    const double yhl = (line_sign > 0) ? p.Y * a.h : p.Y * a.l;
    bl.alpha = -0.5 * eps * eps * a.A - eps * yhl / denom;
    bl.beta = eps * a.r / denom;
    return bl;
}

// integral over the line of  y * u(y, sY, t) * p0 * (exp(tilt) - 1)
double line_integral_at_t(const GridFunction& u, double t, int line_sign, double eps,
                          const OscillatorParams& p)
{
    const BoundaryLine bl = boundary_line(t, line_sign, eps, p);
    // y-window: union of the plain and tilted Gaussian supports.
    const double tilted_mean = bl.mean + bl.beta * bl.sd * bl.sd;
    const double lo_g = std::min(bl.mean, tilted_mean) - 8.5 * bl.sd;
    const double hi_g = std::max(bl.mean, tilted_mean) + 8.5 * bl.sd;
    double lo, hi;
    if (line_sign > 0) {           // y < 0 half-line
        lo = std::max(lo_g, u.grid.y_min);
        hi = std::min(0.0, hi_g);
    } else {                       // y > 0 half-line
        lo = std::max(0.0, lo_g);
        hi = std::min(hi_g, u.grid.y_max);
    }
    if (!(lo < hi)) return 0.0;

    auto integrand = [&](double yv) {
        const double d = (yv - bl.mean) / bl.sd;
        const double lg = bl.log_pref - 0.5 * d * d;
        const double tilt = bl.alpha + bl.beta * yv;
        const double diff = std::exp(lg + tilt) - std::exp(lg);
        if (diff == 0.0) return 0.0;
        return yv * u.boundary_at(line_sign > 0, yv, t) * diff;
    };
    return integrate_gl(integrand, lo, hi, 48);
}

} // namespace

LemmaIntegrals lemma1_integrals(const GridFunction& u, double eps, const OscillatorParams& p)
{
    LemmaIntegrals li;
    if (eps == 0.0) return li;
    if (!(eps > 0.0) || !(eps < p.Y))
        throw std::invalid_argument("lemma1_integrals: eps must lie in [0, Y)");
    const double T = u.grid.T;

    // H: mass defect of the tilted density over D at t = T.
    {
        const GaussMoments m0 = moments(T, 0.0, p);
        const GaussMoments me = moments(T, eps, p);
        const double sy = std::sqrt(m0.var_y);
        const double lo = std::min(m0.q, me.q) - 8.5 * sy;
        const double hi = std::max(m0.q, me.q) + 8.5 * sy;
        auto inner = [&](double zv) {
            return integrate_gl(
                [&](double yv) {
                    return density_p(yv, zv, T, eps, p) - density_p(yv, zv, T, 0.0, p);
                },
                lo, hi, 96);
        };
        li.H = integrate_gl(inner, -p.Y, p.Y, 64);
    }

    // I and J: boundary-line integrals on a geometric t-mesh refined toward
    // t = 0 (edges T 2^-j down to 1e-6; the remainder below is dominated by
    // the exponential suppression of the tilt for y < 0).
    std::vector<double> edges;
    double e = T;
    while (e > 1e-6) {
        edges.push_back(e);
        e *= 0.5;
    }
    edges.push_back(std::min(1e-6, e * 2.0));

    double I = 0.0, J = 0.0;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double hi_t = edges[s], lo_t = edges[s + 1];
        I += integrate_gl([&](double t) { return line_integral_at_t(u, t, +1, eps, p); },
                          lo_t, hi_t, 8);
        J += integrate_gl([&](double t) { return line_integral_at_t(u, t, -1, eps, p); },
                          lo_t, hi_t, 8);
    }
    li.I = I;
    li.J = -J;
    return li;
}

BlowupTable blowup_diagnostic(const std::vector<double>& eps_list, const GridFunction& u,
                              const OscillatorParams& p)
{
    if (eps_list.size() < 2)
        throw std::invalid_argument("blowup_diagnostic: need at least two eps values");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (!(eps_list[i] > eps_list[i + 1]))
            throw std::invalid_argument("blowup_diagnostic: eps_list must be strictly decreasing");

    BlowupTable table;
    for (double eps : eps_list) {
        const LemmaIntegrals li = lemma1_integrals(u, eps, p);
        table.rows.push_back(BlowupRow{eps, li.H / eps, li.I / eps, li.J / eps,
                                       u_probe(u, eps) / eps});
    }
    table.I_increasing = table.u_increasing = true;
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        if (!(table.rows[i + 1].I_over_eps > table.rows[i].I_over_eps))
            table.I_increasing = false;
        if (!(table.rows[i + 1].u_over_eps > table.rows[i].u_over_eps))
            table.u_increasing = false;
    }
    auto variation = [&](auto field) {
        const std::size_t n = table.rows.size();
        const std::size_t first = (n >= 3) ? n - 3 : 0;
        double lo = 0.0, hi = 0.0, scale = 0.0;
        for (std::size_t i = first; i < n; ++i) {
            const double v = field(table.rows[i]);
            if (i == first) { lo = hi = v; }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            scale = std::max(scale, std::abs(v));
        }
        return (scale > 0.0) ? (hi - lo) / scale : 0.0;
    };
    table.J_variation = variation([](const BlowupRow& r) { return r.J_over_eps; });
    table.H_variation = variation([](const BlowupRow& r) { return r.H_over_eps; });
    table.pass = table.I_increasing && table.u_increasing && table.J_variation < 0.20 &&
                 table.H_variation < 0.20;
    return table;
}

} // namespace svi
