// Command-line driver: simulation, convergence sweeps, jump census, the
// exit-probability solvers and the analytic checks, all emitting CSV.
#include "svi/csv.hpp"
#include "svi/exit.hpp"
#include "svi/gaussian.hpp"
#include "svi/harness.hpp"
#include "svi/simulate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace svi;

struct CliState {
    ExperimentConfig cfg;
    std::string config_path;
    // PDE grid knobs (exit-prob / pde / census / blowup)
    int ny = 241, nz = 161, nt = 2000;
    double ymax = 6.0;
    double mc_dt = 1e-4;
    std::size_t mc_paths = 100000;
    std::vector<double> slice_times;
    std::uint64_t path_index = 0;
};

std::string out_path(const CliState& st, const std::string& name)
{
    std::filesystem::create_directories(st.cfg.output_dir);
    return (std::filesystem::path(st.cfg.output_dir) / name).string();
}

Grid2D make_grid(const CliState& st, double T)
{
    Grid2D g;
    g.y_min = -st.ymax;
    g.y_max = st.ymax;
    g.n_y = st.ny;
    g.n_z = st.nz;
    g.n_t = st.nt;
    g.T = T;
    return g;
}

int cmd_simulate(const CliState& st)
{
    const OscillatorParams p = st.cfg.validate();
    const BrownianPath path =
        generate(PathSpec{st.cfg.T, st.cfg.dt, st.cfg.seed, st.path_index});
    const CoupledRun run = simulate_coupled(State{0.0, 0.0}, path, p, st.cfg.eps_list.front());
    write_trajectory_csv(out_path(st, "trajectory.csv"), run);
    const PhaseSummary ph = phase_statistics(run.jumped);
    std::printf("simulate: eps=%g jumps=%zu plastic_segments=%zu plastic_time=%g\n",
                st.cfg.eps_list.front(), run.n_jumps, ph.segments.size(),
                ph.total_plastic_time);
    return 0;
}

int cmd_converge(const CliState& st)
{
    const auto rows = run_convergence(st.cfg);
    write_convergence_csv(out_path(st, "converge.csv"), rows);
    for (const auto& r : rows)
        std::printf("eps=%-8g M/eps=%.6g (se %.2g)  E[N]=%.6g (se %.2g)  eps*E[N]=%.6g\n",
                    r.eps, r.M_over_eps, r.M_stderr, r.mean_jumps, r.jumps_stderr,
                    r.eps_times_jumps);
    return 0;
}

int cmd_census(const CliState& st)
{
    const OscillatorParams p = st.cfg.validate();
    const GridFunction u = solve_u(make_grid(st, st.cfg.T), p);
    const auto rows = run_jump_census(st.cfg, u);
    write_census_csv(out_path(st, "census.csv"), rows);
    bool all_ok = true;
    for (const auto& r : rows) {
        std::printf("eps=%-8g E[N]=%.4g (se %.2g)  u=%.4g  1/u=%.4g  bound_ok=%d\n", r.eps,
                    r.mean_jumps, r.jumps_stderr, r.u_value, r.bound, r.bound_ok ? 1 : 0);
        all_ok = all_ok && r.bound_ok;
    }
    return all_ok ? 0 : 2;
}

int cmd_exit_prob(const CliState& st)
{
    const OscillatorParams p = st.cfg.validate();
    const GridFunction u = solve_u(make_grid(st, st.cfg.T), p);
    CsvWriter csv(out_path(st, "exit_prob.csv"));
    csv.row("eps,T,n_paths,dt,seed,p_survive,std_error,u_pde");
    bool agree = true;
    for (double eps : st.cfg.eps_list) {
        const ThetaEstimate est = mc_exit_prob(eps, st.cfg.T, st.mc_paths, st.mc_dt,
                                               st.cfg.seed, p);
        const double updE = u_probe(u, eps);
        csv.cells(eps, st.cfg.T, static_cast<unsigned long long>(est.n_paths), est.dt,
                  static_cast<unsigned long long>(est.seed), est.p_survive, est.std_error,
                  updE);
        const double tol = std::max(3.0 * est.std_error, 1e-2);
        const double gap = std::abs(est.p_survive - updE);
        agree = agree && gap <= tol;
        std::printf("eps=%-8g MC=%.5f (se %.2g)  PDE=%.5f  |gap|=%.4g tol=%.4g\n", eps,
                    est.p_survive, est.std_error, updE, gap, tol);
    }
    return agree ? 0 : 2;
}

int cmd_pde(const CliState& st)
{
    const OscillatorParams p = st.cfg.validate();
    SolveOptions opt;
    opt.keep_times = st.slice_times;
    const GridFunction u = solve_u(make_grid(st, st.cfg.T), p, opt);
    std::printf("pde: min_u=%.3g max_u=%.6g monotonicity_violation=%.3g mirror_asym=%.3g "
                "u_y(0-,Y,0)=%.4g\n",
                u.min_u, u.max_u, u.monotonicity_violation, u.mirror_asymmetry,
                u.corner_gradient);
    // t = 0 slab slice
    {
        CsvWriter csv(out_path(st, "u_slice_t0.csv"));
        csv.row("y,z,u");
        for (int j = 0; j < u.grid.n_z; ++j)
            for (int i = 0; i < u.grid.n_y; ++i)
                csv.cells(u.y_of(i), u.z_of(j), u.at0(i, j));
    }
    for (std::size_t s = 0; s < u.kept_times.size(); ++s) {
        char name[64];
        std::snprintf(name, sizeof name, "u_slice_%zu.csv", s);
        CsvWriter csv(out_path(st, name));
        csv.row("y,z,u");
        const std::vector<double>& slab = u.kept_slabs[s];
        for (int j = 0; j < u.grid.n_z; ++j)
            for (int i = 0; i < u.grid.n_y; ++i)
                csv.cells(u.y_of(i), u.z_of(j), slab[static_cast<std::size_t>(j) * u.grid.n_y + i]);
        std::printf("pde: wrote %s (t=%.6g)\n", name, u.kept_times[s]);
    }
    return 0;
}

int cmd_density_check(const CliState& st)
{
    const OscillatorParams p = st.cfg.validate();
    double worst_identity = 0.0;
    for (double eps : {0.05 * p.Y, 0.2 * p.Y}) {
        for (int a = 0; a < 10; ++a)
            for (int b = 0; b < 10; ++b)
                for (int c = 0; c < 10; ++c) {
                    const double y = -3.0 + 6.0 * a / 9.0;
                    const double z = -p.Y + 2.0 * p.Y * b / 9.0;
                    const double t = 0.05 + (1.0 - 0.05) * c / 9.0;
                    const double res =
                        std::abs(std::expm1(density_ratio_log_residual(y, z, t, eps, p)));
                    worst_identity = std::max(worst_identity, res);
                }
    }
    // forward-equation residual of the closed-form density (central FD,
    // sampled inside the body of the density)
    double worst_forward = 0.0;
    const double h = 1e-4;
    const double eps = 0.1 * p.Y;
    for (double t : {0.3, 0.6, 0.9}) {
        const GaussMoments mo = moments(t, eps, p);
        const double sy = std::sqrt(mo.var_y), sz = std::sqrt(mo.var_z);
        for (double cy : {-1.2, 0.0, 0.8})
            for (double cz : {-1.2, 0.0, 0.8}) {
                const double y = mo.q + cy * sy;
                const double z = mo.m + cz * sz;
                if (std::abs(z) > 0.95 * p.Y) continue;
                auto f = [&](double yy, double zz, double tt) {
                    return density_p(yy, zz, tt, eps, p);
                };
                const double pt = (f(y, z, t + h) - f(y, z, t - h)) / (2.0 * h);
                const double pyy =
                    (f(y + h, z, t) - 2.0 * f(y, z, t) + f(y - h, z, t)) / (h * h);
                const double flux = ((p.c0 * (y + h) + p.k * z) * f(y + h, z, t) -
                                     (p.c0 * (y - h) + p.k * z) * f(y - h, z, t)) /
                                    (2.0 * h);
                const double pz = (f(y, z + h, t) - f(y, z - h, t)) / (2.0 * h);
                const double residual = pt - 0.5 * pyy - flux + y * pz;
                const double scale = std::abs(pt) + std::abs(0.5 * pyy) + std::abs(flux) +
                                     std::abs(y * pz) + 1e-300;
                worst_forward = std::max(worst_forward, std::abs(residual) / scale);
            }
    }
    std::printf("density-check: ratio identity worst |expm1(log residual)| = %.3g (gate 1e-10)\n",
                worst_identity);
    std::printf("density-check: forward-equation worst relative residual = %.3g (gate 1e-4)\n",
                worst_forward);
    return (worst_identity <= 1e-10 && worst_forward <= 1e-4) ? 0 : 2;
}

int cmd_expansions(const CliState& st)
{
    const OscillatorParams p = st.cfg.validate();
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(std::pow(10.0, -4.0 + 2.0 * i / 40.0));
    const ExpansionReport rep = expansions_check(grid, p);
    for (const auto& c : rep.checks) {
        std::printf("expansion %-20s sup_ratio=%.4g bound=%.3g %s\n", c.name.c_str(),
                    c.sup_ratio, c.bound, c.pass ? "ok" : "FAIL");
        CsvWriter csv(out_path(st, "expansions_" + c.name + ".csv"));
        csv.row("t,exact,series,ratio");
        for (const auto& pt : rep.points)
            if (pt.name == c.name) csv.cells(pt.t, pt.exact, pt.series, pt.ratio);
    }
    // boundary y^3 moment report against its t -> 0 limit
    {
        const double limit = -std::sqrt(3.0) / (8.0 * M_PI);
        CsvWriter csv(out_path(st, "boundary_y3.csv"));
        csv.row("t,exact,series,ratio");
        for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
            const double v = boundary_moment_y3(1.0, t, p);
            csv.cells(t, v, limit, v / limit);
            std::printf("boundary_y3 t=%-8g value=%.8f limit=%.8f ratio=%.5f\n", t, v, limit,
                        v / limit);
        }
    }
    return rep.all_pass ? 0 : 2;
}

int cmd_blowup(const CliState& st)
{
    const OscillatorParams p = st.cfg.validate();
    const GridFunction u = solve_u(make_grid(st, st.cfg.T), p);
    const BlowupTable table = blowup_diagnostic(st.cfg.eps_list, u, p);
    CsvWriter csv(out_path(st, "blowup.csv"));
    csv.row("eps,H_over_eps,I_over_eps,J_over_eps,u_over_eps");
    for (const auto& r : table.rows) {
        csv.cells(r.eps, r.H_over_eps, r.I_over_eps, r.J_over_eps, r.u_over_eps);
        std::printf("eps=%-8g H/eps=%.5g I/eps=%.5g J/eps=%.5g u/eps=%.5g\n", r.eps,
                    r.H_over_eps, r.I_over_eps, r.J_over_eps, r.u_over_eps);
    }
    std::printf("blowup: I_increasing=%d u_increasing=%d J_variation=%.3g H_variation=%.3g "
                "pass=%d\n",
                table.I_increasing, table.u_increasing, table.J_variation, table.H_variation,
                table.pass ? 1 : 0);
    return table.pass ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
    CliState st;
    CLI::App app{"elasto-plastic oscillator SVI toolkit"};
    app.require_subcommand(1);

    app.add_option("--config", st.config_path, "JSON config file");
    double c0 = -1, k = -1, Y = -1, T = -1, dt = -1;
    std::vector<double> eps;
    long long n_paths = -1, seed = -1;
    std::string outdir;
    app.add_option("--c0", c0);
    app.add_option("--k", k);
    app.add_option("--Y", Y);
    app.add_option("--T", T);
    app.add_option("--dt", dt);
    app.add_option("--eps", eps, "eps values, strictly decreasing");
    app.add_option("--n-paths", n_paths);
    app.add_option("--seed", seed);
    app.add_option("--output-dir", outdir);
    app.add_option("--ny", st.ny, "PDE nodes in y");
    app.add_option("--nz", st.nz, "PDE nodes in z");
    app.add_option("--nt", st.nt, "PDE time slabs");
    app.add_option("--ymax", st.ymax, "PDE |y| truncation");
    app.add_option("--mc-dt", st.mc_dt, "hitting-time MC step");
    app.add_option("--mc-paths", st.mc_paths, "hitting-time MC paths");
    app.add_option("--path-index", st.path_index, "path index for simulate");
    app.add_option("--slice-t", st.slice_times, "times at which pde keeps full slices");

    auto* s_sim = app.add_subcommand("simulate", "one coupled run, trajectory CSV");
    auto* s_conv = app.add_subcommand("converge", "convergence sweep over eps");
    auto* s_cen = app.add_subcommand("census", "jump-count distribution and renewal bound");
    auto* s_exit = app.add_subcommand("exit-prob", "MC exit probability vs PDE probe");
    auto* s_pde = app.add_subcommand("pde", "backward PDE solve and slices");
    auto* s_den = app.add_subcommand("density-check", "ratio identity and forward residual");
    auto* s_exp = app.add_subcommand("expansions", "small-t expansion checks");
    auto* s_blow = app.add_subcommand("blowup", "Lemma-style blow-up table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    try {
        if (!st.config_path.empty()) st.cfg = svi::load_config(st.config_path);
        if (c0 > 0) st.cfg.c0 = c0;
        if (k > 0) st.cfg.k = k;
        if (Y > 0) st.cfg.Y = Y;
        if (T > 0) st.cfg.T = T;
        if (dt > 0) st.cfg.dt = dt;
        if (!eps.empty()) st.cfg.eps_list = eps;
        if (n_paths >= 0) st.cfg.n_paths = static_cast<std::size_t>(n_paths);
        if (seed >= 0) st.cfg.seed = static_cast<std::uint64_t>(seed);
        if (!outdir.empty()) st.cfg.output_dir = outdir;

        if (s_sim->parsed()) return cmd_simulate(st);
        if (s_conv->parsed()) return cmd_converge(st);
        if (s_cen->parsed()) return cmd_census(st);
        if (s_exit->parsed()) return cmd_exit_prob(st);
        if (s_pde->parsed()) return cmd_pde(st);
        if (s_den->parsed()) return cmd_density_check(st);
        if (s_exp->parsed()) return cmd_expansions(st);
        if (s_blow->parsed()) return cmd_blowup(st);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
