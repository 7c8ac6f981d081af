#include "svi/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace svi {

namespace {

inline double clamp_z(double z, double Y)
{
    return std::clamp(z, -Y, Y);
}

inline int plastic_sign(const State& s, const OscillatorParams& p)
{
    // Nonzero while the state sits absorbed on the boundary with outgoing
    // velocity, i.e. sign(y) z = Y exactly.
    if (s.z == p.Y && s.y > 0.0) return 1;
    if (s.z == -p.Y && s.y < 0.0) return -1;
    return 0;
}

void check_init(const State& init, const OscillatorParams& p)
{
    if (!(std::abs(init.z) <= p.Y))
        throw std::invalid_argument("simulate: |init.z| <= Y required");
    if (!std::isfinite(init.y) || !std::isfinite(init.z))
        throw std::invalid_argument("simulate: non-finite initial state");
}

// Walk baseline and jumped process in lockstep on the same increments.
// on_step(i, base, jump, jumped_now, sigma) is called after each update, with
// i the index of the new grid point (1-based).
template <class F>
void walk_coupled(const State& init, const BrownianPath& path, const OscillatorParams& p,
                  double eps, F&& on_step)
{
    const double dt = path.spec.dt;
    State base = init;
    State jump = init;
    int held = plastic_sign(jump, p);
    for (std::size_t i = 0; i < path.increments.size(); ++i) {
        const double dw = path.increments[i];
        base = step_svi(base, dw, dt, p);
        State cand = step_svi(jump, dw, dt, p);
        bool jumped_now = false;
        int sigma = held;
        if (held != 0 && held * cand.y <= 0.0) {
            cand = State{0.0, held * (p.Y - eps)};
            jumped_now = true;
        }
        jump = cand;
        held = plastic_sign(jump, p);
        on_step(i + 1, base, jump, jumped_now, sigma);
    }
}

} // namespace

State step_svi(const State& s, double dw, double dt, const OscillatorParams& p)
{
    if (!std::isfinite(s.y) || !std::isfinite(s.z) || !std::isfinite(dw) || !std::isfinite(dt))
        throw std::invalid_argument("step_svi: non-finite input");
    const double y = s.y - (p.c0 * s.y + p.k * s.z) * dt + dw;
    const double z = clamp_z(s.z + y * dt, p.Y);
    return State{y, z};
}

Trajectory simulate_baseline(const State& init, const BrownianPath& path,
                             const OscillatorParams& p)
{
    check_init(init, p);
    const std::size_t n = path.increments.size();
    Trajectory traj;
    traj.dt = path.spec.dt;
    traj.states.reserve(n + 1);
    traj.regimes.reserve(n + 1);
    traj.states.push_back(init);
    traj.regimes.push_back(regime_of(init, p));
    State s = init;
    for (std::size_t i = 0; i < n; ++i) {
        s = step_svi(s, path.increments[i], path.spec.dt, p);
        traj.states.push_back(s);
        traj.regimes.push_back(regime_of(s, p));
    }
    return traj;
}

CoupledRun simulate_coupled(const State& init, const BrownianPath& path,
                            const OscillatorParams& p, double eps)
{
    check_init(init, p);
    if (!(eps > 0.0) || !(eps < p.Y))
        throw std::invalid_argument("simulate_coupled: eps must lie in (0, Y)");

    const std::size_t n = path.increments.size();
    CoupledRun run;
    run.eps = eps;
    run.baseline.dt = run.jumped.dt = path.spec.dt;
    run.baseline.states.reserve(n + 1);
    run.jumped.states.reserve(n + 1);
    run.baseline.regimes.reserve(n + 1);
    run.jumped.regimes.reserve(n + 1);
    run.baseline.states.push_back(init);
    run.jumped.states.push_back(init);
    run.baseline.regimes.push_back(regime_of(init, p));
    run.jumped.regimes.push_back(regime_of(init, p));

    walk_coupled(init, path, p, eps,
                 [&](std::size_t i, const State& base, const State& jump, bool jumped_now,
                     int sigma) {
                     run.baseline.states.push_back(base);
                     run.baseline.regimes.push_back(regime_of(base, p));
                     run.jumped.states.push_back(jump);
                     run.jumped.regimes.push_back(regime_of(jump, p));
                     if (jumped_now)
                         run.jumps.push_back(JumpRecord{path.spec.dt * static_cast<double>(i),
                                                        sigma, run.jumps.size() + 1, i});
                 });
    run.n_jumps = run.jumps.size();
    return run;
}

double sup_metric(const CoupledRun& run, const OscillatorParams& p)
{
    double sup = 0.0;
    for (std::size_t i = 0; i < run.baseline.size(); ++i) {
        const double dy = run.baseline.states[i].y - run.jumped.states[i].y;
        const double dz = run.baseline.states[i].z - run.jumped.states[i].z;
        sup = std::max(sup, dy * dy + p.k * dz * dz);
    }
    return sup;
}

CoupledMetrics coupled_metrics(const State& init, const BrownianPath& path,
                               const OscillatorParams& p, double eps)
{
    check_init(init, p);
    if (!(eps > 0.0) || !(eps < p.Y))
        throw std::invalid_argument("coupled_metrics: eps must lie in (0, Y)");
    CoupledMetrics m;
    walk_coupled(init, path, p, eps,
                 [&](std::size_t, const State& base, const State& jump, bool jumped_now, int) {
                     const double dy = base.y - jump.y;
                     const double dz = base.z - jump.z;
                     m.sup_metric = std::max(m.sup_metric, dy * dy + p.k * dz * dz);
                     if (jumped_now) ++m.n_jumps;
                 });
    return m;
}

EnergyReport check_energy_inequality(const CoupledRun& run, const OscillatorParams& p,
                                     double slack)
{
    EnergyReport rep;
    rep.slack = slack;
    if (run.jumps.size() < 2) return rep;

    const double dt = run.baseline.dt;
    const double keps2 = p.k * run.eps * run.eps;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n + 1 < run.jumps.size(); ++n) {
        const JumpRecord& a = run.jumps[n];
        const JumpRecord& b = run.jumps[n + 1];
        const State& ba = run.baseline.states[a.grid_index];
        const State& bb = run.baseline.states[b.grid_index];
        // z_eps just before a jump sits on the boundary sigma*Y.
        const double da = ba.z - a.sigma * p.Y;
        const double db = bb.z - b.sigma * p.Y;
        double integral = 0.0;
        for (std::size_t i = a.grid_index; i < b.grid_index; ++i) {
            const double dy = run.baseline.states[i].y - run.jumped.states[i].y;
            integral += dy * dy * dt;
        }
        const double lhs = bb.y * bb.y - ba.y * ba.y + p.k * (db * db - da * da) +
                           2.0 * p.c0 * integral;
        worst = std::max(worst, lhs - keps2);
        ++rep.intervals;
    }
    if (rep.intervals > 0) rep.worst_margin = worst;
    rep.pass = rep.worst_margin <= slack;
    return rep;
}

PhaseSummary phase_statistics(const Trajectory& traj)
{
    PhaseSummary sum;
    const std::size_t n = traj.size();
    std::size_t i = 0;
    while (i < n) {
        if (traj.regimes[i] == Regime::Elastic) {
            ++i;
            continue;
        }
        const Regime reg = traj.regimes[i];
        std::size_t j = i;
        PlasticSegment seg;
        seg.begin = i;
        seg.sigma = (reg == Regime::PlasticPositive) ? 1 : -1;
        while (j < n && traj.regimes[j] == reg) {
            // z is frozen at the boundary, so x - z grows at rate y; the
            // clamped excess of step j -> j+1 is exactly y_{j+1} dt.
            if (j + 1 < n && traj.regimes[j + 1] == reg)
                seg.deformation += traj.states[j + 1].y * traj.dt;
            ++j;
        }
        seg.end = j;
        seg.duration = traj.dt * static_cast<double>(j - i);
        sum.total_plastic_time += seg.duration;
        sum.segments.push_back(seg);
        i = j;
    }
    return sum;
}

} // namespace svi
