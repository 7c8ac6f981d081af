#include "svi/harness.hpp"

#include "svi/brownian.hpp"
#include "svi/csv.hpp"
#include "svi/parallel.hpp"
#include "svi/simulate.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace svi {

namespace {

OscillatorParams validate_config_fields(const ExperimentConfig& cfg)
{
    const OscillatorParams p = validate_params(cfg.c0, cfg.k, cfg.Y);
    if (!(cfg.T > 0.0) || !(cfg.dt > 0.0))
        throw std::invalid_argument("config: T and dt must be positive");
    if (cfg.eps_list.empty())
        throw std::invalid_argument("config: eps_list must be nonempty");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
        const double e = cfg.eps_list[i];
        if (!(e > 0.0) || !(e < cfg.Y))
            throw std::invalid_argument("config: every eps must lie in (0, Y)");
        if (i > 0 && !(cfg.eps_list[i - 1] > e))
            throw std::invalid_argument("config: eps_list must be strictly decreasing");
    }
    if (cfg.n_paths < 100)
        throw std::invalid_argument("config: n_paths must be at least 100");
    const double eps_min = cfg.eps_list.back();
    if (!(cfg.dt <= 10.0 * eps_min * eps_min))
        throw std::invalid_argument(
            "config: dt must satisfy dt <= 10 min(eps)^2 to resolve boundary excursions");
    return p;
}

} // namespace

OscillatorParams ExperimentConfig::validate() const
{
    return validate_config_fields(*this);
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);

    auto check_keys = [](const nlohmann::json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key()))
                throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    };
    check_keys(j, {"params", "T", "dt", "eps_list", "n_paths", "seed", "output_dir"}, "root");

    ExperimentConfig cfg;
    if (j.contains("params")) {
        const auto& pj = j.at("params");
        check_keys(pj, {"c0", "k", "Y"}, "params");
        if (pj.contains("c0")) cfg.c0 = pj.at("c0").get<double>();
        if (pj.contains("k")) cfg.k = pj.at("k").get<double>();
        if (pj.contains("Y")) cfg.Y = pj.at("Y").get<double>();
    }
    if (j.contains("T")) cfg.T = j.at("T").get<double>();
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("eps_list")) cfg.eps_list = j.at("eps_list").get<std::vector<double>>();
    if (j.contains("n_paths")) cfg.n_paths = j.at("n_paths").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    return cfg;
}

namespace {

struct MeanStd {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

MeanStd mean_stderr(const std::vector<double>& xs)
{
    MeanStd ms;
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    ms.mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
    ms.stderr_of_mean = (xs.size() > 1) ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return ms;
}

} // namespace

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg)
{
    const OscillatorParams p = cfg.validate();
    const std::size_t ne = cfg.eps_list.size();
    const State init{0.0, 0.0};

    // metric[e][i], jumps[e][i]: per-(eps, path) slots filled in parallel,
    // reduced sequentially, so output is independent of scheduling.
    std::vector<std::vector<double>> metric(ne), jumps(ne);
    for (auto& v : metric) v.resize(cfg.n_paths);
    for (auto& v : jumps) v.resize(cfg.n_paths);

    parallel_for(cfg.n_paths, [&](std::size_t i) {
        const BrownianPath path = generate(PathSpec{cfg.T, cfg.dt, cfg.seed, i});
        for (std::size_t e = 0; e < ne; ++e) {
            const CoupledMetrics cm = coupled_metrics(init, path, p, cfg.eps_list[e]);
            metric[e][i] = cm.sup_metric;
            jumps[e][i] = static_cast<double>(cm.n_jumps);
        }
    });

    std::vector<ConvergenceRow> rows;
    rows.reserve(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const double eps = cfg.eps_list[e];
        const MeanStd m = mean_stderr(metric[e]);
        const MeanStd nj = mean_stderr(jumps[e]);
        rows.push_back(ConvergenceRow{eps, m.mean / eps, m.stderr_of_mean / eps, nj.mean,
                                      nj.stderr_of_mean, eps * nj.mean});
    }
    return rows;
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows)
{
    CsvWriter csv(path);
    csv.row("eps,M_over_eps,M_stderr,mean_jumps,jumps_stderr,eps_times_jumps");
    for (const auto& r : rows)
        csv.cells(r.eps, r.M_over_eps, r.M_stderr, r.mean_jumps, r.jumps_stderr,
                  r.eps_times_jumps);
}

std::vector<CensusRow> run_jump_census(const ExperimentConfig& cfg, const GridFunction& u)
{
    const OscillatorParams p = cfg.validate();
    const std::size_t ne = cfg.eps_list.size();
    const State init{0.0, 0.0};

    std::vector<std::vector<double>> jumps(ne);
    for (auto& v : jumps) v.resize(cfg.n_paths);
    parallel_for(cfg.n_paths, [&](std::size_t i) {
        const BrownianPath path = generate(PathSpec{cfg.T, cfg.dt, cfg.seed, i});
        for (std::size_t e = 0; e < ne; ++e)
            jumps[e][i] =
                static_cast<double>(coupled_metrics(init, path, p, cfg.eps_list[e]).n_jumps);
    });

    std::vector<CensusRow> rows;
    rows.reserve(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        CensusRow row;
        row.eps = cfg.eps_list[e];
        for (double nj : jumps[e]) ++row.histogram[static_cast<std::size_t>(nj)];
        const MeanStd m = mean_stderr(jumps[e]);
        row.mean_jumps = m.mean;
        row.jumps_stderr = m.stderr_of_mean;
        row.u_value = u_probe(u, row.eps);
        row.bound = (row.u_value > 0.0) ? 1.0 / row.u_value
                                        : std::numeric_limits<double>::infinity();
        row.bound_ok = row.mean_jumps <= row.bound + 3.0 * row.jumps_stderr;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_census_csv(const std::string& path, const std::vector<CensusRow>& rows)
{
    CsvWriter csv(path);
    csv.row("eps,n,count");
    for (const auto& r : rows) {
        for (const auto& [n, count] : r.histogram)
            csv.cells(r.eps, static_cast<unsigned long long>(n),
                      static_cast<unsigned long long>(count));
        csv.cells(r.eps, "mean", r.mean_jumps);
        csv.cells(r.eps, "stderr", r.jumps_stderr);
        csv.cells(r.eps, "u_probe", r.u_value);
        csv.cells(r.eps, "bound_1_over_u", r.bound);
        csv.cells(r.eps, "bound_ok", r.bound_ok ? 1 : 0);
    }
}

void write_trajectory_csv(const std::string& path, const CoupledRun& run)
{
    CsvWriter csv(path);
    csv.row("t,y,z,regime,y_eps,z_eps,jump_flag");
    std::size_t next_jump = 0;
    for (std::size_t i = 0; i < run.baseline.size(); ++i) {
        int flag = 0;
        if (next_jump < run.jumps.size() && run.jumps[next_jump].grid_index == i) {
            flag = 1;
            ++next_jump;
        }
        csv.cells(run.baseline.time(i), run.baseline.states[i].y, run.baseline.states[i].z,
                  regime_name(run.baseline.regimes[i]), run.jumped.states[i].y,
                  run.jumped.states[i].z, flag);
    }
    (void)next_jump;
}

} // namespace svi
